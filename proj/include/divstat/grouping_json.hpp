#pragma once

#include <string>

#include <json.hpp>

#include "data.hpp"
#include "error.hpp"

namespace divstat {

// GroupingSpec JSON:
//   {"removals": ["name", ...],
//    "merges": {"new name": {"members": [...],
//                            "lifetime_risk": 0.0276,   // optional: omit to sum members
//                            "lscd": 9.27e9}, ...}}     // optional: omit if members agree
inline grouping_spec parse_grouping(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("grouping spec: ") + e.what());
    }
    if (!j.is_object()) throw validation_error("grouping spec: top level must be an object");

    grouping_spec spec;
    if (j.contains("removals")) {
        if (!j["removals"].is_array())
            throw validation_error("grouping spec: removals must be an array");
        for (const auto& n : j["removals"]) {
            if (!n.is_string())
                throw validation_error("grouping spec: removal entries must be strings");
            spec.removals.push_back(n.get<std::string>());
        }
    }
    if (j.contains("merges")) {
        if (!j["merges"].is_object())
            throw validation_error("grouping spec: merges must be an object");
        for (const auto& [name, body] : j["merges"].items()) {
            if (!body.is_object() || !body.contains("members") || !body["members"].is_array())
                throw validation_error("grouping spec: merge '" + name +
                                       "' needs a members array");
            merge_group grp;
            for (const auto& m : body["members"]) {
                if (!m.is_string())
                    throw validation_error("grouping spec: merge '" + name +
                                           "' members must be strings");
                grp.members.push_back(m.get<std::string>());
            }
            if (body.contains("lifetime_risk")) {
                if (!body["lifetime_risk"].is_number())
                    throw validation_error("grouping spec: merge '" + name +
                                           "' lifetime_risk must be a number");
                grp.lifetime_risk = body["lifetime_risk"].get<double>();
            }
            if (body.contains("lscd")) {
                if (!body["lscd"].is_number())
                    throw validation_error("grouping spec: merge '" + name +
                                           "' lscd must be a number");
                grp.lscd = body["lscd"].get<double>();
            }
            spec.merges.emplace(name, std::move(grp));
        }
    }
    return spec;
}

} // namespace divstat
