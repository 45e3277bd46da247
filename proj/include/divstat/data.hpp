#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "error.hpp"

namespace divstat {

struct tissue_record {
    std::string name;
    double lifetime_risk = 0.0; // probability, open interval (0,1)
    double lscd = 0.0;          // total lifetime stem-cell divisions
    std::optional<double> s;    // stem-cell count
    std::optional<double> d;    // self-renewal divisions per lineage
    std::optional<std::string> subgroup_of;
    bool risk_approximate = false; // combined risk computed by summation
};

struct cohort_dataset {
    std::vector<tissue_record> records;
    std::string unit_label = "lifespan";
};

struct radiation_record {
    std::string name;
    double ear = 0.0; // excess absolute rate
    double err = 0.0; // excess relative risk
    double lscd = 0.0;
    double s = 0.0;
    double sd_product = 0.0;
};

struct merge_group {
    std::vector<std::string> members;
    std::optional<double> lifetime_risk; // absent: sum member risks (approximate)
    std::optional<double> lscd;          // absent: members must agree
};

struct grouping_spec {
    // Order matters for nothing downstream, but a stable order keeps reports
    // reproducible, so merges are kept sorted by the new record's name.
    std::map<std::string, merge_group> merges;
    std::vector<std::string> removals;
};

namespace detail {

inline void validate_record(const tissue_record& rec, std::size_t row) {
    const std::string where = "row " + std::to_string(row) + " (" + rec.name + "): ";
    if (rec.name.empty()) throw validation_error("row " + std::to_string(row) + ": empty name");
    if (!(rec.lifetime_risk > 0.0) || !(rec.lifetime_risk < 1.0))
        throw validation_error(where + "risk out of range (0,1)");
    if (!(rec.lscd > 0.0)) throw validation_error(where + "lscd must be positive");
    if (rec.s && !(*rec.s > 0.0)) throw validation_error(where + "s must be positive");
    if (rec.d && !(*rec.d >= 0.0)) throw validation_error(where + "d must be non-negative");
}

inline void require_unique_names(const std::vector<std::string>& names, const char* what) {
    std::set<std::string> seen;
    for (const auto& n : names)
        if (!seen.insert(n).second)
            throw validation_error(std::string(what) + ": duplicate name '" + n + "'");
}

} // namespace detail

inline cohort_dataset parse_cohort(const std::string& csv_text) {
    const csv::table t = csv::parse(csv_text);
    const std::size_t c_name = csv::column_index(t, "name");
    const std::size_t c_risk = csv::column_index(t, "lifetime_risk");
    const std::size_t c_lscd = csv::column_index(t, "lscd");
    const auto c_s = csv::find_column(t, "s");
    const auto c_d = csv::find_column(t, "d");
    const auto c_sub = csv::find_column(t, "subgroup_of");

    cohort_dataset ds;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const std::size_t line = t.row_numbers[i];
        tissue_record rec;
        rec.name = row[c_name];
        rec.lifetime_risk = csv::parse_real(row[c_risk], line, "lifetime_risk");
        rec.lscd = csv::parse_real(row[c_lscd], line, "lscd");
        if (c_s && !row[*c_s].empty()) rec.s = csv::parse_real(row[*c_s], line, "s");
        if (c_d && !row[*c_d].empty()) rec.d = csv::parse_real(row[*c_d], line, "d");
        if (c_sub && !row[*c_sub].empty()) rec.subgroup_of = row[*c_sub];
        detail::validate_record(rec, line);
        names.push_back(rec.name);
        ds.records.push_back(std::move(rec));
    }
    if (ds.records.empty()) throw validation_error("empty dataset");
    detail::require_unique_names(names, "cohort");
    return ds;
}

inline std::vector<radiation_record> parse_radiation(const std::string& csv_text) {
    const csv::table t = csv::parse(csv_text);
    const std::size_t c_name = csv::column_index(t, "name");
    const std::size_t c_ear = csv::column_index(t, "ear");
    const std::size_t c_err = csv::column_index(t, "err");
    const std::size_t c_lscd = csv::column_index(t, "lscd");
    const std::size_t c_s = csv::column_index(t, "s");
    const std::size_t c_sd = csv::column_index(t, "sd_product");

    std::vector<radiation_record> out;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const std::size_t line = t.row_numbers[i];
        radiation_record rec;
        rec.name = row[c_name];
        rec.ear = csv::parse_real(row[c_ear], line, "ear");
        rec.err = csv::parse_real(row[c_err], line, "err");
        rec.lscd = csv::parse_real(row[c_lscd], line, "lscd");
        rec.s = csv::parse_real(row[c_s], line, "s");
        rec.sd_product = csv::parse_real(row[c_sd], line, "sd_product");
        const std::string where = "row " + std::to_string(line) + " (" + rec.name + "): ";
        if (rec.name.empty()) throw validation_error("row " + std::to_string(line) + ": empty name");
        if (!(rec.lscd > 0.0)) throw validation_error(where + "lscd must be positive");
        if (!(rec.s > 0.0)) throw validation_error(where + "s must be positive");
        if (!(rec.sd_product > 0.0)) throw validation_error(where + "sd_product must be positive");
        names.push_back(rec.name);
        out.push_back(std::move(rec));
    }
    if (out.empty()) throw validation_error("empty dataset");
    detail::require_unique_names(names, "radiation");
    return out;
}

// Removals are dropped; each merge replaces its members with one combined
// record placed where the first member stood. A merge may reuse a member's
// name (common when a parent subtype absorbs its variant rows).
inline cohort_dataset collapse_subgroups(const cohort_dataset& ds, const grouping_spec& spec) {
    std::set<std::string> present;
    for (const auto& r : ds.records) present.insert(r.name);
    for (const auto& n : spec.removals)
        if (!present.count(n)) throw validation_error("collapse: unknown removal '" + n + "'");
    for (const auto& [new_name, grp] : spec.merges) {
        if (grp.members.empty())
            throw validation_error("collapse: merge '" + new_name + "' has no members");
        for (const auto& m : grp.members)
            if (!present.count(m)) throw validation_error("collapse: unknown member '" + m + "'");
        if (grp.lifetime_risk && (!(*grp.lifetime_risk > 0.0) || !(*grp.lifetime_risk < 1.0)))
            throw validation_error("collapse: merge '" + new_name + "' risk out of range (0,1)");
    }

    const std::set<std::string> removed(spec.removals.begin(), spec.removals.end());
    std::map<std::string, std::string> member_to_merge;
    for (const auto& [new_name, grp] : spec.merges)
        for (const auto& m : grp.members) {
            if (removed.count(m))
                throw validation_error("collapse: '" + m + "' both removed and merged");
            if (!member_to_merge.emplace(m, new_name).second)
                throw validation_error("collapse: '" + m + "' appears in two merges");
        }

    cohort_dataset out;
    out.unit_label = ds.unit_label;
    std::set<std::string> emitted_merges;
    for (const auto& rec : ds.records) {
        if (removed.count(rec.name)) continue;
        const auto it = member_to_merge.find(rec.name);
        if (it == member_to_merge.end()) {
            out.records.push_back(rec);
            continue;
        }
        const std::string& new_name = it->second;
        if (!emitted_merges.insert(new_name).second) continue; // later member, already merged
        const merge_group& grp = spec.merges.at(new_name);
        tissue_record merged;
        merged.name = new_name;
        if (grp.lifetime_risk) {
            merged.lifetime_risk = *grp.lifetime_risk;
        } else {
            double sum = 0.0;
            for (const auto& rc : ds.records)
                for (const auto& m : grp.members)
                    if (rc.name == m) sum += rc.lifetime_risk;
            if (!(sum < 1.0))
                throw validation_error("collapse: summed risk for '" + new_name +
                                       "' out of range (0,1)");
            merged.lifetime_risk = sum;
            merged.risk_approximate = true;
        }
        if (grp.lscd) {
            merged.lscd = *grp.lscd;
        } else {
            double shared = 0.0;
            bool first = true;
            for (const auto& rc : ds.records)
                for (const auto& m : grp.members)
                    if (rc.name == m) {
                        if (first) { shared = rc.lscd; first = false; }
                        else if (rc.lscd != shared)
                            throw validation_error("collapse: merge '" + new_name +
                                                   "' members disagree on lscd; supply one");
                    }
            merged.lscd = shared;
        }
        if (!(merged.lscd > 0.0))
            throw validation_error("collapse: merge '" + new_name + "' lscd must be positive");
        out.records.push_back(std::move(merged));
    }

    std::vector<std::string> names;
    for (const auto& r : out.records) names.push_back(r.name);
    detail::require_unique_names(names, "collapse");
    if (out.records.empty()) throw validation_error("collapse: empty result");
    return out;
}

inline std::pair<std::vector<double>, std::vector<double>> log_pairs(const cohort_dataset& ds) {
    std::pair<std::vector<double>, std::vector<double>> xy;
    xy.first.reserve(ds.records.size());
    xy.second.reserve(ds.records.size());
    for (const auto& r : ds.records) {
        xy.first.push_back(std::log10(r.lscd));
        xy.second.push_back(std::log10(r.lifetime_risk));
    }
    return xy;
}

// Canonical serialization: 17 significant digits, so parse(serialize(ds))
// round-trips every double exactly.
inline std::string serialize_cohort(const cohort_dataset& ds) {
    std::string out = "name,lifetime_risk,lscd,s,d,subgroup_of\n";
    for (const auto& r : ds.records) {
        out += r.name;
        out += ',';
        out += csv::format_real17(r.lifetime_risk);
        out += ',';
        out += csv::format_real17(r.lscd);
        out += ',';
        if (r.s) out += csv::format_real17(*r.s);
        out += ',';
        if (r.d) out += csv::format_real17(*r.d);
        out += ',';
        if (r.subgroup_of) out += *r.subgroup_of;
        out += '\n';
    }
    return out;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string dataset_hash(const cohort_dataset& ds) {
    const std::uint64_t h = fnv1a64(serialize_cohort(ds));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace divstat
