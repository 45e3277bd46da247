#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace divstat::jsonw {

// Minimal JSON emitter. Object keys keep insertion order and reals are
// printed with 17 significant digits, so a report built the same way twice
// serializes to identical bytes.
class value {
  public:
    static value object() { return value(kind::object); }
    static value array() { return value(kind::array); }
    static value str(std::string s) {
        value v(kind::string);
        v.str_ = std::move(s);
        return v;
    }
    static value real(double d) {
        value v(kind::real);
        v.real_ = d;
        return v;
    }
    static value integer(long long i) {
        value v(kind::integer);
        v.int_ = i;
        return v;
    }
    static value boolean(bool b) {
        value v(kind::boolean);
        v.bool_ = b;
        return v;
    }
    static value null() { return value(kind::null); }

    value& set(const std::string& key, value v) {
        members_.emplace_back(key, std::move(v));
        return *this;
    }
    value& push(value v) {
        items_.push_back(std::move(v));
        return *this;
    }

    std::string dump(int indent = 2) const {
        std::string out;
        write(out, indent, 0);
        out += '\n';
        return out;
    }

  private:
    enum class kind { object, array, string, real, integer, boolean, null };

    explicit value(kind k) : kind_(k) {}

    static void escape_into(std::string& out, const std::string& s) {
        out += '"';
        for (unsigned char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\b': out += "\\b"; break;
                case '\f': out += "\\f"; break;
                case '\n': out += "\\n"; break;
                case '\r': out += "\\r"; break;
                case '\t': out += "\\t"; break;
                default:
                    if (c < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out += buf;
                    } else {
                        out += static_cast<char>(c);
                    }
            }
        }
        out += '"';
    }

    void write(std::string& out, int indent, int depth) const {
        const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
        const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
        switch (kind_) {
            case kind::object: {
                if (members_.empty()) {
                    out += "{}";
                    return;
                }
                out += "{\n";
                for (std::size_t i = 0; i < members_.size(); ++i) {
                    out += pad;
                    escape_into(out, members_[i].first);
                    out += ": ";
                    members_[i].second.write(out, indent, depth + 1);
                    if (i + 1 < members_.size()) out += ',';
                    out += '\n';
                }
                out += close_pad;
                out += '}';
                return;
            }
            case kind::array: {
                if (items_.empty()) {
                    out += "[]";
                    return;
                }
                out += "[\n";
                for (std::size_t i = 0; i < items_.size(); ++i) {
                    out += pad;
                    items_[i].write(out, indent, depth + 1);
                    if (i + 1 < items_.size()) out += ',';
                    out += '\n';
                }
                out += close_pad;
                out += ']';
                return;
            }
            case kind::string: escape_into(out, str_); return;
            case kind::real: {
                if (!std::isfinite(real_)) {
                    out += "null"; // JSON has no infinities or NaN
                    return;
                }
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", real_);
                out += buf;
                return;
            }
            case kind::integer: {
                out += std::to_string(int_);
                return;
            }
            case kind::boolean: out += bool_ ? "true" : "false"; return;
            case kind::null: out += "null"; return;
        }
    }

    kind kind_;
    std::vector<std::pair<std::string, value>> members_;
    std::vector<value> items_;
    std::string str_;
    double real_ = 0.0;
    long long int_ = 0;
    bool bool_ = false;
};

} // namespace divstat::jsonw
