#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "data.hpp"
#include "json_writer.hpp"
#include "multistage.hpp"
#include "scores.hpp"
#include "stats.hpp"
#include "version.hpp"

namespace divstat {

struct figure1_report {
    correlation_result pearson_loglog;
    correlation_result spearman_loglog;
    correlation_result pearson_raw;
    regression_fit fit; // the log-log OLS line, i.e. the RRF
    double explained_loglog = 0.0;
    double explained_raw = 0.0;
    regression_fit weighted_fit;
    double weighted_explained = 0.0;
    double intercept_risk = 0.0; // 10^intercept
    std::size_t n = 0;
};

struct radiation_report {
    correlation_result ear_lscd;
    correlation_result err_lscd;
    correlation_result ear_s;
    correlation_result err_s;
    correlation_result ear_sd;
    correlation_result err_sd;
    std::size_t n = 0;
};

struct prediction_entry {
    std::string name;
    double predicted_risk = 0.0;
    double observed_risk = 0.0;
    double log10_ratio = 0.0; // log10(predicted / observed)
    double turnovers = 0.0;
    double s = 0.0; // lscd / turnovers
    int n = 3;
    bool out_of_domain = false; // prediction of 0 has no finite log ratio
    bool clamped = false;
    bool regime_warning = false;
};

struct prediction_report {
    std::vector<prediction_entry> entries;
    double u = 0.0;
    std::size_t within_one_log10 = 0;
};

inline figure1_report analyze_figure1(const cohort_dataset& ds) {
    if (ds.records.size() < 4)
        throw validation_error("analyze_figure1 requires at least 4 records");
    figure1_report rep;
    rep.n = ds.records.size();
    const auto [lx, ly] = log_pairs(ds);
    rep.pearson_loglog = pearson(lx, ly);
    rep.spearman_loglog = spearman(lx, ly);
    rep.fit = ols(lx, ly);
    rep.explained_loglog = explained_variation(rep.pearson_loglog);
    rep.intercept_risk = std::pow(10.0, rep.fit.intercept);

    std::vector<double> raw_x, raw_y, weights;
    raw_x.reserve(ds.records.size());
    raw_y.reserve(ds.records.size());
    weights.reserve(ds.records.size());
    for (const auto& r : ds.records) {
        raw_x.push_back(r.lscd);
        raw_y.push_back(r.lifetime_risk);
        weights.push_back(r.lifetime_risk);
    }
    rep.pearson_raw = pearson(raw_x, raw_y);
    rep.explained_raw = explained_variation(rep.pearson_raw);
    rep.weighted_fit = weighted_ols(lx, ly, weights);
    rep.weighted_explained = rep.weighted_fit.r_squared;
    return rep;
}

inline radiation_report analyze_radiation(const std::vector<radiation_record>& records) {
    if (records.size() < 3) throw validation_error("analyze_radiation requires at least 3 records");
    std::vector<double> ear_v, err_v, lscd_v, s_v, sd_v;
    for (const auto& r : records) {
        ear_v.push_back(r.ear);
        err_v.push_back(r.err);
        lscd_v.push_back(r.lscd);
        s_v.push_back(r.s);
        sd_v.push_back(r.sd_product);
    }
    radiation_report rep;
    rep.n = records.size();
    rep.ear_lscd = spearman(lscd_v, ear_v);
    rep.err_lscd = spearman(lscd_v, err_v);
    rep.ear_s = spearman(s_v, ear_v);
    rep.err_s = spearman(s_v, err_v);
    rep.ear_sd = spearman(sd_v, ear_v);
    rep.err_sd = spearman(sd_v, err_v);
    return rep;
}

// Tumor types with published evidence for a two-driver route get n = 2,
// everything else n = 3.
inline std::map<std::string, int> default_n_map(const cohort_dataset& ds) {
    static const char* two_driver_patterns[] = {"osteosarcoma",    "ovarian germ", "glioblastoma",
                                                "medulloblastoma", "gallbladder",  "medullary",
                                                "follicular"};
    std::map<std::string, int> m;
    for (const auto& rec : ds.records) {
        std::string lower = rec.name;
        for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        int n = 3;
        for (const char* pat : two_driver_patterns)
            if (lower.find(pat) != std::string::npos) {
                n = 2;
                break;
            }
        m[rec.name] = n;
    }
    return m;
}

inline std::map<std::string, double> parse_turnovers(const std::string& csv_text) {
    const csv::table t = csv::parse(csv_text);
    const std::size_t c_name = csv::column_index(t, "name");
    const std::size_t c_turn = csv::column_index(t, "turnovers");
    std::map<std::string, double> m;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::size_t line = t.row_numbers[i];
        const std::string& name = t.rows[i][c_name];
        const double v = csv::parse_real(t.rows[i][c_turn], line, "turnovers");
        if (!(v > 0.0))
            throw validation_error("row " + std::to_string(line) +
                                   ": turnovers must be positive");
        if (!m.emplace(name, v).second)
            throw validation_error("row " + std::to_string(line) + ": duplicate name '" + name +
                                   "'");
    }
    if (m.empty()) throw validation_error("empty dataset");
    return m;
}

// Theoretical lifetime risks with time measured in cell turnovers. The
// per-lineage turnover count T converts the dataset's total division count
// into a stem-cell count via s = lscd / T, so the two inputs stay consistent.
inline prediction_report predict_tr2(const cohort_dataset& ds,
                                     const std::map<std::string, double>& turnovers, double u,
                                     const std::map<std::string, int>& n_map) {
    prediction_report rep;
    rep.u = u;
    for (const auto& rec : ds.records) {
        const auto it = turnovers.find(rec.name);
        if (it == turnovers.end())
            throw validation_error("predict: no turnover entry for '" + rec.name + "'");
        prediction_entry e;
        e.name = rec.name;
        e.observed_risk = rec.lifetime_risk;
        e.turnovers = it->second;
        e.s = rec.lscd / e.turnovers;
        const auto nit = n_map.find(rec.name);
        e.n = (nit != n_map.end()) ? nit->second : 3;
        if (e.n < 1) throw validation_error("predict: n must be at least 1 for '" + rec.name + "'");
        const risk_estimate est = predicted_lifetime_risk_ex(e.s, e.turnovers, u, e.n);
        e.predicted_risk = est.value;
        e.clamped = est.clamped;
        e.regime_warning = est.regime_warning;
        if (e.predicted_risk > 0.0) {
            e.log10_ratio = std::log10(e.predicted_risk) - std::log10(e.observed_risk);
            if (std::fabs(e.log10_ratio) <= 1.0) ++rep.within_one_log10;
        } else {
            e.log10_ratio = -std::numeric_limits<double>::infinity();
            e.out_of_domain = true;
        }
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

inline std::string serialize_predictions(const prediction_report& rep) {
    std::string out = "name,predicted_risk,observed_risk,log10_ratio,n,turnovers\n";
    for (const auto& e : rep.entries) {
        out += e.name;
        out += ',';
        out += csv::format_real17(e.predicted_risk);
        out += ',';
        out += csv::format_real17(e.observed_risk);
        out += ',';
        out += std::isfinite(e.log10_ratio) ? csv::format_real17(e.log10_ratio) : std::string();
        out += ',';
        out += std::to_string(e.n);
        out += ',';
        out += csv::format_real17(e.turnovers);
        out += '\n';
    }
    return out;
}

namespace report_json {

inline const char* method_name(corr_method m) {
    return m == corr_method::pearson ? "pearson" : "spearman";
}

inline const char* p_method_name(p_method m) {
    switch (m) {
        case p_method::t_approx: return "t_approx";
        case p_method::exact_permutation: return "exact_permutation";
        default: return "sampled_permutation";
    }
}

inline jsonw::value correlation(const correlation_result& r) {
    jsonw::value v = jsonw::value::object();
    v.set("coefficient", jsonw::value::real(r.coefficient));
    if (r.ci_defined) {
        v.set("ci_low", jsonw::value::real(r.ci_low));
        v.set("ci_high", jsonw::value::real(r.ci_high));
    }
    v.set("p_value", jsonw::value::real(r.p_value));
    v.set("method", jsonw::value::str(method_name(r.method)));
    v.set("p_method", jsonw::value::str(p_method_name(r.p_kind)));
    v.set("n", jsonw::value::integer(static_cast<long long>(r.n)));
    if (r.degenerate) v.set("degenerate", jsonw::value::boolean(true));
    return v;
}

inline jsonw::value fit(const regression_fit& f) {
    jsonw::value v = jsonw::value::object();
    v.set("slope", jsonw::value::real(f.slope));
    v.set("intercept", jsonw::value::real(f.intercept));
    v.set("r_squared", jsonw::value::real(f.r_squared));
    v.set("weighted", jsonw::value::boolean(f.weighted));
    jsonw::value res = jsonw::value::array();
    for (double e : f.residuals) res.push(jsonw::value::real(e));
    v.set("residuals", std::move(res));
    return v;
}

inline jsonw::value figure1(const figure1_report& rep) {
    jsonw::value v = jsonw::value::object();
    v.set("n", jsonw::value::integer(static_cast<long long>(rep.n)));
    v.set("pearson_loglog", correlation(rep.pearson_loglog));
    v.set("spearman_loglog", correlation(rep.spearman_loglog));
    v.set("pearson_raw", correlation(rep.pearson_raw));
    v.set("fit", fit(rep.fit));
    v.set("explained_loglog", jsonw::value::real(rep.explained_loglog));
    v.set("explained_raw", jsonw::value::real(rep.explained_raw));
    v.set("weighted_fit", fit(rep.weighted_fit));
    v.set("weighted_explained", jsonw::value::real(rep.weighted_explained));
    v.set("intercept_risk", jsonw::value::real(rep.intercept_risk));
    // Explained-variation CI by squaring the Fisher CI endpoints of the
    // log-log Pearson coefficient.
    if (rep.pearson_loglog.ci_defined) {
        v.set("explained_ci_low",
              jsonw::value::real(rep.pearson_loglog.ci_low * rep.pearson_loglog.ci_low));
        v.set("explained_ci_high",
              jsonw::value::real(rep.pearson_loglog.ci_high * rep.pearson_loglog.ci_high));
    }
    return v;
}

inline jsonw::value scores(const std::vector<score_record>& table) {
    jsonw::value arr = jsonw::value::array();
    for (const auto& sr : table) {
        jsonw::value v = jsonw::value::object();
        v.set("name", jsonw::value::str(sr.name));
        v.set("ers", jsonw::value::real(sr.ers));
        v.set("rbers", jsonw::value::real(sr.rbers));
        v.set("cluster_kmeans", jsonw::value::str(to_string(sr.cluster_kmeans)));
        v.set("cluster_ward", jsonw::value::str(to_string(sr.cluster_ward)));
        arr.push(std::move(v));
    }
    return arr;
}

inline jsonw::value radiation(const radiation_report& rep) {
    jsonw::value v = jsonw::value::object();
    v.set("n", jsonw::value::integer(static_cast<long long>(rep.n)));
    v.set("ear_vs_lscd", correlation(rep.ear_lscd));
    v.set("err_vs_lscd", correlation(rep.err_lscd));
    v.set("ear_vs_s", correlation(rep.ear_s));
    v.set("err_vs_s", correlation(rep.err_s));
    v.set("ear_vs_sd_product", correlation(rep.ear_sd));
    v.set("err_vs_sd_product", correlation(rep.err_sd));
    return v;
}

inline jsonw::value predictions(const prediction_report& rep) {
    jsonw::value v = jsonw::value::object();
    v.set("u", jsonw::value::real(rep.u));
    v.set("within_one_log10", jsonw::value::integer(static_cast<long long>(rep.within_one_log10)));
    jsonw::value arr = jsonw::value::array();
    for (const auto& e : rep.entries) {
        jsonw::value ev = jsonw::value::object();
        ev.set("name", jsonw::value::str(e.name));
        ev.set("predicted_risk", jsonw::value::real(e.predicted_risk));
        ev.set("observed_risk", jsonw::value::real(e.observed_risk));
        ev.set("log10_ratio", jsonw::value::real(e.log10_ratio)); // null when infinite
        ev.set("n", jsonw::value::integer(e.n));
        ev.set("turnovers", jsonw::value::real(e.turnovers));
        ev.set("s", jsonw::value::real(e.s));
        if (e.out_of_domain) ev.set("out_of_domain", jsonw::value::boolean(true));
        if (e.clamped) ev.set("clamped", jsonw::value::boolean(true));
        if (e.regime_warning) ev.set("regime_warning", jsonw::value::boolean(true));
        arr.push(std::move(ev));
    }
    v.set("entries", std::move(arr));
    return v;
}

} // namespace report_json

struct report_options {
    std::optional<grouping_spec> collapse;
    std::optional<std::map<std::string, double>> turnovers;
    double u = 5e-7;
    std::optional<std::map<std::string, int>> n_map; // absent: default_n_map
    std::uint64_t seed = 0;
};

// One JSON document covering every analysis the inputs allow. The top-level
// figure1/scores pair shares one dataset and one fit; a collapsed section is
// added when a grouping spec is supplied.
inline std::string full_report(const cohort_dataset& ds,
                               const std::optional<std::vector<radiation_record>>& radiation,
                               const report_options& opt) {
    jsonw::value root = jsonw::value::object();

    jsonw::value meta = jsonw::value::object();
    meta.set("library", jsonw::value::str(library_name));
    meta.set("version", jsonw::value::str(library_version));
    meta.set("generator", jsonw::value::str(generator_name));
    meta.set("dataset_hash", jsonw::value::str(dataset_hash(ds)));
    meta.set("seed", jsonw::value::integer(static_cast<long long>(opt.seed)));
    meta.set("n_records", jsonw::value::integer(static_cast<long long>(ds.records.size())));
    meta.set("unit_label", jsonw::value::str(ds.unit_label));
    root.set("metadata", std::move(meta));

    const figure1_report fig1 = analyze_figure1(ds);
    root.set("figure1", report_json::figure1(fig1));
    root.set("scores", report_json::scores(score_table(ds, fig1.fit)));

    if (opt.collapse) {
        const cohort_dataset reduced = collapse_subgroups(ds, *opt.collapse);
        jsonw::value sec = jsonw::value::object();
        sec.set("n", jsonw::value::integer(static_cast<long long>(reduced.records.size())));
        sec.set("dataset_hash", jsonw::value::str(dataset_hash(reduced)));
        sec.set("figure1", report_json::figure1(analyze_figure1(reduced)));
        root.set("collapsed", std::move(sec));
    }

    if (radiation) root.set("radiation", report_json::radiation(analyze_radiation(*radiation)));

    if (opt.turnovers) {
        const auto n_map = opt.n_map ? *opt.n_map : default_n_map(ds);
        root.set("predictions",
                 report_json::predictions(predict_tr2(ds, *opt.turnovers, opt.u, n_map)));
    }

    return root.dump();
}

} // namespace divstat
