#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "data.hpp"
#include "error.hpp"
#include "stats.hpp"

namespace divstat {

enum class cluster_label { D, R };

inline const char* to_string(cluster_label c) { return c == cluster_label::D ? "D" : "R"; }

struct score_record {
    std::string name;
    double ers = 0.0;
    double rbers = 0.0;
    cluster_label cluster_kmeans = cluster_label::R;
    cluster_label cluster_ward = cluster_label::R;
};

struct unit_conversion {
    double factor = 1.0; // e.g. 80 for years per lifespan
    std::string from_unit;
    std::string to_unit;
};

// ERS: area of the rectangle spanned by a point and the origin of the log-log
// plane, signed so that smaller area means higher (less negative) score.
// lscd <= 1 flips the sign logic, so such inputs are rejected outright.
inline double ers(double r, double lscd) {
    if (!(r > 0.0) || !(r < 1.0)) throw validation_error("ers: risk outside (0,1)");
    if (!(lscd > 1.0)) throw validation_error("ers: lscd must exceed 1");
    return std::log10(r) * std::log10(lscd);
}

// RBERS: vertical distance from the fitted log-log line; equals the OLS
// residual when the point participated in the fit.
inline double rbers(double r, double lscd, const regression_fit& fit) {
    if (!(r > 0.0) || !(r < 1.0)) throw validation_error("rbers: risk outside (0,1)");
    if (!(lscd > 1.0)) throw validation_error("rbers: lscd must exceed 1");
    return std::log10(r) - fit.at(std::log10(lscd));
}

inline cohort_dataset rescale_units(const cohort_dataset& ds, const unit_conversion& conv) {
    if (!(conv.factor > 0.0)) throw validation_error("rescale_units: factor must be positive");
    cohort_dataset out;
    out.unit_label = conv.to_unit;
    out.records = ds.records;
    for (auto& r : out.records) {
        r.lifetime_risk /= conv.factor;
        r.lscd /= conv.factor;
    }
    return out;
}

// ERS on per-unit quantities: restore the whole-period values before taking
// logs, so the score is invariant under the accounting unit.
inline double unit_aware_ers(double r_per_unit, double lscd_per_unit, const unit_conversion& conv) {
    if (!(conv.factor > 0.0)) throw validation_error("unit_aware_ers: factor must be positive");
    return ers(r_per_unit * conv.factor, lscd_per_unit * conv.factor);
}

namespace detail {

inline void require_clusterable(const std::vector<double>& v, const char* who) {
    if (v.size() < 2) throw validation_error(std::string(who) + ": need at least 2 values");
    bool distinct = false;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] != v[0]) { distinct = true; break; }
    if (!distinct) throw validation_error(std::string(who) + ": all values identical");
}

} // namespace detail

// Globally optimal 1-D 2-means: every split point of the sorted values is a
// candidate boundary, and the optimum is one of them. Prefix sums give each
// candidate's within-cluster SSE in O(1). D is the higher-mean side.
inline std::vector<cluster_label> kmeans2_1d(const std::vector<double>& scores) {
    detail::require_clusterable(scores, "kmeans2_1d");
    const std::size_t n = scores.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::vector<double> pre(n + 1, 0.0), pre2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = scores[idx[i]];
        pre[i + 1] = pre[i] + v;
        pre2[i + 1] = pre2[i] + v * v;
    }
    const auto sse = [&](std::size_t lo, std::size_t hi) { // [lo, hi)
        const double cnt = static_cast<double>(hi - lo);
        const double sum = pre[hi] - pre[lo];
        return (pre2[hi] - pre2[lo]) - sum * sum / cnt;
    };

    std::size_t best_split = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < n; ++k) {
        const double total = sse(0, k) + sse(k, n);
        if (total < best) {
            best = total;
            best_split = k;
        }
    }

    // Sorted ascending, so the upper block has the higher mean.
    std::vector<cluster_label> labels(n, cluster_label::R);
    for (std::size_t i = best_split; i < n; ++i) labels[idx[i]] = cluster_label::D;
    return labels;
}

// Agglomerative clustering with Ward's minimum-variance linkage, cut at two
// clusters. Merge cost |A||B|/(|A|+|B|) * (mean_A - mean_B)^2; ties resolve to
// the candidate pair containing the smallest leftmost original index.
inline std::vector<cluster_label> ward2(const std::vector<double>& scores) {
    detail::require_clusterable(scores, "ward2");
    const std::size_t n = scores.size();

    struct cluster {
        double sum;
        std::size_t count;
        std::size_t leftmost; // smallest original index, drives tie-breaking
        std::vector<std::size_t> members;
    };
    std::vector<cluster> cl;
    cl.reserve(n);
    for (std::size_t i = 0; i < n; ++i) cl.push_back({scores[i], 1, i, {i}});

    while (cl.size() > 2) {
        // Keep clusters ordered by leftmost index so the first strict minimum
        // found is the tie-break winner.
        std::sort(cl.begin(), cl.end(),
                  [](const cluster& a, const cluster& b) { return a.leftmost < b.leftmost; });
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < cl.size(); ++i) {
            const double mi = cl[i].sum / static_cast<double>(cl[i].count);
            for (std::size_t j = i + 1; j < cl.size(); ++j) {
                const double mj = cl[j].sum / static_cast<double>(cl[j].count);
                const double na = static_cast<double>(cl[i].count);
                const double nb = static_cast<double>(cl[j].count);
                const double cost = na * nb / (na + nb) * (mi - mj) * (mi - mj);
                if (cost < best) {
                    best = cost;
                    bi = i;
                    bj = j;
                }
            }
        }
        cl[bi].sum += cl[bj].sum;
        cl[bi].count += cl[bj].count;
        cl[bi].leftmost = std::min(cl[bi].leftmost, cl[bj].leftmost);
        cl[bi].members.insert(cl[bi].members.end(), cl[bj].members.begin(), cl[bj].members.end());
        cl.erase(cl.begin() + static_cast<std::ptrdiff_t>(bj));
    }

    const double m0 = cl[0].sum / static_cast<double>(cl[0].count);
    const double m1 = cl[1].sum / static_cast<double>(cl[1].count);
    const std::size_t d_side = (m0 > m1) ? 0 : 1;
    std::vector<cluster_label> labels(n, cluster_label::R);
    for (std::size_t i : cl[d_side].members) labels[i] = cluster_label::D;
    return labels;
}

// Scores and cluster labels for a whole dataset; clustering sees only the ERS
// values, matching the unsupervised construction the scores reproduce.
inline std::vector<score_record> score_table(const cohort_dataset& ds, const regression_fit& fit) {
    std::vector<score_record> out;
    out.reserve(ds.records.size());
    std::vector<double> ers_values;
    ers_values.reserve(ds.records.size());
    for (const auto& rec : ds.records) {
        score_record sr;
        sr.name = rec.name;
        sr.ers = ers(rec.lifetime_risk, rec.lscd);
        sr.rbers = rbers(rec.lifetime_risk, rec.lscd, fit);
        ers_values.push_back(sr.ers);
        out.push_back(std::move(sr));
    }
    const auto km = kmeans2_1d(ers_values);
    const auto wd = ward2(ers_values);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].cluster_kmeans = km[i];
        out[i].cluster_ward = wd[i];
    }
    return out;
}

inline std::string serialize_scores(const std::vector<score_record>& table) {
    std::string out = "name,ers,rbers,cluster_kmeans,cluster_ward\n";
    for (const auto& sr : table) {
        out += sr.name;
        out += ',';
        out += csv::format_real17(sr.ers);
        out += ',';
        out += csv::format_real17(sr.rbers);
        out += ',';
        out += to_string(sr.cluster_kmeans);
        out += ',';
        out += to_string(sr.cluster_ward);
        out += '\n';
    }
    return out;
}

struct ers_contour {
    double level;
    std::vector<std::pair<double, double>> points; // (log10 lscd, log10 risk)
};

// Level sets of ers on the log-log plane: y = level / x, sampled uniformly in
// x. Only x > 0 is meaningful (lscd > 1), so x_min must be positive.
inline ers_contour ers_contour_points(double level, double x_min, double x_max,
                                      std::size_t samples = 256) {
    if (!(x_min > 0.0) || !(x_max > x_min))
        throw validation_error("ers contour: need 0 < x_min < x_max");
    if (samples < 2) throw validation_error("ers contour: need at least 2 samples");
    ers_contour c;
    c.level = level;
    c.points.reserve(samples);
    const double step = (x_max - x_min) / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = x_min + step * static_cast<double>(i);
        c.points.emplace_back(x, level / x);
    }
    return c;
}

} // namespace divstat
