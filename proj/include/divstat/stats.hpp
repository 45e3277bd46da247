#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace divstat {

enum class corr_method { pearson, spearman };
enum class p_method { t_approx, exact_permutation, sampled_permutation };

struct correlation_result {
    double coefficient = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0;
    corr_method method = corr_method::pearson;
    p_method p_kind = p_method::t_approx;
    std::size_t n = 0;
    bool ci_defined = false;
    bool degenerate = false; // |r| = 1: CI collapsed to a point
};

struct regression_fit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> residuals;
    double r_squared = 0.0;
    bool weighted = false;
    std::vector<double> weights; // empty for unweighted fits

    double at(double x) const { return intercept + slope * x; }
};

namespace detail {

inline void require_equal_sizes(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw validation_error("paired sequences differ in length: " + std::to_string(x.size()) +
                               " vs " + std::to_string(y.size()));
}

inline bool is_constant(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] != v[0]) return false;
    return true;
}

// Continued fraction for the regularized incomplete beta, modified Lentz.
// Converges for x < (a+1)/(a+b+2); callers flip arguments otherwise.
inline double betacf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 1e-16;
    constexpr double fpmin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

// Regularized incomplete beta I_x(a, b), absolute accuracy ~1e-15.
inline double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

// Two-sided p for a t statistic with df degrees of freedom:
// P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
inline double t_two_sided(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    return incbeta(df / 2.0, 0.5, df / (df + t * t));
}

// Inverse standard normal CDF: rational approximation (Acklam) polished with
// one Halley step against erfc, good to ~1e-15 over (0, 1).
inline double inv_normal_cdf(double p) {
    if (p <= 0.0 || p >= 1.0) throw validation_error("normal quantile requires p in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement: e = Phi(x) - p.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

inline double pearson_coefficient(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return sxy / std::sqrt(sxx * syy);
}

// Average ranks, 1-based; ties get the mean of the rank positions they span.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

} // namespace detail

// CI for a correlation coefficient via the Fisher z-transform:
// tanh(atanh(r) +- z_level / sqrt(n - 3)).
struct fisher_interval {
    double low;
    double high;
    bool degenerate; // |r| = 1 collapses the interval to (r, r)
};

inline fisher_interval fisher_ci(double r, std::size_t n, double level) {
    if (n < 4) throw validation_error("fisher_ci requires n >= 4");
    if (level <= 0.0 || level >= 1.0) throw validation_error("fisher_ci level must be in (0,1)");
    if (std::fabs(r) >= 1.0) return {r, r, true};
    const double z = std::atanh(r);
    const double q = detail::inv_normal_cdf(0.5 + level / 2.0);
    const double h = q / std::sqrt(static_cast<double>(n) - 3.0);
    return {std::tanh(z - h), std::tanh(z + h), false};
}

enum class perm_mode { exact, sampled };

// Two-sided permutation p-value: the fraction of permutations of y whose
// |statistic| meets or exceeds the observed |statistic|. The identity
// permutation participates in numerator and denominator, so p > 0 always.
inline double permutation_pvalue(const std::vector<double>& x, const std::vector<double>& y,
                                 corr_method statistic, perm_mode mode,
                                 std::uint64_t samples = 100000, std::uint64_t seed = 0) {
    detail::require_equal_sizes(x, y);
    const std::size_t n = x.size();
    if (n < 3) throw validation_error("permutation test requires n >= 3");
    if (detail::is_constant(x) || detail::is_constant(y))
        throw validation_error("permutation test undefined for constant input");

    // Spearman reduces to Pearson on ranks; rank once, permute the rank vector.
    std::vector<double> xs = x, ys = y;
    if (statistic == corr_method::spearman) {
        xs = detail::average_ranks(x);
        ys = detail::average_ranks(y);
    }
    const double observed = std::fabs(detail::pearson_coefficient(xs, ys));
    const double tol = 1e-12; // counts permutations tied with the observed statistic

    if (mode == perm_mode::exact) {
        if (n > 10) throw validation_error("exact permutation limited to n <= 10");
        std::vector<double> perm = ys;
        std::sort(perm.begin(), perm.end());
        std::uint64_t hits = 0, total = 0;
        do {
            ++total;
            if (std::fabs(detail::pearson_coefficient(xs, perm)) >= observed - tol) ++hits;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return static_cast<double>(hits) / static_cast<double>(total);
    }

    // Sampled mode: one substream per permutation index, so the result is a
    // pure function of (seed, samples) independent of evaluation order.
    std::uint64_t hits = 1, total = samples + 1; // identity permutation included
    std::vector<double> perm(n);
    for (std::uint64_t k = 0; k < samples; ++k) {
        splitmix64 rng = substream(seed, k);
        perm = ys;
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
            std::swap(perm[i], perm[j]);
        }
        if (std::fabs(detail::pearson_coefficient(xs, perm)) >= observed - tol) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

inline correlation_result pearson(const std::vector<double>& x, const std::vector<double>& y,
                                  double ci_level = 0.95) {
    detail::require_equal_sizes(x, y);
    const std::size_t n = x.size();
    if (n < 3) throw validation_error("pearson requires n >= 3");
    if (detail::is_constant(x) || detail::is_constant(y))
        throw validation_error("pearson undefined for constant input");
    correlation_result res;
    res.method = corr_method::pearson;
    res.n = n;
    res.coefficient = detail::pearson_coefficient(x, y);
    if (n >= 4) {
        const auto ci = fisher_ci(res.coefficient, n, ci_level);
        res.ci_low = ci.low;
        res.ci_high = ci.high;
        res.ci_defined = true;
        res.degenerate = ci.degenerate;
    }
    const double df = static_cast<double>(n) - 2.0;
    const double r2 = res.coefficient * res.coefficient;
    if (r2 >= 1.0) {
        res.p_value = 0.0;
        res.degenerate = true;
    } else {
        const double t = res.coefficient * std::sqrt(df / (1.0 - r2));
        res.p_value = detail::t_two_sided(t, df);
    }
    res.p_kind = p_method::t_approx;
    return res;
}

// Spearman: Pearson on average ranks. Exact permutation p for n <= 9 (9! fits
// well under a second), t-approximation beyond. No CI is reported.
inline correlation_result spearman(const std::vector<double>& x, const std::vector<double>& y) {
    detail::require_equal_sizes(x, y);
    const std::size_t n = x.size();
    if (n < 3) throw validation_error("spearman requires n >= 3");
    if (detail::is_constant(x) || detail::is_constant(y))
        throw validation_error("spearman undefined for constant input");
    correlation_result res;
    res.method = corr_method::spearman;
    res.n = n;
    const auto rx = detail::average_ranks(x);
    const auto ry = detail::average_ranks(y);
    res.coefficient = detail::pearson_coefficient(rx, ry);
    if (n <= 9) {
        res.p_value = permutation_pvalue(x, y, corr_method::spearman, perm_mode::exact);
        res.p_kind = p_method::exact_permutation;
    } else {
        const double df = static_cast<double>(n) - 2.0;
        const double r2 = res.coefficient * res.coefficient;
        if (r2 >= 1.0) {
            res.p_value = 0.0;
            res.degenerate = true;
        } else {
            const double t = res.coefficient * std::sqrt(df / (1.0 - r2));
            res.p_value = detail::t_two_sided(t, df);
        }
        res.p_kind = p_method::t_approx;
    }
    return res;
}

inline regression_fit ols(const std::vector<double>& x, const std::vector<double>& y) {
    detail::require_equal_sizes(x, y);
    const std::size_t n = x.size();
    if (n < 3) throw validation_error("ols requires n >= 3");
    if (detail::is_constant(x)) throw validation_error("ols undefined for constant x");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    regression_fit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.residuals.resize(n);
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fit.residuals[i] = y[i] - fit.at(x[i]);
        sse += fit.residuals[i] * fit.residuals[i];
    }
    fit.r_squared = (syy > 0.0) ? 1.0 - sse / syy : 1.0;
    return fit;
}

// Minimizes sum w_i (y_i - a - b x_i)^2; r_squared is the weighted coefficient
// of determination about the weighted mean of y.
inline regression_fit weighted_ols(const std::vector<double>& x, const std::vector<double>& y,
                                   const std::vector<double>& w) {
    detail::require_equal_sizes(x, y);
    if (w.size() != x.size()) throw validation_error("weights length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw validation_error("weighted_ols requires n >= 3");
    if (detail::is_constant(x)) throw validation_error("weighted_ols undefined for constant x");
    double W = 0.0;
    for (double wi : w) {
        if (!(wi > 0.0)) throw validation_error("weights must be positive");
        W += wi;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) { mx += w[i] * x[i]; my += w[i] * y[i]; }
    mx /= W;
    my /= W;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += w[i] * dx * dy;
        sxx += w[i] * dx * dx;
        syy += w[i] * dy * dy;
    }
    regression_fit fit;
    fit.weighted = true;
    fit.weights = w;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.residuals.resize(n);
    double wsse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fit.residuals[i] = y[i] - fit.at(x[i]);
        wsse += w[i] * fit.residuals[i] * fit.residuals[i];
    }
    fit.r_squared = (syy > 0.0) ? 1.0 - wsse / syy : 1.0;
    return fit;
}

inline double explained_variation(const correlation_result& r) {
    if (r.method != corr_method::pearson)
        throw validation_error("explained_variation requires a Pearson result");
    return r.coefficient * r.coefficient;
}

} // namespace divstat
