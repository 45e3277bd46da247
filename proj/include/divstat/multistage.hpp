#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace divstat {

struct multistage_params {
    double s = 1.0;         // stem-cell count
    std::vector<double> u;  // per-division driver probabilities u1..u_{n+1}
    int n = 1;              // drivers required in the exposed group
};

namespace detail {

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

inline void validate_analytic(const multistage_params& p, bool need_control) {
    if (!(p.s > 0.0)) throw validation_error("multistage: s must be positive");
    if (p.n < 1) throw validation_error("multistage: n must be at least 1");
    const std::size_t need = static_cast<std::size_t>(p.n) + (need_control ? 1 : 0);
    if (p.u.size() < need)
        throw validation_error("multistage: need " + std::to_string(need) +
                               " mutation probabilities, have " + std::to_string(p.u.size()));
    for (double ui : p.u)
        if (!(ui > 0.0) || !(ui < 1.0))
            throw validation_error("multistage: each u must lie in (0,1)");
}

inline void validate_simulation(const multistage_params& p, bool control) {
    if (!(p.s > 0.0)) throw validation_error("multistage: s must be positive");
    if (p.n < 1) throw validation_error("multistage: n must be at least 1");
    const std::size_t need = static_cast<std::size_t>(p.n) + (control ? 1 : 0);
    if (p.u.size() < need)
        throw validation_error("multistage: need " + std::to_string(need) +
                               " mutation probabilities, have " + std::to_string(p.u.size()));
    // The simulator tolerates the closed interval so certain-mutation and
    // never-mutation boundary cases stay expressible.
    for (double ui : p.u)
        if (!(ui >= 0.0) || !(ui <= 1.0))
            throw validation_error("multistage: each u must lie in [0,1]");
}

} // namespace detail

// The closed forms below hold in the u*t << 1 regime; this reports when any
// u_i * t drifts above 0.1 so callers can surface a warning.
inline bool ut_regime_exceeded(const multistage_params& p, double t) {
    for (double ui : p.u)
        if (ui * t > 0.1) return true;
    return false;
}

// Exposed-group incidence I_s(t) = s * u1..un * t^(n-1) / (n-1)!.
inline double incidence_exposed(const multistage_params& p, double t) {
    detail::validate_analytic(p, false);
    if (!(t > 0.0)) throw validation_error("incidence: t must be positive");
    double prod = p.s;
    for (int i = 0; i < p.n; ++i) prod *= p.u[static_cast<std::size_t>(i)];
    return prod * std::pow(t, p.n - 1) / detail::factorial(p.n - 1);
}

// Control-group incidence I_c(t) = s * u1..u_{n+1} * t^n / n!.
inline double incidence_control(const multistage_params& p, double t) {
    detail::validate_analytic(p, true);
    if (!(t > 0.0)) throw validation_error("incidence: t must be positive");
    double prod = p.s;
    for (int i = 0; i < p.n + 1; ++i) prod *= p.u[static_cast<std::size_t>(i)];
    return prod * std::pow(t, p.n) / detail::factorial(p.n);
}

// Excess relative risk (I_s - I_c) / I_c = (n - u_next*t) / (u_next*t).
inline double err(int n, double u_next, double t) {
    if (n < 1) throw validation_error("err: n must be at least 1");
    if (!(u_next > 0.0) || !(u_next < 1.0)) throw validation_error("err: u_next must lie in (0,1)");
    if (!(t > 0.0)) throw validation_error("err: t must be positive");
    const double ut = u_next * t;
    return (static_cast<double>(n) - ut) / ut;
}

// Excess absolute rate I_s(t) * (1 - u_next*t/n).
inline double ear(const multistage_params& p, double u_next, double t) {
    if (!(u_next > 0.0) || !(u_next < 1.0)) throw validation_error("ear: u_next must lie in (0,1)");
    const double is = incidence_exposed(p, t);
    return is * (1.0 - u_next * t / static_cast<double>(p.n));
}

enum class risk_mode { cumulative, binomial };

struct risk_estimate {
    double value = 0.0;
    bool clamped = false;        // approximation exceeded [0,1] and was cut
    bool regime_warning = false; // u * turnovers above 0.1
};

// Lifetime risk with time replaced by cell turnovers, no clonal expansion.
// cumulative: s * (u*turnovers)^n / n!. binomial: s * C(turnovers, n) * u^n.
inline risk_estimate predicted_lifetime_risk_ex(double s, double turnovers, double u, int n,
                                                risk_mode mode = risk_mode::cumulative) {
    if (n < 1) throw validation_error("predicted risk: n must be at least 1");
    if (!(s > 0.0)) throw validation_error("predicted risk: s must be positive");
    if (!(turnovers > 0.0)) throw validation_error("predicted risk: turnovers must be positive");
    if (!(u >= 0.0) || !(u <= 1.0)) throw validation_error("predicted risk: u must lie in [0,1]");
    risk_estimate est;
    est.regime_warning = u * turnovers > 0.1;
    double raw = 0.0;
    if (u > 0.0) {
        if (mode == risk_mode::cumulative) {
            raw = s * std::pow(u * turnovers, n) / detail::factorial(n);
        } else if (turnovers >= static_cast<double>(n)) {
            const double log_choose = std::lgamma(turnovers + 1.0) -
                                      std::lgamma(static_cast<double>(n) + 1.0) -
                                      std::lgamma(turnovers - static_cast<double>(n) + 1.0);
            raw = s * std::exp(log_choose + static_cast<double>(n) * std::log(u));
        }
    }
    est.value = std::clamp(raw, 0.0, 1.0);
    est.clamped = raw != est.value;
    return est;
}

inline double predicted_lifetime_risk(double s, double turnovers, double u, int n,
                                      risk_mode mode = risk_mode::cumulative) {
    return predicted_lifetime_risk_ex(s, turnovers, u, n, mode).value;
}

struct sim_config {
    std::uint64_t lineages = 0;
    std::uint64_t divisions = 0; // time horizon, in divisions
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> record_grid;
    bool control_group = false; // require n+1 drivers instead of n
};

struct sim_point {
    std::uint64_t t = 0;
    double cumulative_fraction = 0.0;
    double std_error = 0.0;
    std::uint64_t events = 0;
};

struct sim_curve {
    std::vector<sim_point> points;
    std::uint64_t lineages = 0;
    std::uint64_t seed = 0;
    std::string generator;
};

// Each lineage accumulates the required drivers strictly in order, one
// Bernoulli draw per division. Lineage i consumes substream(seed, i), so the
// curve is a pure function of the config for any worker partition.
inline sim_curve simulate_cohort(const multistage_params& p, const sim_config& cfg,
                                 unsigned workers = 1) {
    detail::validate_simulation(p, cfg.control_group);
    if (cfg.lineages < 1) throw validation_error("simulate: lineages must be at least 1");
    if (cfg.divisions < 1) throw validation_error("simulate: divisions must be at least 1");
    if (cfg.record_grid.empty()) throw validation_error("simulate: record_grid is empty");
    for (std::size_t i = 0; i < cfg.record_grid.size(); ++i) {
        if (cfg.record_grid[i] < 1 || cfg.record_grid[i] > cfg.divisions)
            throw validation_error("simulate: grid point outside [1, divisions]");
        if (i > 0 && cfg.record_grid[i] <= cfg.record_grid[i - 1])
            throw validation_error("simulate: record_grid must be strictly increasing");
    }

    const std::size_t needed = static_cast<std::size_t>(p.n) + (cfg.control_group ? 1 : 0);
    const std::size_t bins = cfg.record_grid.size();

    const auto run_range = [&](std::uint64_t lo, std::uint64_t hi, std::vector<std::uint64_t>& bin) {
        for (std::uint64_t li = lo; li < hi; ++li) {
            splitmix64 rng = substream(cfg.seed, li);
            std::size_t stage = 0;
            for (std::uint64_t div = 1; div <= cfg.divisions; ++div) {
                if (rng.next_double() < p.u[stage]) {
                    if (++stage == needed) {
                        // First grid point at or after the transforming division.
                        const auto it = std::lower_bound(cfg.record_grid.begin(),
                                                         cfg.record_grid.end(), div);
                        if (it != cfg.record_grid.end())
                            ++bin[static_cast<std::size_t>(it - cfg.record_grid.begin())];
                        break;
                    }
                }
            }
        }
    };

    std::vector<std::uint64_t> total(bins, 0);
    unsigned w = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
    if (static_cast<std::uint64_t>(w) > cfg.lineages)
        w = static_cast<unsigned>(cfg.lineages);
    if (w <= 1) {
        run_range(0, cfg.lineages, total);
    } else {
        std::vector<std::vector<std::uint64_t>> parts(w, std::vector<std::uint64_t>(bins, 0));
        std::vector<std::thread> threads;
        threads.reserve(w);
        const std::uint64_t chunk = (cfg.lineages + w - 1) / w;
        for (unsigned k = 0; k < w; ++k) {
            const std::uint64_t lo = static_cast<std::uint64_t>(k) * chunk;
            const std::uint64_t hi = std::min(cfg.lineages, lo + chunk);
            threads.emplace_back([&, lo, hi, k] { run_range(lo, hi, parts[k]); });
        }
        for (auto& t : threads) t.join();
        for (const auto& part : parts)
            for (std::size_t b = 0; b < bins; ++b) total[b] += part[b];
    }

    sim_curve curve;
    curve.lineages = cfg.lineages;
    curve.seed = cfg.seed;
    curve.generator = generator_name;
    curve.points.resize(bins);
    std::uint64_t cum = 0;
    const double L = static_cast<double>(cfg.lineages);
    for (std::size_t b = 0; b < bins; ++b) {
        cum += total[b];
        sim_point& pt = curve.points[b];
        pt.t = cfg.record_grid[b];
        pt.events = cum;
        pt.cumulative_fraction = static_cast<double>(cum) / L;
        pt.std_error = std::sqrt(pt.cumulative_fraction * (1.0 - pt.cumulative_fraction) / L);
    }
    return curve;
}

inline std::string serialize_curve(const sim_curve& curve) {
    std::string out = "t,cumulative_fraction,stderr,events\n";
    for (const auto& pt : curve.points) {
        out += std::to_string(pt.t);
        out += ',';
        out += csv::format_real17(pt.cumulative_fraction);
        out += ',';
        out += csv::format_real17(pt.std_error);
        out += ',';
        out += std::to_string(pt.events);
        out += '\n';
    }
    return out;
}

} // namespace divstat
