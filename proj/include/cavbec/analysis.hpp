// analysis.hpp: scaling sweeps, effective decoherence, regime classification, physical-unit estimates

#pragma once

#include "cavbec/dynamics.hpp"
#include "cavbec/entanglement.hpp"
#include "cavbec/model.hpp"
#include "cavbec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace cavbec {

// --------------------------- effective decoherence -------------------------

struct EffectiveDecoherence {
    double gamma_s_eff{0.0};  // Gs g^2 N / Dl^2
    double gamma_c_eff{0.0};  // Gc g^2 / Dl^2
};

inline EffectiveDecoherence effective_decoherence(const ModelParams& p, int N) {
    if (p.delta_l == 0.0) throw std::invalid_argument("effective_decoherence: delta_l must be non-zero");
    const double r = p.g * p.g / (p.delta_l * p.delta_l);
    return {p.gamma_s * r * N, p.gamma_c * r};
}

// --------------------------- physical estimates ----------------------------

struct PhysicalParams {
    double G{2.0 * std::numbers::pi * 215e6};       // rad/s
    double g{2.0 * std::numbers::pi * 215e6};       // rad/s
    double gamma_s{2.0 * std::numbers::pi * 3e6};   // rad/s
    double gamma_c{2.0 * std::numbers::pi * 53e6};  // rad/s
    int N{1000};
    double delta_c_over_g{2.0};
    double delta_l_over_g{15.0 * std::sqrt(1000.0)};

    void validate() const {
        if (!(G > 0)) throw std::invalid_argument("physical: G must be > 0");
        if (!(g > 0)) throw std::invalid_argument("physical: g must be > 0");
        if (!(gamma_s > 0)) throw std::invalid_argument("physical: gamma_s must be > 0");
        if (!(gamma_c > 0)) throw std::invalid_argument("physical: gamma_c must be > 0");
        if (N < 1) throw std::invalid_argument("physical: N must be >= 1");
        if (!(delta_c_over_g > 0)) throw std::invalid_argument("physical: delta_c_over_g must be > 0");
        if (!(delta_l_over_g > 0)) throw std::invalid_argument("physical: delta_l_over_g must be > 0");
    }
};

/// All times in seconds, rates in rad/s.
struct ExperimentEstimates {
    double omega{0.0};
    double t_cnot{0.0};
    double t_macro{0.0};
    double t_macro_loose{0.0};
    double inv_gamma_s_eff{0.0};
    double inv_gamma_c_eff{0.0};
};

inline ExperimentEstimates experiment_estimates(const PhysicalParams& phys) {
    phys.validate();
    ModelParams p;
    p.g = phys.g;
    p.G = phys.G;
    p.delta_c = phys.delta_c_over_g * phys.g;
    p.delta_l = phys.delta_l_over_g * phys.g;
    p.gamma_s = phys.gamma_s;
    p.gamma_c = phys.gamma_c;
    const EffectiveParams e = effective_params(p, phys.N);
    const CharacteristicTimes ct = characteristic_times(phys.N);
    const EffectiveDecoherence d = effective_decoherence(p, phys.N);
    ExperimentEstimates out;
    out.omega = e.omega_big;
    out.t_cnot = ct.cnot_time / e.omega_big;
    out.t_macro = ct.macro_time / e.omega_big;
    out.t_macro_loose = ct.macro_time_loose / e.omega_big;
    out.inv_gamma_s_eff = 1.0 / d.gamma_s_eff;
    out.inv_gamma_c_eff = 1.0 / d.gamma_c_eff;
    return out;
}

// ------------------------------- regimes -----------------------------------

enum class Regime { continuous_variable, macroscopic, cat_like };

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::continuous_variable: return "continuous-variable";
        case Regime::macroscopic: return "macroscopic";
        case Regime::cat_like: return "cat-like";
    }
    return "?";
}

struct RegimeThresholds {
    double c1{std::numbers::pi / 2.0};  // continuous-variable up to c1 / N
    double c2{1.0};                     // macroscopic up to c2 / sqrt(N)
};

inline Regime scaling_regime(double omega_t, int N, RegimeThresholds th = {}) {
    if (omega_t < 0) throw std::invalid_argument("scaling_regime: omega_t must be >= 0");
    if (N < 1) throw std::invalid_argument("scaling_regime: N must be >= 1");
    if (omega_t <= th.c1 / N) return Regime::continuous_variable;
    if (omega_t <= th.c2 / std::sqrt(double(N))) return Regime::macroscopic;
    return Regime::cat_like;
}

// ------------------------------ power laws ---------------------------------

struct PowerLawFit {
    double exponent{0.0};   // slope of log y against log x
    double prefactor{0.0};  // y ~ prefactor * x^exponent
    double r2{0.0};
};

inline PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_power_law: need at least two matching points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw std::invalid_argument("fit_power_law: values must be positive");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double n = double(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= n, my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_power_law: x values are all equal");
    PowerLawFit f;
    f.exponent = sxy / sxx;
    f.prefactor = std::exp(my - f.exponent * mx);
    f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

/// gamma in E(Gamma)/E(0) ~ N^{-gamma}.
inline double fit_gamma_exponent(const std::vector<double>& N, const std::vector<double>& ratio) {
    return -fit_power_law(N, ratio).exponent;
}

// -------------------------------- sweeps -----------------------------------

enum class TargetTime { cnot, macro, macro_loose };

inline TargetTime parse_target_time(std::string_view s) {
    if (s == "cnot") return TargetTime::cnot;
    if (s == "macro") return TargetTime::macro;
    if (s == "macro_loose") return TargetTime::macro_loose;
    throw std::invalid_argument("unknown target time '" + std::string(s) + "'");
}

inline std::string to_string(TargetTime t) {
    switch (t) {
        case TargetTime::cnot: return "cnot";
        case TargetTime::macro: return "macro";
        case TargetTime::macro_loose: return "macro_loose";
    }
    return "?";
}

inline double target_omega_t(TargetTime t, int N) {
    const CharacteristicTimes ct = characteristic_times(N);
    switch (t) {
        case TargetTime::cnot: return ct.cnot_time;
        case TargetTime::macro: return ct.macro_time;
        case TargetTime::macro_loose: return ct.macro_time_loose;
    }
    return 0.0;
}

struct SweepPlan {
    std::vector<int> ns{2, 4, 6, 8};
    DetuningStrategy strategy{DetuningStrategy::sqrt};
    double detuning_base{15.0};  // Dl/g at N = 1
    double g{1.0};
    double G{1.0};
    double delta_c{2.0};
    double gamma_s{0.01};
    double gamma_c{0.1};
    TargetTime target{TargetTime::cnot};
    IntegratorConfig integrator{};
    int max_excited{1};
    int max_photons{1};
    int threads{0};  // 0: hardware concurrency

    void validate() const {
        if (ns.empty()) throw std::invalid_argument("sweep: N list must not be empty");
        for (std::size_t i = 0; i < ns.size(); ++i) {
            if (ns[i] < 1) throw std::invalid_argument("sweep: N values must be positive");
            if (i && ns[i] <= ns[i - 1]) throw std::invalid_argument("sweep: N values must be strictly ascending");
        }
        if (detuning_base == 0.0) throw std::invalid_argument("sweep: detuning_base must be non-zero");
        if (delta_c == 0.0) throw std::invalid_argument("sweep: delta_c must be non-zero");
        if (threads < 0) throw std::invalid_argument("sweep: threads must be >= 0");
        integrator.validate();
    }

    ModelParams model_for(int N) const {
        ModelParams p;
        p.g = g;
        p.G = G;
        p.delta_c = delta_c;
        p.delta_l = detuning_strategy(strategy, N, detuning_base);
        p.gamma_s = gamma_s;
        p.gamma_c = gamma_c;
        return p;
    }
};

struct SweepRow {
    int N{0};
    double delta_l_over_g{0.0};
    double omega{0.0};    // entangling rate Omega, units of g
    double omega_t{0.0};  // dimensionless time actually reached (whole steps)
    double t{0.0};
    double E_ideal_norm{0.0};
    double E_scheme_norm{0.0};
    double delta_E{0.0};
    std::string status{"ok"};

    bool ok() const { return status == "ok"; }
};

/// Runs one N up to each requested Omega t (ascending) in a single integration.
inline std::vector<SweepRow> sweep_point(const SweepPlan& plan, int N, std::vector<double> omega_ts) {
    std::sort(omega_ts.begin(), omega_ts.end());
    const ModelParams p = plan.model_for(N);
    std::vector<SweepRow> rows;
    SweepRow base;
    base.N = N;
    base.delta_l_over_g = p.delta_l / p.g;
    try {
        p.validate();
        base.omega = effective_params(p, N).omega_big;
        const BasisTable table({N, plan.max_excited, plan.max_photons});
        BackwardEulerSolver solver(hamiltonian_total(p, table), master_equation_channels(p, table), plan.integrator);
        solver.load(initial_state(table));
        const double dt = plan.integrator.dt;
        const double emax = max_entanglement(N);
        long done = 0;
        for (double target : omega_ts) {
            const long steps = std::lround(target / base.omega / dt);
            if (solver.coherent_only() && done < steps) {
                solver.advance(steps - done);
                done = steps;
            }
            while (done < steps) {
                solver.advance(1);
                if (plan.integrator.renormalize_trace) solver.renormalize();
                ++done;
                if (std::abs(solver.trace() - 1.0) > 1e-3)
                    throw NumericalFailure("trace drifted beyond 1e-3 at t = " + std::to_string(done * dt));
            }
            SweepRow r = base;
            r.t = done * dt;
            r.omega_t = base.omega * r.t;
            r.E_scheme_norm = log_negativity(partial_trace_ground(solver.state(), table)) / emax;
            r.E_ideal_norm = pure_state_negativity(ideal_evolve(N, r.omega_t)) / emax;
            r.delta_E = r.E_ideal_norm - r.E_scheme_norm;
            rows.push_back(r);
        }
    } catch (const std::exception& e) {
        rows.clear();
        for (double target : omega_ts) {
            SweepRow r = base;
            r.omega_t = target;
            r.status = std::string("failed: ") + e.what();
            rows.push_back(r);
        }
    }
    return rows;
}

/// One row per N. Rows run concurrently; the result is ordered by N, and a
/// failing row is kept with its status instead of aborting the sweep.
inline std::vector<SweepRow> scaling_sweep(const SweepPlan& plan) {
    plan.validate();
    const std::size_t n = plan.ns.size();
    std::vector<SweepRow> rows(n);
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t width = plan.threads > 0 ? std::size_t(plan.threads) : std::size_t(hw);
    // Largest N first so the longest job starts early.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = n - 1 - i;
    for (std::size_t start = 0; start < n; start += width) {
        std::vector<std::pair<std::size_t, std::future<std::vector<SweepRow>>>> jobs;
        for (std::size_t k = start; k < std::min(n, start + width); ++k) {
            const std::size_t i = order[k];
            const int N = plan.ns[i];
            jobs.emplace_back(i, std::async(std::launch::async, [&plan, N] {
                                  return sweep_point(plan, N, {target_omega_t(plan.target, N)});
                              }));
        }
        for (auto& [i, f] : jobs) rows[i] = f.get().front();
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "N,delta_l_over_g,omega,E_ideal_norm,E_scheme_norm,delta_E,status\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,", r.N, r.delta_l_over_g, r.omega,
                      r.E_ideal_norm, r.E_scheme_norm, r.delta_E);
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        os << buf << status << "\n";
    }
}

}  // namespace cavbec
