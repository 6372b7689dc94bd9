// runner.hpp: executes a RunConfig and writes its outputs plus a manifest

#pragma once

#include "cavbec/analysis.hpp"
#include "cavbec/config.hpp"
#include "cavbec/dynamics.hpp"
#include "cavbec/oracle.hpp"
#include "cavbec/qdist.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#ifndef CAVBEC_VERSION
#define CAVBEC_VERSION "0.0.0"
#endif

namespace cavbec {

struct RunResult {
    std::vector<std::string> outputs;  // file names relative to output_dir
    json summary;                      // small mode-specific digest, also stored in the manifest
};

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

inline double omega_for(const RunConfig& c, int N) { return effective_params(c.model, N, c.rate_convention).omega_big; }

inline RunResult run_simulate(const RunConfig& c, const std::filesystem::path& dir) {
    const BasisTable table(c.truncation);
    const int N = table.N();
    const double omega = omega_for(c, N);
    const double t_final = c.simulate.t_final ? *c.simulate.t_final : *c.simulate.omega_t_final / omega;
    TrajectoryRecord rec = evolve(initial_state(table), t_final, c.integrator, c.model, table, c.simulate.record_every);
    rec.omega_big = omega;
    for (std::size_t i = 0; i < rec.size(); ++i) rec.omega_t[i] = omega * rec.t[i];
    auto os = open_out(dir / "trajectory.csv");
    rec.write_csv(os);
    RunResult r;
    r.outputs.push_back("trajectory.csv");
    std::size_t peak = 0;
    for (std::size_t i = 1; i < rec.size(); ++i)
        if (rec.E[i] > rec.E[peak]) peak = i;
    r.summary = {{"N", N},
                 {"dim", table.dim()},
                 {"omega", omega},
                 {"t_final", rec.t.back()},
                 {"peak_E", rec.E[peak]},
                 {"peak_omega_t", rec.omega_t[peak]},
                 {"final_E", rec.E.back()},
                 {"final_trace", rec.trace.back()}};
    return r;
}

inline RunResult run_oracle(const RunConfig& c, const std::filesystem::path& dir) {
    const int N = c.truncation.N;
    const double emax = max_entanglement(N);
    auto os = open_out(dir / "oracle.csv");
    os << "omega_t,E,E_norm\n";
    char buf[128];
    for (int i = 0; i < c.oracle.points; ++i) {
        const double wt = c.oracle.omega_t_max * i / (c.oracle.points - 1);
        const double E = pure_state_negativity(ideal_evolve(N, wt, c.oracle.squeezing));
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", wt, E, E / emax);
        os << buf;
    }
    RunResult r;
    r.outputs.push_back("oracle.csv");
    r.summary = {{"N", N}, {"E_max", emax}, {"points", c.oracle.points}};
    return r;
}

inline RunResult run_sweep(const RunConfig& c, const std::filesystem::path& dir) {
    const std::vector<SweepRow> rows = scaling_sweep(*c.sweep);
    auto os = open_out(dir / "sweep.csv");
    write_sweep_csv(os, rows);
    RunResult r;
    r.outputs.push_back("sweep.csv");
    int failed = 0;
    for (const auto& row : rows) failed += row.ok() ? 0 : 1;
    r.summary = {{"rows", rows.size()}, {"failed", failed}};
    return r;
}

inline RunResult run_qdist(const RunConfig& c, const std::filesystem::path& dir) {
    const int N = c.truncation.N;
    const double wt = c.qdist.omega_t > 0 ? c.qdist.omega_t : characteristic_times(N).macro_time;
    GroundDensityMatrix g;
    if (c.qdist.source == "oracle") {
        double rotation = 0.0;
        if (c.qdist.rotation) {
            const EffectiveParams e = effective_params(c.model, N, c.rate_convention);
            rotation = e.omega / e.omega_big * wt;
        }
        g = ideal_evolve(N, wt, c.qdist.squeezing, rotation).density();
    } else {
        const BasisTable table(c.truncation);
        DensityMatrix final_state;
        const double t_final = wt / omega_for(c, N);
        const long steps = std::max(1L, std::lround(t_final / c.integrator.dt));
        evolve(initial_state(table), t_final, c.integrator, c.model, table, steps,
               [&](double, const DensityMatrix& rho) { final_state = rho; });
        g = partial_trace_ground(final_state, table);
    }
    const QGrid grid = q_grid(g, c.qdist.resolution_theta, c.qdist.resolution_phi);
    RunResult r;
    json k2s = json::array();
    for (int k2 = 0; k2 <= N; ++k2) {
        const std::string name = "qdist_k2_" + std::to_string(k2) + ".csv";
        auto os = open_out(dir / name);
        grid.write_csv(os, k2);
        r.outputs.push_back(name);
        k2s.push_back({{"k2", k2}, {"file", name}, {"weight", k2_weight(g, k2)}, {"integral", grid.integral(k2)}});
    }
    const SqueezingDiagnostics sq = squeezing_diagnostics(c.model, N);
    json man = {{"N", N},
                {"omega_t", wt},
                {"source", c.qdist.source},
                {"resolution_theta", c.qdist.resolution_theta},
                {"resolution_phi", c.qdist.resolution_phi},
                {"total_integral", grid.total_integral()},
                {"k2", k2s},
                {"squeezing",
                 {{"expected", sq.expected}, {"spurious", sq.spurious}, {"spurious_linear", sq.spurious_linear}, {"net", sq.net}}}};
    auto os = open_out(dir / "qdist.json");
    os << man.dump(2) << "\n";
    r.outputs.push_back("qdist.json");
    r.summary = {{"N", N}, {"omega_t", wt}, {"total_integral", grid.total_integral()}};
    return r;
}

inline RunResult run_estimate(const RunConfig& c, const std::filesystem::path& dir) {
    const ExperimentEstimates e = experiment_estimates(*c.physical);
    const double om = e.omega;
    json j = {{"omega_rad_per_s", om},
              {"t_cnot_s", e.t_cnot},
              {"t_macro_s", e.t_macro},
              {"t_macro_loose_s", e.t_macro_loose},
              {"inv_gamma_s_eff_s", e.inv_gamma_s_eff},
              {"inv_gamma_c_eff_s", e.inv_gamma_c_eff}};
    auto os = open_out(dir / "estimates.json");
    os << j.dump(2) << "\n";
    RunResult r;
    r.outputs.push_back("estimates.json");
    r.summary = j;
    return r;
}

}  // namespace detail

/// Runs the configured mode, writes its files and manifest.json into output_dir.
/// Throws ConfigError, NumericalFailure or std::runtime_error on failure.
inline RunResult run(const RunConfig& c) {
    namespace fs = std::filesystem;
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir(c.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

    RunResult r;
    switch (c.mode) {
        case RunMode::simulate: r = detail::run_simulate(c, dir); break;
        case RunMode::oracle: r = detail::run_oracle(c, dir); break;
        case RunMode::sweep: r = detail::run_sweep(c, dir); break;
        case RunMode::qdist: r = detail::run_qdist(c, dir); break;
        case RunMode::estimate: r = detail::run_estimate(c, dir); break;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest = {{"kind", "cavbec-manifest"},
                     {"version", CAVBEC_VERSION},
                     {"mode", to_string(c.mode)},
                     {"wall_time_s", wall},
                     {"outputs", r.outputs},
                     {"summary", r.summary},
                     {"config", to_json(c)}};
    auto os = detail::open_out(dir / "manifest.json");
    os << manifest.dump(2) << "\n";
    return r;
}

}  // namespace cavbec
