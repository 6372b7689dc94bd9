// config.hpp: run configuration, with JSON parsing, validation and dotted-path overrides

#pragma once

#include "cavbec/analysis.hpp"
#include "cavbec/dynamics.hpp"
#include "cavbec/fockspace.hpp"
#include "cavbec/model.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cavbec {

using json = nlohmann::ordered_json;

/// Invalid or unreadable configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RunMode { simulate, oracle, sweep, qdist, estimate };

inline RunMode parse_run_mode(std::string_view s) {
    if (s == "simulate") return RunMode::simulate;
    if (s == "oracle") return RunMode::oracle;
    if (s == "sweep") return RunMode::sweep;
    if (s == "qdist") return RunMode::qdist;
    if (s == "estimate") return RunMode::estimate;
    throw ConfigError("mode: unknown mode '" + std::string(s) + "'");
}

inline std::string to_string(RunMode m) {
    switch (m) {
        case RunMode::simulate: return "simulate";
        case RunMode::oracle: return "oracle";
        case RunMode::sweep: return "sweep";
        case RunMode::qdist: return "qdist";
        case RunMode::estimate: return "estimate";
    }
    return "?";
}

struct SimulateSection {
    std::optional<double> omega_t_final;  // preferred; converted with Omega
    std::optional<double> t_final;        // units 1/g
    long record_every{10};
};

struct OracleSection {
    double omega_t_max{std::numbers::pi};
    int points{401};
    bool squeezing{false};
};

struct QdistSection {
    std::string source{"oracle"};  // oracle | simulate
    double omega_t{0.0};           // 0 means 1/sqrt(2N)
    int resolution_theta{64};
    int resolution_phi{128};
    bool squeezing{false};         // oracle source only
    bool rotation{false};          // oracle source only: include the omega (S1 + S2) term
};

struct RunConfig {
    RunMode mode{RunMode::simulate};
    std::string output_dir{"out"};
    ModelParams model{};
    RateConvention rate_convention{RateConvention::standard};
    TruncationSpec truncation{};
    IntegratorConfig integrator{};
    SimulateSection simulate{};
    OracleSection oracle{};
    QdistSection qdist{};
    std::optional<SweepPlan> sweep;
    std::optional<PhysicalParams> physical;
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line, col = 1;
        else ++col;
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + "must be an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        const std::string p = sub(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(p + " must be a boolean");
            out = v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(p + " must be an integer");
            out = v.get<T>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError(p + " must be a number");
            out = v.get<T>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(p + " must be a string");
            out = v.get<std::string>();
        } else {
            static_assert(sizeof(T) == 0, "unsupported config type");
        }
    }

    template <class T>
    void get(const char* key, std::optional<T>& out) {
        if (!j_.contains(key)) {
            seen_.insert(key);
            return;
        }
        T v{};
        get(key, v);
        out = v;
    }

    void get(const char* key, std::vector<int>& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(sub(key) + " must be an array of integers");
        out.clear();
        for (const auto& e : v) {
            if (!e.is_number_integer()) throw ConfigError(sub(key) + " must be an array of integers");
            out.push_back(e.get<int>());
        }
    }

    Reader child(const char* key) {
        seen_.insert(key);
        return Reader(j_.at(key), sub(key));
    }

    /// Rejects keys that were never asked for.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError("unknown key '" + sub(it.key()) + "'");
    }

    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string where() const { return path_.empty() ? "config " : path_ + " "; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// Semantic checks rethrown as ConfigError with the offending field named.
template <class F>
void checked(const std::string& prefix, F&& f) {
    try {
        f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(prefix + ": " + e.what());
    }
}

}  // namespace detail

/// Writes `value` at a dotted path ("model.delta_l"), creating objects on the way.
/// The value is read as JSON when it parses ("40", "true", "[2,4]"), else as a string.
inline void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key.path=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError("--set: empty component in '" + path + "'");
        if (!node->is_object()) throw ConfigError("--set: '" + path + "' crosses a non-object value");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

inline RunConfig config_from_json(const json& root) {
    using detail::Reader;
    using detail::checked;
    // A manifest written by a previous run carries the resolved config.
    if (root.is_object() && root.contains("kind") && root["kind"] == "cavbec-manifest") {
        if (!root.contains("config")) throw ConfigError("manifest has no 'config' section");
        return config_from_json(root.at("config"));
    }
    Reader r(root, "");
    RunConfig c;

    std::string mode;
    if (!r.has("mode")) throw ConfigError("mode: missing (one of simulate, oracle, sweep, qdist, estimate)");
    r.get("mode", mode);
    c.mode = parse_run_mode(mode);
    r.get("output_dir", c.output_dir);
    if (c.output_dir.empty()) throw ConfigError("output_dir must not be empty");

    if (r.has("model")) {
        Reader m = r.child("model");
        m.get("g", c.model.g);
        m.get("G", c.model.G);
        m.get("delta_c", c.model.delta_c);
        m.get("delta_l", c.model.delta_l);
        m.get("gamma_s", c.model.gamma_s);
        m.get("gamma_c", c.model.gamma_c);
        std::string conv = "standard";
        m.get("rate_convention", conv);
        if (conv == "standard") c.rate_convention = RateConvention::standard;
        else if (conv == "adiabatic_literal") c.rate_convention = RateConvention::adiabatic_literal;
        else throw ConfigError("model.rate_convention: expected standard or adiabatic_literal");
        m.finish();
    }
    checked("model", [&] { c.model.validate(); });
    if (c.model.delta_c == 0.0) throw ConfigError("model.delta_c must be non-zero");
    if (c.model.delta_l == 0.0) throw ConfigError("model.delta_l must be non-zero");

    if (r.has("truncation")) {
        Reader t = r.child("truncation");
        t.get("N", c.truncation.N);
        t.get("max_excited", c.truncation.max_excited);
        t.get("max_photons", c.truncation.max_photons);
        t.finish();
    }
    if (c.truncation.N < 1) throw ConfigError("truncation.N must be >= 1 (got " + std::to_string(c.truncation.N) + ")");
    checked("truncation", [&] { c.truncation.validate(); });

    if (r.has("integrator")) {
        Reader i = r.child("integrator");
        i.get("dt", c.integrator.dt);
        i.get("tolerance", c.integrator.tolerance);
        i.get("max_iterations", c.integrator.max_iterations);
        i.get("renormalize_trace", c.integrator.renormalize_trace);
        i.finish();
    }
    checked("integrator", [&] { c.integrator.validate(); });

    if (r.has("simulate")) {
        Reader s = r.child("simulate");
        s.get("omega_t_final", c.simulate.omega_t_final);
        s.get("t_final", c.simulate.t_final);
        s.get("record_every", c.simulate.record_every);
        s.finish();
        if (c.simulate.omega_t_final && c.simulate.t_final)
            throw ConfigError("simulate: give either omega_t_final or t_final, not both");
        if (c.simulate.omega_t_final && *c.simulate.omega_t_final < 0)
            throw ConfigError("simulate.omega_t_final must be >= 0");
        if (c.simulate.t_final && *c.simulate.t_final < 0) throw ConfigError("simulate.t_final must be >= 0");
        if (c.simulate.record_every < 1) throw ConfigError("simulate.record_every must be >= 1");
    }
    if (!c.simulate.omega_t_final && !c.simulate.t_final) c.simulate.omega_t_final = std::numbers::pi / 2.0;

    if (r.has("oracle")) {
        Reader o = r.child("oracle");
        o.get("omega_t_max", c.oracle.omega_t_max);
        o.get("points", c.oracle.points);
        o.get("squeezing", c.oracle.squeezing);
        o.finish();
        if (!(c.oracle.omega_t_max > 0)) throw ConfigError("oracle.omega_t_max must be > 0");
        if (c.oracle.points < 2) throw ConfigError("oracle.points must be >= 2");
    }

    if (r.has("qdist")) {
        Reader q = r.child("qdist");
        q.get("source", c.qdist.source);
        q.get("omega_t", c.qdist.omega_t);
        q.get("resolution_theta", c.qdist.resolution_theta);
        q.get("resolution_phi", c.qdist.resolution_phi);
        q.get("squeezing", c.qdist.squeezing);
        q.get("rotation", c.qdist.rotation);
        q.finish();
        if (c.qdist.source != "oracle" && c.qdist.source != "simulate")
            throw ConfigError("qdist.source must be 'oracle' or 'simulate'");
        if (c.qdist.omega_t < 0) throw ConfigError("qdist.omega_t must be >= 0");
        if (c.qdist.resolution_theta < 2) throw ConfigError("qdist.resolution_theta must be >= 2");
        if (c.qdist.resolution_phi < 2) throw ConfigError("qdist.resolution_phi must be >= 2");
    }

    if (r.has("sweep")) {
        Reader s = r.child("sweep");
        SweepPlan plan;
        plan.g = c.model.g;
        plan.G = c.model.G;
        plan.delta_c = c.model.delta_c;
        plan.gamma_s = c.model.gamma_s;
        plan.gamma_c = c.model.gamma_c;
        plan.integrator = c.integrator;
        plan.max_excited = c.truncation.max_excited;
        plan.max_photons = c.truncation.max_photons;
        s.get("N", plan.ns);
        std::string strategy = to_string(plan.strategy), target = to_string(plan.target);
        s.get("strategy", strategy);
        s.get("detuning_base", plan.detuning_base);
        s.get("target", target);
        s.get("threads", plan.threads);
        s.finish();
        checked("sweep.strategy", [&] { plan.strategy = parse_detuning_strategy(strategy); });
        checked("sweep.target", [&] { plan.target = parse_target_time(target); });
        for (int n : plan.ns)
            if (n < 1) throw ConfigError("sweep.N values must be >= 1");
        checked("sweep", [&] { plan.validate(); });
        c.sweep = plan;
    }

    if (r.has("physical")) {
        Reader p = r.child("physical");
        PhysicalParams phys;
        p.get("G", phys.G);
        p.get("g", phys.g);
        p.get("gamma_s", phys.gamma_s);
        p.get("gamma_c", phys.gamma_c);
        p.get("N", phys.N);
        p.get("delta_c_over_g", phys.delta_c_over_g);
        p.get("delta_l_over_g", phys.delta_l_over_g);
        p.finish();
        if (phys.N < 1) throw ConfigError("physical.N must be >= 1");
        checked("physical", [&] { phys.validate(); });
        c.physical = phys;
    }
    r.finish();

    if (c.mode == RunMode::sweep && !c.sweep) throw ConfigError("sweep: section required in sweep mode");
    if (c.mode == RunMode::estimate && !c.physical) throw ConfigError("physical: section required in estimate mode");
    return c;
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": parse error at " + detail::line_col(text, e.byte ? e.byte - 1 : 0) + ": " + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

/// The embedded config of a manifest, or j itself.
inline json unwrap_manifest(json j) {
    if (j.is_object() && j.contains("kind") && j["kind"] == "cavbec-manifest" && j.contains("config")) {
        json inner = j["config"];
        return inner;
    }
    return j;
}

/// CAVBEC_OUTPUT_DIR, when set, wins over the configured output directory.
inline void apply_environment(RunConfig& c) {
    if (const char* env = std::getenv("CAVBEC_OUTPUT_DIR"); env && *env) c.output_dir = env;
}

/// Reads a config (or manifest), applies --set overrides and the CAVBEC_OUTPUT_DIR variable.
inline RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    json j = unwrap_manifest(read_json_file(path));
    for (const auto& o : overrides) apply_override(j, o);
    RunConfig c = config_from_json(j);
    apply_environment(c);
    return c;
}

/// Fully resolved config, with every default made explicit.
inline json to_json(const RunConfig& c) {
    json j;
    j["mode"] = to_string(c.mode);
    j["output_dir"] = c.output_dir;
    j["model"] = {{"g", c.model.g},
                  {"G", c.model.G},
                  {"delta_c", c.model.delta_c},
                  {"delta_l", c.model.delta_l},
                  {"gamma_s", c.model.gamma_s},
                  {"gamma_c", c.model.gamma_c},
                  {"rate_convention", c.rate_convention == RateConvention::standard ? "standard" : "adiabatic_literal"}};
    j["truncation"] = {{"N", c.truncation.N},
                       {"max_excited", c.truncation.max_excited},
                       {"max_photons", c.truncation.max_photons}};
    j["integrator"] = {{"dt", c.integrator.dt},
                       {"tolerance", c.integrator.tolerance},
                       {"max_iterations", c.integrator.max_iterations},
                       {"renormalize_trace", c.integrator.renormalize_trace}};
    json sim = {{"record_every", c.simulate.record_every}};
    if (c.simulate.omega_t_final) sim["omega_t_final"] = *c.simulate.omega_t_final;
    if (c.simulate.t_final) sim["t_final"] = *c.simulate.t_final;
    j["simulate"] = sim;
    j["oracle"] = {{"omega_t_max", c.oracle.omega_t_max}, {"points", c.oracle.points}, {"squeezing", c.oracle.squeezing}};
    j["qdist"] = {{"source", c.qdist.source},
                  {"omega_t", c.qdist.omega_t},
                  {"resolution_theta", c.qdist.resolution_theta},
                  {"resolution_phi", c.qdist.resolution_phi},
                  {"squeezing", c.qdist.squeezing},
                  {"rotation", c.qdist.rotation}};
    if (c.sweep)
        j["sweep"] = {{"N", c.sweep->ns},
                      {"strategy", to_string(c.sweep->strategy)},
                      {"detuning_base", c.sweep->detuning_base},
                      {"target", to_string(c.sweep->target)},
                      {"threads", c.sweep->threads}};
    if (c.physical)
        j["physical"] = {{"G", c.physical->G},
                         {"g", c.physical->g},
                         {"gamma_s", c.physical->gamma_s},
                         {"gamma_c", c.physical->gamma_c},
                         {"N", c.physical->N},
                         {"delta_c_over_g", c.physical->delta_c_over_g},
                         {"delta_l_over_g", c.physical->delta_l_over_g}};
    return j;
}

}  // namespace cavbec
