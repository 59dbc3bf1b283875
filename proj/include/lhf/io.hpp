#pragma once

// JSON configuration and reports, CSV helpers. Floats in CSV use a fixed
// 17-significant-digit format so identical runs give identical bytes.

#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp> // nlohmann, vendored

#include "error.hpp"
#include "hf_solver.hpp"
#include "twisted_grid.hpp"

namespace lhf {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes rows of preformatted cells as CSV.
class CsvWriter
{
  public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvWriter& row() { rows_.emplace_back(); return *this; }
    CsvWriter& operator<<(double v) { rows_.back().push_back(fmt17(v)); return *this; }
    CsvWriter& operator<<(std::size_t v) { rows_.back().push_back(std::to_string(v)); return *this; }
    CsvWriter& operator<<(int v) { rows_.back().push_back(std::to_string(v)); return *this; }
    CsvWriter& operator<<(bool v) { rows_.back().push_back(v ? "1" : "0"); return *this; }
    CsvWriter& operator<<(const std::string& v) { rows_.back().push_back(v); return *this; }

    std::string str() const
    {
        std::ostringstream os;
        write_line(os, header_);
        for (const auto& r : rows_) {
            write_line(os, r);
        }
        return os.str();
    }

    void save(const std::string& path) const
    {
        std::ofstream os(path, std::ios::binary);
        if (!os) {
            throw InvalidArgument("cannot write " + path);
        }
        os << str();
    }

  private:
    static void write_line(std::ostream& os, const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            os << (i ? "," : "") << cells[i];
        }
        os << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline void save_json(const std::string& path, const json& j)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw InvalidArgument("cannot write " + path);
    }
    os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// run configuration

enum class RunMode { solve, sweep_b, sweep_lambda, zero_temp, verify };

inline std::string to_string(RunMode m)
{
    switch (m) {
        case RunMode::solve: return "solve";
        case RunMode::sweep_b: return "sweep_b";
        case RunMode::sweep_lambda: return "sweep_lambda";
        case RunMode::zero_temp: return "zero_temp";
        default: return "verify";
    }
}

inline RunMode parse_mode(const std::string& s)
{
    for (RunMode m : {RunMode::solve, RunMode::sweep_b, RunMode::sweep_lambda, RunMode::zero_temp, RunMode::verify}) {
        if (s == to_string(m)) {
            return m;
        }
    }
    throw InvalidArgument("unknown mode '" + s + "'");
}

struct SweepRange
{
    double start = 0.9;
    double stop = 1.1;
    std::size_t steps = 3;

    double at(std::size_t i) const
    {
        return start + (stop - start) * static_cast<double>(i) / static_cast<double>(steps - 1);
    }
};

struct RunConfig
{
    RunMode mode = RunMode::solve;
    SolverConfig solver;
    SweepRange sweep;
    std::string output;
    std::uint64_t seed = threshold_probe_seed;
};

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object()) {
        throw InvalidArgument(where + " must be a JSON object");
    }
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) {
            throw InvalidArgument("unknown key '" + k + "' in " + where);
        }
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad value for '") + key + "': " + e.what());
    }
}

} // namespace detail

inline json to_json(const Potential& p)
{
    json j;
    j["type"] = p.name();
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, GaussianPotential>) {
                j["sigma"] = m.sigma;
            } else if constexpr (!std::is_same_v<M, ZeroPotential>) {
                j["alpha"] = m.alpha;
            }
        },
        p.model());
    return j;
}

inline Potential potential_from_json(const json& j)
{
    detail::reject_unknown(j, {"type", "alpha", "sigma"}, "potential");
    auto type = detail::get_or<std::string>(j, "type", "screened_coulomb");
    if (type == "screened_coulomb") {
        return Potential::screened_coulomb(detail::get_or(j, "alpha", 1.0));
    }
    if (type == "gaussian") {
        return Potential::gaussian(detail::get_or(j, "sigma", 1.0));
    }
    if (type == "exponential") {
        return Potential::exponential(detail::get_or(j, "alpha", 1.0));
    }
    if (type == "zero") {
        return Potential::zero();
    }
    throw InvalidArgument("unknown potential type '" + type + "'");
}

inline json to_json(const ScalarFunction& f)
{
    json j;
    j["type"] = f.name();
    if (const auto* fd = std::get_if<FermiDirac>(&f.kind())) {
        j["beta"] = fd->beta;
        j["mu"] = fd->mu;
    } else {
        const auto& si = std::get<SmoothedIndicator>(f.kind());
        j["N"] = si.N;
        j["plateau_halfwidth"] = si.plateau_halfwidth;
        j["transition_width"] = si.transition_width;
    }
    return j;
}

/// Indicators are built for the solver's b unless widths are given.
inline ScalarFunction function_from_json(const json& j, double b)
{
    detail::reject_unknown(j, {"type", "beta", "mu", "N", "plateau_halfwidth", "transition_width"}, "f");
    auto type = detail::get_or<std::string>(j, "type", "fermi_dirac");
    if (type == "fermi_dirac") {
        return ScalarFunction::fermi_dirac(detail::get_or(j, "beta", 2.0), detail::get_or(j, "mu", 4.0));
    }
    if (type == "indicator") {
        auto N = detail::get_or<std::size_t>(j, "N", 1);
        SmoothedIndicator si = SmoothedIndicator::with_defaults(N, b);
        si.plateau_halfwidth = detail::get_or(j, "plateau_halfwidth", si.plateau_halfwidth);
        si.transition_width = detail::get_or(j, "transition_width", si.transition_width);
        return ScalarFunction(si);
    }
    throw InvalidArgument("unknown function type '" + type + "'");
}

inline json to_json(const SolverConfig& c)
{
    json j;
    j["b"] = c.b;
    j["lambda"] = c.lambda;
    j["n_max"] = c.n_max;
    j["ball_radius"] = c.ball_radius;
    j["damping"] = c.damping;
    j["tol"] = c.tol;
    j["max_iter"] = c.max_iter;
    j["potential"] = to_json(c.potential);
    j["f"] = to_json(c.f);
    return j;
}

inline SolverConfig solver_config_from_json(const json& j)
{
    detail::reject_unknown(j, {"b", "lambda", "n_max", "ball_radius", "damping", "tol", "max_iter", "potential", "f"},
                           "solver");
    SolverConfig c;
    c.b = detail::get_or(j, "b", c.b);
    c.lambda = detail::get_or(j, "lambda", c.lambda);
    c.n_max = detail::get_or(j, "n_max", c.n_max);
    c.ball_radius = detail::get_or(j, "ball_radius", c.ball_radius);
    c.damping = detail::get_or(j, "damping", c.damping);
    c.tol = detail::get_or(j, "tol", c.tol);
    c.max_iter = detail::get_or(j, "max_iter", c.max_iter);
    require(c.b > 0.0 && std::isfinite(c.b), "b must be positive and finite");
    if (j.contains("potential")) {
        c.potential = potential_from_json(j.at("potential"));
    }
    if (j.contains("f")) {
        c.f = function_from_json(j.at("f"), c.b);
    }
    return c;
}

inline json to_json(const RunConfig& c)
{
    json j;
    j["schema_version"] = schema_version;
    j["mode"] = to_string(c.mode);
    j["solver"] = to_json(c.solver);
    j["sweep"] = {{"start", c.sweep.start}, {"stop", c.sweep.stop}, {"steps", c.sweep.steps}};
    j["output"] = c.output;
    j["seed"] = c.seed;
    return j;
}

inline void validate(const RunConfig& c)
{
    require(c.solver.b > 0.0, "b must be positive");
    require(std::fabs(c.solver.lambda) <= 0.5, "|lambda| must be <= 1/2");
    if (c.mode == RunMode::sweep_b || c.mode == RunMode::sweep_lambda) {
        require(c.sweep.steps >= 2, "sweeps need steps >= 2");
        require(std::isfinite(c.sweep.start) && std::isfinite(c.sweep.stop), "sweep bounds must be finite");
    }
    if (c.mode == RunMode::sweep_b) {
        require(c.sweep.start > 0.0 && c.sweep.stop > 0.0, "b sweep must stay at b > 0");
    }
    if (c.mode == RunMode::sweep_lambda) {
        require(std::fabs(c.sweep.start) <= 0.5 && std::fabs(c.sweep.stop) <= 0.5,
                "lambda sweep must stay within |lambda| <= 1/2");
    }
    if (c.mode == RunMode::zero_temp) {
        require(c.solver.f.is_indicator(), "zero_temp mode needs an indicator f");
    }
}

inline RunConfig run_config_from_json(const json& j)
{
    detail::reject_unknown(j, {"schema_version", "mode", "solver", "sweep", "output", "seed"}, "config");
    int version = detail::get_or(j, "schema_version", schema_version);
    if (version != schema_version) {
        throw InvalidArgument("unsupported schema_version " + std::to_string(version));
    }
    RunConfig c;
    if (j.contains("mode")) {
        c.mode = parse_mode(j.at("mode").get<std::string>());
    }
    if (j.contains("solver")) {
        c.solver = solver_config_from_json(j.at("solver"));
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        detail::reject_unknown(s, {"start", "stop", "steps"}, "sweep");
        c.sweep.start = detail::get_or(s, "start", c.sweep.start);
        c.sweep.stop = detail::get_or(s, "stop", c.sweep.stop);
        c.sweep.steps = detail::get_or(s, "steps", c.sweep.steps);
    }
    c.output = detail::get_or<std::string>(j, "output", "");
    c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed);
    return c;
}

inline RunConfig load_run_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw InvalidArgument("cannot open config " + path);
    }
    json j;
    try {
        j = json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument("config " + path + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

// ---------------------------------------------------------------------------
// reports

inline json to_json(const SolverReport& r)
{
    json j;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["final_residual"] = r.residual_history.empty() ? 0.0 : r.residual_history.back();
    j["ids"] = r.ids;
    j["contraction_estimate"] = r.contraction_estimate ? json(*r.contraction_estimate) : json(nullptr);
    j["exploratory"] = r.exploratory;
    j["residual_history"] = r.residual_history;
    j["coefficients"] = r.fixed_point.vector();
    j["effective_levels"] = r.effective_levels;
    return j;
}

inline CsvWriter residual_csv(const SolverReport& r)
{
    CsvWriter w({"iteration", "residual"});
    for (std::size_t k = 0; k < r.residual_history.size(); ++k) {
        w.row() << k << r.residual_history[k];
    }
    return w;
}

inline CsvWriter levels_csv(const SolverReport& r)
{
    CsvWriter w({"n", "e_n", "a_n"});
    for (std::size_t n = 0; n < r.effective_levels.size(); ++n) {
        w.row() << n << r.effective_levels[n] << r.fixed_point[n];
    }
    return w;
}

/// JSON metadata written next to a binary GridKernel file.
inline json grid_kernel_sidecar(const GridKernel& K, const std::string& description)
{
    json j;
    j["schema_version"] = schema_version;
    j["format"] = "lhf-grid-kernel";
    j["description"] = description;
    j["b"] = K.spec().b;
    j["n"] = K.spec().n;
    j["R"] = K.spec().R;
    j["h"] = K.spec().h();
    j["layout"] = "header {b f64, n u32, R f64} then n*n (re f64, im f64) pairs, row-major, little-endian";
    return j;
}

inline void export_grid_kernel(const std::string& path, const GridKernel& K, const std::string& description)
{
    write_grid_kernel(path, K);
    save_json(path + ".json", grid_kernel_sidecar(K, description));
}

} // namespace lhf
