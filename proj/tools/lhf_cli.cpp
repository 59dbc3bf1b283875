// lhf: command-line driver for the Hartree-Fock kernel solver.
//
//   lhf solve        --config cfg.json [--out dir] [--seed n]
//   lhf sweep-b      ...
//   lhf sweep-lambda ...
//   lhf zero-temp    ...
//   lhf verify       ...
//
// Exit codes: 0 ok, 1 invalid input, 2 non-convergence, 3 failed verification.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <lhf/lhf.hpp>

namespace fs = std::filesystem;
using namespace lhf;

namespace {

struct Options
{
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

struct VerificationFailed
{
};

RunConfig resolve(RunMode mode, const Options& opt)
{
    RunConfig cfg;
    if (!opt.config.empty()) {
        cfg = load_run_config(opt.config);
        json raw = json::parse(std::ifstream(opt.config));
        if (raw.contains("mode") && cfg.mode != mode) {
            throw InvalidArgument("config mode '" + to_string(cfg.mode) + "' does not match subcommand '" +
                                  to_string(mode) + "'");
        }
    }
    cfg.mode = mode;
    if (opt.seed) {
        cfg.seed = *opt.seed;
    }
    // precedence: --out, then LHF_OUT, then the config, then ./lhf_out
    if (!opt.out.empty()) {
        cfg.output = opt.out;
    } else if (const char* env = std::getenv("LHF_OUT"); env && *env) {
        cfg.output = env;
    } else if (cfg.output.empty()) {
        cfg.output = "lhf_out";
    }
    validate(cfg);
    fs::create_directories(cfg.output);
    return cfg;
}

json envelope(const RunConfig& cfg)
{
    json j;
    j["schema_version"] = schema_version;
    j["config"] = to_json(cfg);
    return j;
}

std::string path_in(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.output) / name).string(); }

/// Indicator f follows b when a sweep moves it; other functions are kept.
SolverConfig at_field(const SolverConfig& base, double b)
{
    SolverConfig c = base;
    c.b = b;
    c.lambda = base.lambda / base.b * b;
    if (const auto* si = std::get_if<SmoothedIndicator>(&base.f.kind())) {
        SmoothedIndicator s = *si;
        s.b = b;
        s.plateau_halfwidth = si->plateau_halfwidth / si->b * b;
        s.transition_width = si->transition_width / si->b * b;
        c.f = ScalarFunction(s);
    }
    return c;
}

int run_solve(const RunConfig& cfg)
{
    SolverReport rep = solve_fixed_point(cfg.solver);
    json j = envelope(cfg);
    j["report"] = to_json(rep);
    save_json(path_in(cfg, "solve_report.json"), j);
    residual_csv(rep).save(path_in(cfg, "solve_residuals.csv"));
    levels_csv(rep).save(path_in(cfg, "solve_levels.csv"));
    if (!rep.converged) {
        throw ConvergenceError("no convergence in " + std::to_string(cfg.solver.max_iter) + " iterations");
    }
    return 0;
}

int run_sweep_b(const RunConfig& cfg)
{
    const std::size_t n = cfg.sweep.steps;
    std::vector<double> bs(n), ids_v(n), res(n);
    std::vector<char> ok(n, 0);
    std::vector<std::size_t> iters(n);
    for (std::size_t i = 0; i < n; ++i) {
        bs[i] = cfg.sweep.at(i);
    }
    parallel_for(0, n, [&](std::size_t i) {
        SolverReport r = solve_fixed_point(at_field(cfg.solver, bs[i]));
        ids_v[i] = r.ids;
        ok[i] = r.converged ? 1 : 0;
        iters[i] = r.iterations;
        res[i] = r.residual_history.back();
    });
    CsvWriter w({"b", "ids", "slope", "converged"});
    for (std::size_t i = 0; i < n; ++i) {
        // central differences inside, one-sided at the two ends
        std::size_t lo = i == 0 ? 0 : i - 1;
        std::size_t hi = i + 1 == n ? i : i + 1;
        double slope = (ids_v[hi] - ids_v[lo]) / (bs[hi] - bs[lo]);
        w.row() << bs[i] << ids_v[i] << slope << (ok[i] != 0);
    }
    w.save(path_in(cfg, "sweep_b.csv"));
    json j = envelope(cfg);
    j["rows"] = json::array();
    bool all = true;
    for (std::size_t i = 0; i < n; ++i) {
        j["rows"].push_back({{"b", bs[i]}, {"ids", ids_v[i]}, {"iterations", iters[i]}, {"final_residual", res[i]},
                             {"converged", ok[i] != 0}});
        all = all && ok[i] != 0;
    }
    save_json(path_in(cfg, "sweep_b.json"), j);
    if (!all) {
        throw ConvergenceError("at least one b point did not converge; see sweep_b.csv");
    }
    return 0;
}

int run_sweep_lambda(const RunConfig& cfg)
{
    const std::size_t n = cfg.sweep.steps;
    CsvWriter w({"lambda", "contraction_estimate", "iterations", "final_residual", "ids"});
    json j = envelope(cfg);
    j["rows"] = json::array();
    bool all = true;
    for (std::size_t i = 0; i < n; ++i) {
        SolverConfig c = cfg.solver;
        c.lambda = cfg.sweep.at(i);
        double L = estimate_contraction(c, threshold_probe_count, cfg.seed);
        SolverReport r = solve_fixed_point(c);
        w.row() << c.lambda << L << r.iterations << r.residual_history.back() << r.ids;
        j["rows"].push_back({{"lambda", c.lambda}, {"contraction_estimate", L}, {"iterations", r.iterations},
                             {"final_residual", r.residual_history.back()}, {"ids", r.ids},
                             {"converged", r.converged}});
        all = all && r.converged;
    }
    w.save(path_in(cfg, "sweep_lambda.csv"));
    save_json(path_in(cfg, "sweep_lambda.json"), j);
    if (!all) {
        throw ConvergenceError("at least one lambda point did not converge; see sweep_lambda.json");
    }
    return 0;
}

int run_zero_temp(const RunConfig& cfg)
{
    const auto& si = std::get<SmoothedIndicator>(cfg.solver.f.kind());
    ZeroTempReport z = zero_temp_projection(cfg.solver);
    StredaReport s = streda_slope(cfg.solver, si.N, cfg.solver.lambda / cfg.solver.b);
    CsvWriter w({"n", "e_n", "a_n", "occupied", "region_ok"});
    for (const auto& L : z.levels) {
        w.row() << L.n << L.e << z.solver.fixed_point[L.n] << L.occupied << L.ok;
    }
    w.save(path_in(cfg, "zero_temp_levels.csv"));
    json j = envelope(cfg);
    j["report"] = {{"ids", z.solver.ids},
                   {"ids_expected", static_cast<double>(si.N) * cfg.solver.b / (2.0 * std::numbers::pi)},
                   {"ids_error", z.ids_error},
                   {"idempotency_defect", z.idempotency_defect},
                   {"lambda1", z.lambda1},
                   {"iterations", z.solver.iterations},
                   {"passed", z.passed},
                   {"streda", {{"b", s.b_values}, {"ids", s.ids_values}, {"slope", s.slope}, {"expected", s.expected}}}};
    save_json(path_in(cfg, "zero_temp.json"), j);
    return 0;
}

int run_verify(const RunConfig& cfg)
{
    std::vector<CheckResult> checks = run_verification_suite(cfg);
    json j = envelope(cfg);
    j["checks"] = json::array();
    bool all = true;
    for (const auto& c : checks) {
        j["checks"].push_back(to_json(c));
        all = all && c.passed;
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << fmt17(c.value) << "  " << c.detail
                  << '\n';
    }
    j["passed"] = all;
    save_json(path_in(cfg, "verify.json"), j);
    if (!all) {
        throw VerificationFailed{};
    }
    return 0;
}

int fail(int code, const std::string& kind, const std::string& message)
{
    json j{{"schema_version", schema_version}, {"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
    std::cerr << j.dump() << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Self-consistent Hartree-Fock kernels for a 2D electron gas in a constant magnetic field"};
    app.require_subcommand(1);
    Options opt;
    struct Sub
    {
        const char* name;
        RunMode mode;
        const char* help;
    };
    const Sub subs[] = {
        {"solve", RunMode::solve, "solve the fixed-point equation once"},
        {"sweep-b", RunMode::sweep_b, "ids over a range of b at fixed lambda/b"},
        {"sweep-lambda", RunMode::sweep_lambda, "contraction estimate and ids over a range of lambda"},
        {"zero-temp", RunMode::zero_temp, "projection diagnostics and Streda slope for an indicator f"},
        {"verify", RunMode::verify, "run the invariant suite"},
    };
    std::optional<RunMode> chosen;
    for (const auto& s : subs) {
        CLI::App* sc = app.add_subcommand(s.name, s.help);
        sc->add_option("--config", opt.config, "JSON run configuration")->check(CLI::ExistingFile);
        sc->add_option("--out", opt.out, "output directory (default: $LHF_OUT, then the config, then ./lhf_out)");
        sc->add_option("--seed", opt.seed, "seed for randomized probes");
        RunMode m = s.mode;
        sc->callback([&chosen, m] { chosen = m; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(1, "usage", e.what());
    }

    try {
        RunConfig cfg = resolve(*chosen, opt);
        switch (cfg.mode) {
            case RunMode::solve: return run_solve(cfg);
            case RunMode::sweep_b: return run_sweep_b(cfg);
            case RunMode::sweep_lambda: return run_sweep_lambda(cfg);
            case RunMode::zero_temp: return run_zero_temp(cfg);
            case RunMode::verify: return run_verify(cfg);
        }
    } catch (const InvalidArgument& e) {
        return fail(1, "invalid_argument", e.what());
    } catch (const BallExitError& e) {
        return fail(2, "ball_exit", e.what());
    } catch (const ConvergenceError& e) {
        return fail(2, "convergence", e.what());
    } catch (const VerificationError& e) {
        return fail(3, "verification", e.what());
    } catch (const VerificationFailed&) {
        return fail(3, "verification", "one or more checks failed; see verify.json");
    } catch (const nlohmann::json::exception& e) {
        return fail(1, "invalid_argument", e.what());
    } catch (const std::exception& e) {
        return fail(1, "internal", e.what());
    }
    return 0;
}
