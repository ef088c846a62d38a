#include "powergame/cli.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "powergame/gamespec.hpp"
#include "powergame/gridworld.hpp"
#include "powergame/report_io.hpp"

namespace pg {

namespace fs = std::filesystem;

std::vector<std::string> hyperparameter_names() {
    return {"alpha_m",       "alpha_e",       "alpha_r",     "alpha_x",          "alpha_end_factor", "gamma_h",
            "gamma_r",       "beta_r",        "beta_r_start", "eps_h_start",     "eps_h_end",        "eps_r_start",
            "eps_r_end",     "zeta",          "xi",          "eta",              "eps_x",            "eps_q",
            "horizon",       "p_g",           "bonus_robot_init", "bonus_robot_decay", "bonus_human_init",
            "bonus_human_decay", "episodes",  "phase1_episodes", "max_steps"};
}

bool parse_cli(int argc, const char* const* argv, RunConfig& cfg, std::ostream& out) {
    CLI::App app{"power-maximizing assistant solver"};
    app.require_subcommand(1, 1);
    app.set_config("--config", "", "TOML/INI file with hyperparameters (flags take precedence)");
    std::map<std::string, double> hv;
    std::vector<std::string> names = hyperparameter_names();
    std::vector<double> slots(names.size(), 0.0);
    std::vector<CLI::Option*> opts;
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::string dashed = names[i];
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        std::string flag = "--" + names[i];
        if (dashed != names[i]) flag += ",--" + dashed;
        opts.push_back(app.add_option(flag, slots[i], "hyperparameter " + names[i]));
    }
    std::string seeds_text;

    auto* solve = app.add_subcommand("solve", "exact solve of a gamespec file or named scenario");
    auto* learn = app.add_subcommand("learn", "two-phase TD learning over one or more seeds");
    auto* scen = app.add_subcommand("scenario", "oracle-vs-solver table for a named scenario");
    auto* report = app.add_subcommand("power-report", "per-state X, W (bits) and U_r as CSV");
    auto* bounds = app.add_subcommand("check-bounds", "finite-horizon truncation error against the analytic bound");
    auto* bif = app.add_subcommand("bifurcation-scan", "fixed-point roots of the two-action MDP over a beta grid");
    auto* exp = app.add_subcommand("export", "write a named scenario as gamespec text");

    for (auto* sc : {solve, learn, report, bounds}) {
        sc->add_option("spec", cfg.spec, "gamespec file");
        sc->add_option("--scenario", cfg.scenario, "named scenario instead of a file");
        sc->add_option("--out", cfg.out_dir, "output directory");
        sc->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    }
    solve->add_option("--cache", cfg.cache_dir, "binary solution cache directory");
    learn->add_option("--seeds", seeds_text, "comma-separated seeds")->required();
    bounds->add_option("--horizons", cfg.horizons, "horizons to check")->delimiter(',');

    scen->add_option("name", cfg.scenario, "scenario name")->required();
    scen->add_option("--out", cfg.out_dir, "output directory");
    scen->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    scen->allow_extras();
    exp->add_option("name", cfg.scenario, "scenario name")->required();
    exp->add_option("--out", cfg.out_dir, "output file");
    exp->allow_extras();

    bif->add_option("--beta-lo", cfg.beta_lo);
    bif->add_option("--beta-hi", cfg.beta_hi);
    bif->add_option("--steps", cfg.beta_steps)->check(CLI::Range(2, 1000000));
    bif->add_option("--out", cfg.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return false;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return false;
    } catch (const CLI::ParseError& e) {
        throw Error(ErrorKind::usage, e.what());
    }
    for (std::size_t i = 0; i < names.size(); ++i)
        if (opts[i]->count() > 0) cfg.hyper[names[i]] = slots[i];

    auto* chosen = app.get_subcommands().front();
    cfg.command = chosen->get_name();
    if (chosen == scen || chosen == exp) {
        auto extra = chosen->remaining();
        for (std::size_t i = 0; i < extra.size(); ++i) {
            std::string k = extra[i];
            if (k.rfind("--", 0) != 0) throw Error(ErrorKind::usage, "unexpected argument " + k);
            k = k.substr(2);
            std::string v;
            auto eq = k.find('=');
            if (eq != std::string::npos) {
                v = k.substr(eq + 1);
                k = k.substr(0, eq);
            } else {
                if (i + 1 >= extra.size()) throw Error(ErrorKind::usage, "missing value for --" + k);
                v = extra[++i];
            }
            cfg.scenario_args[k] = v;
        }
    }
    if (chosen == learn) {
        std::stringstream ss(seeds_text);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
                throw Error(ErrorKind::usage, "seeds must be nonnegative integers: " + seeds_text);
            try {
                cfg.seeds.push_back(std::stoull(tok));
            } catch (const std::exception&) {
                throw Error(ErrorKind::usage, "seed out of range: " + tok);
            }
        }
        if (cfg.seeds.empty()) throw Error(ErrorKind::usage, "learn needs at least one seed");
    }
    if ((chosen == solve || chosen == learn || chosen == report || chosen == bounds) && cfg.spec.empty() == cfg.scenario.empty())
        throw Error(ErrorKind::usage, "give exactly one of a gamespec file or --scenario");
    return true;
}

namespace {

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::usage:
        case ErrorKind::argument: return kExitUsage;
        case ErrorKind::parse:
        case ErrorKind::validation: return kExitParse;
        case ErrorKind::convergence: return kExitConvergence;
        case ErrorKind::mismatch: return kExitMismatch;
    }
    return kExitUsage;
}

// game + params + solver options from a file or a named scenario, with hyperparameter overrides
struct Problem {
    Scenario sc;
    bool gridworld = false;
};

void apply_hyper(const RunConfig& cfg, Problem& p) {
    auto get = [&](const char* k) -> const double* {
        auto it = cfg.hyper.find(k);
        return it == cfg.hyper.end() ? nullptr : &it->second;
    };
    PowerParams& pp = p.sc.params;
    if (auto v = get("zeta")) pp.zeta = *v;
    if (auto v = get("xi")) pp.xi = *v;
    if (auto v = get("eta")) pp.eta = *v;
    if (auto v = get("beta_r")) pp.beta_r = *v;
    if (auto v = get("eps_x")) pp.eps_x = *v;
    if (auto v = get("eps_q")) pp.eps_q = *v;
    if (auto v = get("horizon")) {
        if (*v < 0 || *v != std::floor(*v) || *v > 1e9) throw Error(ErrorKind::usage, "horizon must be a nonnegative integer");
        pp.horizon = static_cast<int>(*v);
    }
    if (auto v = get("gamma_r")) p.sc.game.gamma_r = *v;
    if (auto v = get("gamma_h"))
        for (auto& g : p.sc.game.gamma_h) g = *v;
    check_params(pp);
    auto rep = validate_game(p.sc.game);
    if (!rep.ok()) throw Error(ErrorKind::validation, rep.summary());
}

Problem load_problem(const RunConfig& cfg) {
    Problem p;
    if (!cfg.scenario.empty()) {
        p.sc = build_named_scenario(cfg.scenario, {});
        p.gridworld = cfg.scenario == "gridworld";
    } else {
        auto doc = parse_gamespec_or_throw(read_text(cfg.spec));
        p.sc.name = doc.game.name;
        p.sc.game = std::move(doc.game);
        p.sc.params = doc.power;
    }
    apply_hyper(cfg, p);
    return p;
}

HumanPrior solve_prior(const Problem& p) {
    return is_acyclic(p.sc.game) ? solve_prior_backward(p.sc.game, p.sc.prior_opt) : solve_prior_fixed_point(p.sc.game, p.sc.prior_opt);
}

RobotSolution solve_robot_any(const Problem& p, const HumanPrior& prior) {
    if (p.sc.params.horizon) return finite_horizon_solve(p.sc.game, prior, p.sc.params, p.sc.robot_opt).solution;
    return solve_robot(p.sc.game, prior, p.sc.params, p.sc.robot_opt);
}

void emit(const RunConfig& cfg, const fs::path& file, const std::string& text, std::ostream& out, bool to_stdout) {
    if (!cfg.out_dir.empty()) write_text(fs::path(cfg.out_dir) / file, text);
    if (to_stdout) out << text;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    Problem p = load_problem(cfg);
    HumanPrior prior = solve_prior(p);
    std::optional<RobotSolution> sol;
    fs::path cache_file;
    if (!cfg.cache_dir.empty()) {
        std::uint64_t h = content_hash(p.sc.game, p.sc.params, "solve:" + cfg.scenario);
        cache_file = fs::path(cfg.cache_dir) / (hex64(h) + ".bin");
        sol = read_solution_cache(cache_file, h);
        if (!sol) {
            sol = solve_robot_any(p, prior);
            write_solution_cache(cache_file, h, *sol);
        }
    } else {
        sol = solve_robot_any(p, prior);
    }
    std::string sj = solution_json(p.sc.game, *sol).dump(2) + "\n";
    std::string csv = power_report_csv(power_report(p.sc.game, *sol));
    if (!cfg.out_dir.empty()) write_text(fs::path(cfg.out_dir) / "prior.json", prior_json(p.sc.game, prior).dump(2) + "\n");
    emit(cfg, "solution.json", sj, out, cfg.format == "json");
    emit(cfg, "power_report.csv", csv, out, cfg.format == "csv");
    return kExitOk;
}

int cmd_power_report(const RunConfig& cfg, std::ostream& out) {
    Problem p = load_problem(cfg);
    HumanPrior prior = solve_prior(p);
    RobotSolution sol = solve_robot_any(p, prior);
    auto rep = power_report(p.sc.game, sol);
    if (cfg.format == "json") {
        json j = json::array();
        const std::size_t H = rep.human_names.size();
        for (std::size_t s = 0; s < rep.state_names.size(); ++s)
            for (std::size_t h = 0; h < H; ++h)
                j.push_back({{"state", rep.state_names[s]},
                             {"human", rep.human_names[h]},
                             {"x", number_json(rep.x[s * H + h])},
                             {"w_bits", number_json(rep.w[s * H + h])},
                             {"u_r", number_json(rep.u_r[s])}});
        emit(cfg, "power_report.json", j.dump(2) + "\n", out, true);
    } else {
        emit(cfg, "power_report.csv", power_report_csv(rep), out, true);
    }
    return kExitOk;
}

int cmd_check_bounds(const RunConfig& cfg, std::ostream& out) {
    Problem p = load_problem(cfg);
    p.sc.params.horizon.reset();
    HumanPrior prior = solve_prior(p);
    RobotSolution full = solve_robot(p.sc.game, prior, p.sc.params, p.sc.robot_opt);
    json rows = json::array();
    std::ostringstream csv;
    csv << "horizon,max_error,bound,within\n";
    bool all_ok = true;
    for (int hz : cfg.horizons) {
        if (hz < 0) throw Error(ErrorKind::usage, "horizons must be nonnegative");
        PowerParams pp = p.sc.params;
        pp.horizon = hz;
        auto fh = finite_horizon_solve(p.sc.game, prior, pp, p.sc.robot_opt);
        double err = 0;
        for (int s = 0; s < p.sc.game.num_states(); ++s) err = std::max(err, std::abs(fh.solution.v_r[s] - full.v_r[s]));
        bool ok = err <= fh.bound.bound;
        all_ok = all_ok && ok;
        json r = horizon_bound_json(fh.bound);
        r["max_error"] = number_json(err);
        r["within"] = ok;
        rows.push_back(std::move(r));
        csv << hz << "," << format_double(err) << "," << format_double(fh.bound.bound) << "," << (ok ? "true" : "false") << "\n";
    }
    if (cfg.format == "json") emit(cfg, "bounds.json", json{{"game", p.sc.game.name}, {"rows", rows}}.dump(2) + "\n", out, true);
    else emit(cfg, "bounds.csv", csv.str(), out, true);
    return all_ok ? kExitOk : kExitMismatch;
}

int cmd_bifurcation(const RunConfig& cfg, std::ostream& out) {
    if (!(cfg.beta_hi > cfg.beta_lo) || cfg.beta_lo < 0) throw Error(ErrorKind::usage, "need 0 <= beta-lo < beta-hi");
    double gamma = 0.99;
    if (auto it = cfg.hyper.find("gamma_h"); it != cfg.hyper.end()) gamma = it->second;
    if (!(gamma > 0 && gamma < 1)) throw Error(ErrorKind::usage, "gamma_h must lie in (0,1)");
    std::ostringstream os;
    os << "beta,n_roots,root_1,root_2,root_3\n";
    for (int i = 0; i < cfg.beta_steps; ++i) {
        double b = cfg.beta_lo + (cfg.beta_hi - cfg.beta_lo) * i / (cfg.beta_steps - 1);
        auto roots = bifurcation_roots(b, gamma);
        os << format_double(b) << "," << roots.size();
        for (std::size_t k = 0; k < 3; ++k) os << "," << (k < roots.size() ? format_double(roots[k]) : "");
        os << "\n";
    }
    emit(cfg, "bifurcation.csv", os.str(), out, true);
    if (!cfg.out_dir.empty()) {
        json f = json::array();
        for (double b : bifurcation_folds(gamma, cfg.beta_lo, cfg.beta_hi)) f.push_back(b);
        write_text(fs::path(cfg.out_dir) / "folds.json", json{{"gamma_h", gamma}, {"folds", f}}.dump(2) + "\n");
    }
    return kExitOk;
}

std::string report_table(const ScenarioReport& rep) {
    std::ostringstream os;
    os << "scenario " << rep.name << "\n";
    os << std::left << std::setw(44) << "quantity" << std::setw(22) << "oracle" << std::setw(22) << "solver" << std::setw(10)
       << "tol"
       << "status\n";
    for (auto& c : rep.checks)
        os << std::left << std::setw(44) << c.quantity << std::setw(22) << format_double(c.oracle) << std::setw(22)
           << format_double(c.solver) << std::setw(10) << format_double(c.tol) << (c.match ? "MATCH" : "MISMATCH") << "\n";
    return os.str();
}

int cmd_scenario(const RunConfig& cfg, std::ostream& out) {
    auto rep = check_named_scenario(cfg.scenario, cfg.scenario_args);
    std::string table = report_table(rep);
    std::string j = scenario_report_json(rep).dump(2) + "\n";
    std::string c = scenario_report_csv(rep);
    if (!cfg.out_dir.empty()) {
        write_text(fs::path(cfg.out_dir) / "report.json", j);
        write_text(fs::path(cfg.out_dir) / "report.csv", c);
    }
    out << table;
    return rep.all_match() ? kExitOk : kExitMismatch;
}

int cmd_export(const RunConfig& cfg, std::ostream& out) {
    auto sc = build_named_scenario(cfg.scenario, cfg.scenario_args);
    std::string text = serialize_game(sc.game, sc.params);
    if (cfg.out_dir.empty()) out << text;
    else write_text(cfg.out_dir, text);
    return kExitOk;
}

void apply_schedules(const RunConfig& cfg, Phase1Schedule& s1, LearnSchedule& s2) {
    auto get = [&](const char* k) -> const double* {
        auto it = cfg.hyper.find(k);
        return it == cfg.hyper.end() ? nullptr : &it->second;
    };
    if (auto v = get("alpha_m")) s1.alpha_m = *v;
    if (auto v = get("alpha_e")) s2.alpha_e = *v;
    if (auto v = get("alpha_r")) s2.alpha_r = *v;
    if (auto v = get("alpha_x")) s2.alpha_x = *v;
    if (auto v = get("alpha_end_factor")) s1.alpha_end_factor = s2.alpha_end_factor = *v;
    if (auto v = get("beta_r_start")) s2.beta_r_start = *v;
    if (auto v = get("eps_h_start")) s1.eps_h_start = s2.eps_h_start = *v;
    if (auto v = get("eps_h_end")) s1.eps_h_end = s2.eps_h_end = *v;
    if (auto v = get("eps_r_start")) s1.eps_r_start = *v;
    if (auto v = get("eps_r_end")) s1.eps_r_end = *v;
    if (auto v = get("p_g")) s2.p_g = *v;
    if (auto v = get("bonus_robot_init")) s2.bonus_robot_init = *v;
    if (auto v = get("bonus_robot_decay")) s2.bonus_robot_decay = *v;
    if (auto v = get("bonus_human_init")) s1.bonus_init = *v;
    if (auto v = get("bonus_human_decay")) s1.bonus_decay = *v;
    auto count = [](double v, const char* what) {
        if (!(v >= 1 && v <= 1e9 && v == std::floor(v))) throw Error(ErrorKind::usage, std::string(what) + " must be a positive integer");
        return static_cast<long>(v);
    };
    if (auto v = get("episodes")) s2.episodes = count(*v, "episodes");
    if (auto v = get("phase1_episodes")) s1.episodes = count(*v, "phase1_episodes");
    if (auto v = get("max_steps")) s1.max_steps = s2.max_steps = static_cast<int>(count(*v, "max_steps"));
    if (!(s1.alpha_m > 0 && s1.alpha_m <= 1)) throw Error(ErrorKind::usage, "alpha_m must lie in (0, 1]");
    if (!(s2.alpha_end_factor > 0 && s2.alpha_end_factor <= 1)) throw Error(ErrorKind::usage, "alpha_end_factor must lie in (0, 1]");
}

int cmd_learn(const RunConfig& cfg, std::ostream& out) {
    Problem p = load_problem(cfg);
    GridworldConfig grid = default_gridworld_config();
    Phase1Schedule s1 = p.gridworld ? gridworld_phase1_schedule() : Phase1Schedule{};
    LearnSchedule s2 = p.gridworld ? gridworld_learn_schedule() : reference_schedule("default");
    apply_schedules(cfg, s1, s2);
    if (p.gridworld) {
        if (auto it = cfg.hyper.find("gamma_h"); it != cfg.hyper.end()) grid.gamma_h = it->second;
        if (auto it = cfg.hyper.find("gamma_r"); it != cfg.hyper.end()) grid.gamma_r = it->second;
        if (auto it = cfg.hyper.find("p_g"); it != cfg.hyper.end()) grid.p_g = it->second;
    }
    const long n = static_cast<long>(cfg.seeds.size());
    std::vector<json> summaries(n);
    std::exception_ptr failure;
    std::mutex mu;
    // seeds are independent learners with their own output directories
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            const std::uint64_t seed = cfg.seeds[i];
            LearnSchedule sched = s2;
            sched.seed = seed;
            json summary{{"seed", seed}};
            std::string trace, metrics, phase1csv, solj, events;
            if (p.gridworld) {
                GridRun run = gridworld_learn_run(grid, p.sc, seed, s1, sched);
                trace = trace_ndjson(p.sc.game, run.learned.traces) + gridworld_rollout_ndjson(p.sc.game, run);
                metrics = learn_metrics_csv(run.learned);
                phase1csv = phase1_metrics_csv(run.phase1, p.sc.game);
                solj = solution_json(p.sc.game, run.learned.solution).dump(2) + "\n";
                summary["key_step"] = run.events.key_step;
                summary["unlock_step"] = run.events.unlock_step;
                summary["aside_step"] = run.events.aside_step;
                summary["sequence"] = run.events.in_order();
            } else {
                std::vector<Phase1Result> raw;
                HumanPrior prior = phase1_learn_all(p.sc.game, s1, seed, ExecPolicy::serial, &raw);
                auto res = phase2_learn(p.sc.game, prior, p.sc.params, sched, p.sc.robot_opt.terminal);
                trace = trace_ndjson(p.sc.game, res.traces);
                metrics = learn_metrics_csv(res);
                phase1csv = phase1_metrics_csv(raw, p.sc.game);
                solj = solution_json(p.sc.game, res.solution).dump(2) + "\n";
                summary["max_v_e"] = number_json(res.max_ve);
                summary["v_e_excursion"] = res.ve_excursion;
            }
            if (!cfg.out_dir.empty()) {
                fs::path dir = fs::path(cfg.out_dir) / ("seed-" + std::to_string(seed));
                write_text(dir / "trace.ndjson", trace);
                write_text(dir / "metrics.csv", metrics);
                write_text(dir / "phase1.csv", phase1csv);
                write_text(dir / "solution.json", solj);
                write_text(dir / "summary.json", summary.dump(2) + "\n");
            }
            summaries[i] = std::move(summary);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    json all = json::array();
    for (auto& s : summaries) all.push_back(std::move(s));
    out << all.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int run_cli(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.command == "solve") return cmd_solve(cfg, out);
        if (cfg.command == "learn") return cmd_learn(cfg, out);
        if (cfg.command == "scenario") return cmd_scenario(cfg, out);
        if (cfg.command == "power-report") return cmd_power_report(cfg, out);
        if (cfg.command == "check-bounds") return cmd_check_bounds(cfg, out);
        if (cfg.command == "bifurcation-scan") return cmd_bifurcation(cfg, out);
        if (cfg.command == "export") return cmd_export(cfg, out);
        throw Error(ErrorKind::usage, "unknown command " + cfg.command);
    } catch (const ConvergenceError& e) {
        err << json{{"error", "convergence"}, {"message", e.what()}, {"beta", number_json(e.beta())},
                    {"residual", number_json(e.residual())}}
                   .dump()
            << "\n";
        return kExitConvergence;
    } catch (const Error& e) {
        err << json{{"error", error_kind_name(e.kind())}, {"message", e.what()}}.dump() << "\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return kExitUsage;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        if (!parse_cli(argc, argv, cfg, out)) return kExitOk;
    } catch (const Error& e) {
        err << json{{"error", error_kind_name(e.kind())}, {"message", e.what()}}.dump() << "\n";
        return exit_code(e.kind());
    }
    return run_cli(cfg, out, err);
}

}  // namespace pg
