#include "hisp/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "hisp/config.hpp"
#include "hisp/scenario.hpp"
#include "hisp/verify.hpp"

namespace hisp {

namespace {

constexpr std::size_t kBurnInScans = 10;

struct RunFlags {
    int case_id = 1;
    std::string scenario;
    int runs = 50;
    std::uint64_t seed = 7;
    std::string filter = "both";
    std::string out;
    double ospa_c = 100.0, ospa_p = 1.0;
    double tau = 1e-5, dm = 4.0, tau_c = 0.99, tau_uc = 0.9, gate = 25.0;
    std::string merge_scope = "tail";
};

struct RunOptionHandles {
    CLI::Option *case_id, *runs, *seed, *filter, *out, *ospa_c, *ospa_p, *tau, *dm, *merge_scope, *tau_c, *tau_uc, *gate;
};

RunOptionHandles add_run_flags(CLI::App& cmd, RunFlags& f) {
    RunOptionHandles h{};
    h.case_id = cmd.add_option("--case", f.case_id, "scenario case: 1, 2 or 3");
    cmd.add_option("--scenario", f.scenario, "JSON scenario file; flags override its values");
    h.runs = cmd.add_option("--runs", f.runs, "Monte Carlo runs");
    h.seed = cmd.add_option("--seed", f.seed, "base RNG seed");
    h.filter = cmd.add_option("--filter", f.filter, "hisp, phd or both");
    h.out = cmd.add_option("--out", f.out, "output directory (default $HISP_OUT_DIR or ./results)");
    h.ospa_c = cmd.add_option("--ospa-c", f.ospa_c, "OSPA cutoff [m]");
    h.ospa_p = cmd.add_option("--ospa-p", f.ospa_p, "OSPA order");
    h.tau = cmd.add_option("--tau", f.tau, "pruning threshold");
    h.dm = cmd.add_option("--dm", f.dm, "merging threshold (squared Mahalanobis)");
    h.merge_scope = cmd.add_option("--merge-scope", f.merge_scope,
                                   "merge hypotheses with the same latest observation only (tail) or any (any)");
    h.tau_c = cmd.add_option("--tau-c", f.tau_c, "confirmation threshold");
    h.tau_uc = cmd.add_option("--tau-uc", f.tau_uc, "keep-confirmed threshold");
    h.gate = cmd.add_option("--gate", f.gate, "gating threshold (squared Mahalanobis)");
    return h;
}

// File values first, then any flag given on the command line.
std::pair<Scenario, RunConfig> resolve(const RunFlags& f, const RunOptionHandles& h) {
    RunConfig cfg;
    Scenario scenario;
    if (!f.scenario.empty()) {
        cfg.scenario_path = f.scenario;
        scenario = load_scenario(f.scenario, &cfg);
        if (h.case_id->count()) throw std::invalid_argument("give either --case or case inside --scenario, not both");
    } else {
        cfg.case_id = f.case_id;
        if (f.case_id < 1 || f.case_id > 3) throw std::invalid_argument("case must be 1, 2 or 3");
        scenario = Scenario::for_case(f.case_id);
    }
    if (h.runs->count()) cfg.runs = f.runs;
    if (h.seed->count()) cfg.seed = f.seed;
    if (h.filter->count()) cfg.filter = parse_filter_selection(f.filter);
    if (h.out->count()) cfg.out_dir = f.out;
    if (h.ospa_c->count()) cfg.ospa.cutoff = f.ospa_c;
    if (h.ospa_p->count()) cfg.ospa.order = f.ospa_p;
    if (h.tau->count()) cfg.filter_config.prune_threshold = f.tau;
    if (h.dm->count()) cfg.filter_config.merge_threshold = f.dm;
    if (h.merge_scope->count()) cfg.filter_config.merge_scope = parse_merge_scope(f.merge_scope);
    if (h.tau_c->count()) cfg.filter_config.confirmation.confirm = f.tau_c;
    if (h.tau_uc->count()) cfg.filter_config.confirmation.keep = f.tau_uc;
    if (h.gate->count()) cfg.filter_config.gate = f.gate;
    if (cfg.out_dir.empty()) cfg.out_dir = default_output_dir();
    cfg.validate();
    return {scenario, cfg};
}

RunOptions run_options(const RunConfig& cfg) {
    RunOptions o;
    o.runs = cfg.runs;
    o.seed = cfg.seed;
    o.run_hisp = cfg.filter != FilterSelection::phd;
    o.run_phd = cfg.filter != FilterSelection::hisp;
    o.ospa = cfg.ospa;
    o.filter = cfg.filter_config;
    o.phd.prune_threshold = cfg.filter_config.prune_threshold;
    o.phd.merge_threshold = cfg.filter_config.merge_threshold;
    o.phd.gate = cfg.filter_config.gate;
    return o;
}

std::ofstream open_output(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << std::setprecision(10);
    return out;
}

int cmd_run(const Scenario& scenario, const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        std::cerr << "error: cannot create output directory '" << dir.string() << "'\n";
        return 1;
    }
    const RunOptions options = run_options(cfg);
    const CaseResult result = run_case(scenario, options);
    const int case_id = scenario.case_id;
    const std::string tag = "case" + std::to_string(case_id);

    auto series = open_output(dir / ("ospa_" + tag + ".csv"));
    series << "case,filter,run,t,ospa,ospa_loc,ospa_card\n";
    auto write_runs = [&](const char* name, std::vector<OspaResult> RunResult::*member) {
        for (const auto& r : result.runs)
            for (std::size_t k = 0; k < (r.*member).size(); ++k) {
                const auto& o = (r.*member)[k];
                series << case_id << ',' << name << ',' << r.run << ',' << result.times[k] << ',' << o.total << ','
                       << o.localisation << ',' << o.cardinality << '\n';
            }
    };
    if (options.run_hisp) write_runs("hisp", &RunResult::hisp);
    if (options.run_phd) write_runs("phd", &RunResult::phd);

    auto mean = open_output(dir / ("ospa_mean_" + tag + ".csv"));
    mean << "case,filter,t,mean_ospa\n";
    auto summary = open_output(dir / ("summary_" + tag + ".csv"));
    summary << "case,filter,runs,burn_in_scans,time_avg_ospa\n";
    auto write_mean = [&](const char* name, const std::vector<double>& m) {
        for (std::size_t k = 0; k < m.size(); ++k)
            mean << case_id << ',' << name << ',' << result.times[k] << ',' << m[k] << '\n';
        summary << case_id << ',' << name << ',' << cfg.runs << ',' << kBurnInScans << ','
                << time_average(m, kBurnInScans) << '\n';
        std::cout << name << " time-averaged OSPA: " << time_average(m, kBurnInScans) << '\n';
    };
    if (options.run_hisp) write_mean("hisp", result.hisp_mean);
    if (options.run_phd) write_mean("phd", result.phd_mean);
    std::cout << "wrote " << (dir / ("ospa_" + tag + ".csv")).string() << '\n';
    return 0;
}

int cmd_verify(const VerifyOptions& options) {
    const auto results = run_verification(options);
    bool all = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  [" << r.detail << "]\n";
        all = all && r.passed;
    }
    std::cout << (all ? "all suites passed\n" : "verification failed\n");
    return all ? 0 : 1;
}

int cmd_dump(const Scenario& scenario, const RunConfig& cfg, int step, const std::string& path) {
    if (step < 1 || step > scenario.num_scans())
        throw std::invalid_argument("--step must be in [1, " + std::to_string(scenario.num_scans()) + "]");
    std::mt19937_64 rng = run_rng(cfg.seed, 0);
    const Trajectories truth = generate_truth(scenario, rng);
    HispFilter filter(scenario.motion, scenario.sensor, cfg.filter_config);
    for (int k = 1; k < step; ++k) filter.process(simulate_scan(truth.states[k], scenario.sensor, k, truth.times[k], rng));
    const Scan scan = simulate_scan(truth.states[step], scenario.sensor, step, truth.times[step], rng);
    const FilterState predicted = time_update(filter.state(), scenario.motion);
    const AssociationTable table =
        build_table(predicted.hypotheses, scan, scenario.sensor, TableOptions{cfg.filter_config.gate});
    std::vector<std::uint64_t> ids;
    for (const auto& h : predicted.hypotheses) ids.push_back(h.id);
    if (path.empty() || path == "-") {
        write_table_dump(std::cout, table, ids, scan);
    } else {
        auto out = open_output(path);
        write_table_dump(out, table, ids, scan);
    }
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"HISP multi-object filter: Monte Carlo runs, verification suites, diagnostics"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "run a scenario case with both filters and write OSPA CSVs");
    const auto run_handles = add_run_flags(*run, run_flags);

    VerifyOptions verify_options;
    auto* verify = app.add_subcommand("verify", "run the oracle verification suites");
    verify->add_option("--seed", verify_options.seed, "seed of the random instances");
    verify->add_option("--instances", verify_options.instances, "random instances per suite");
    verify->add_flag("--perturb", verify_options.perturb, "inject a perturbed weight (the suite must fail)");

    RunFlags dump_flags;
    int dump_step = 1;
    std::string dump_path;
    auto* dump = app.add_subcommand("dump", "write the association table of one scan");
    const auto dump_handles = add_run_flags(*dump, dump_flags);
    dump->add_option("--step", dump_step, "scan index (1-based)");
    dump->add_option("--file", dump_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            const auto [scenario, cfg] = resolve(run_flags, run_handles);
            return cmd_run(scenario, cfg);
        }
        if (verify->parsed()) return cmd_verify(verify_options);
        if (dump->parsed()) {
            const auto [scenario, cfg] = resolve(dump_flags, dump_handles);
            return cmd_dump(scenario, cfg, dump_step, dump_path);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace hisp
