#include <imbcal/casestudy.hpp>
#include <imbcal/csv.hpp>
#include <imbcal/datagen.hpp>
#include <imbcal/errors.hpp>
#include <imbcal/report.hpp>
#include <imbcal/svg.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace imbcal;

namespace {

struct Shared
{
    RunConfig run;
    std::string scenarios = "all";
    std::string nb_weight = "odds";
    bool no_figures = false;
    bool quiet = false;
};

struct SolveOptions
{
    int datasets = 20;
    int restarts = 20;
    Eigen::Index sample_size = 100000;
    Eigen::Index validate_n = 100000;
    double auroc = 0.75;
};

struct CaseOptions
{
    std::string input;
    std::string outcome;
    std::string predictors;
    std::string methods = "all";
    double train_fraction = 0.8;
    bool stratified = false;
    std::vector<double> thresholds;
    int smote_k = 5;
};

struct SynthOptions
{
    Eigen::Index n = 3369;
    double event_fraction = 0.2;
    std::string output = "synthetic_cohort.csv";
};

RunConfig finish_config(Shared& s)
{
    s.run.scenarios = parse_scenario_filter(s.scenarios);
    s.run.net_benefit_weight = parse_net_benefit_weight(s.nb_weight);
    s.run.figures = !s.no_figures;
    s.run.validate();
    return s.run;
}

std::uint64_t pair_tag(double v)
{
    return std::uint64_t(std::llround(v * 1e6));
}

int cmd_solve_dgm(Shared& shared, const SolveOptions& o)
{
    const auto config = finish_config(shared);
    const auto path = config.coefficient_cache.string();
    std::vector<DgmSpec> cache;
    if (fs::exists(config.coefficient_cache)) {
        cache = read_coefficient_cache(path);
    }
    DgmSolverOptions solver;
    solver.datasets = o.datasets;
    solver.restarts = o.restarts;
    solver.sample_size = o.sample_size;

    bool changed = false;
    for (double ef : {0.01, 0.1, 0.3}) {
        for (int p : {3, 6, 12, 24}) {
            auto spec = find_spec(cache, p, ef, o.auroc);
            if (!spec) {
                const auto start = std::chrono::steady_clock::now();
                const auto rng = derive_stream(config.master_seed, {10, std::uint64_t(p), pair_tag(ef), pair_tag(o.auroc)});
                spec = solve_dgm_coefficients(p, ef, o.auroc, rng, solver);
                cache.push_back(*spec);
                changed = true;
                if (!shared.quiet) {
                    const double secs =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    std::fprintf(stderr, "solved p=%d EF=%g in %.1fs\n", p, ef, secs);
                }
            }
            const auto v = validate_dgm(*spec, o.validate_n,
                                        derive_stream(config.master_seed, {11, std::uint64_t(p), pair_tag(ef)}));
            std::printf("p=%-2d EF=%-4g intercept=%-10.6f beta=%-9.6f validation AUROC=%.4f EF=%.4f\n", p, ef,
                        spec->intercept, spec->beta, v.auroc, v.event_rate);
        }
    }
    if (changed) {
        std::sort(cache.begin(), cache.end(), [](const DgmSpec& a, const DgmSpec& b) {
            return std::tie(a.target_auroc, a.event_fraction, a.p) < std::tie(b.target_auroc, b.event_fraction, b.p);
        });
        if (config.coefficient_cache.has_parent_path()) {
            fs::create_directories(config.coefficient_cache.parent_path());
        }
        write_coefficient_cache(path, cache);
        std::printf("wrote %s (%zu records)\n", path.c_str(), cache.size());
    } else {
        std::printf("%s is up to date\n", path.c_str());
    }
    return 0;
}

int cmd_simulate(Shared& shared)
{
    const auto config = finish_config(shared);
    const auto scenarios = configured_scenarios(config, read_coefficient_cache(config.coefficient_cache.string()));
    const auto start = std::chrono::steady_clock::now();
    ProgressFn progress;
    if (!shared.quiet) {
        progress = [&](int id, int done, int total) {
            if (done == total || done % 50 == 0) {
                const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                std::fprintf(stderr, "scenario %d: %d/%d runs (%.0fs elapsed)\n", id, done, total, secs);
            }
        };
    }
    const auto results = run_study(scenarios, config, {}, progress);
    write_study_outputs(config.output_dir, scenarios, results, config.figures);
    std::printf("wrote %zu runs to %s\n", results.size(), (config.output_dir / "runs.csv").c_str());
    return 0;
}

int cmd_plot(Shared& shared, const std::string& runs_csv)
{
    auto config = finish_config(shared);
    const fs::path input = runs_csv.empty() ? config.output_dir / "runs.csv" : fs::path(runs_csv);
    std::istringstream in(read_file(input));
    const auto results = read_run_csv(in);
    std::vector<Scenario> scenarios;
    for (const auto& s : study_scenarios(config.n_test, config.n_runs)) {
        const bool present = std::any_of(results.begin(), results.end(),
                                         [&](const RunResult& r) { return r.scenario_id == s.id; });
        const bool wanted = std::find(config.scenarios.begin(), config.scenarios.end(), s.id) != config.scenarios.end();
        if (present && wanted) {
            scenarios.push_back(s);
        }
    }
    write_study_reports(config.output_dir, scenarios, results, config.figures);
    std::printf("re-rendered %zu scenarios into %s\n", scenarios.size(), config.output_dir.c_str());
    return 0;
}

int cmd_casestudy(Shared& shared, const CaseOptions& o)
{
    const auto config = finish_config(shared);
    CaseStudySpec spec;
    spec.input_csv = o.input;
    spec.outcome = o.outcome;
    spec.predictors = parse_predictor_list(o.predictors);
    spec.methods = parse_method_list(o.methods);
    spec.train_fraction = o.train_fraction;
    spec.stratified_split = o.stratified;
    spec.thresholds = o.thresholds;
    spec.smote_k = o.smote_k;
    spec.seed = config.master_seed;
    spec.bootstrap_resamples = config.bootstrap_resamples;
    spec.loess_span = config.loess_span;
    spec.net_benefit_weight = config.net_benefit_weight;

    const auto data = case_study_dataset(read_csv_file(spec.input_csv), spec);
    const auto report = run_case_study(data, spec);

    std::ostringstream table;
    write_case_study_table(table, report);
    const auto& dir = config.output_dir;
    write_file(dir / "casestudy_table.csv", table.str());
    if (config.figures) {
        for (Algorithm a : {Algorithm::slr, Algorithm::ridge}) {
            const bool any = std::any_of(report.models.begin(), report.models.end(),
                                         [&](const CaseModelResult& m) { return m.key.algorithm == a; });
            if (!any) {
                continue;
            }
            const std::string tag = a == Algorithm::slr ? "slr" : "ridge";
            write_file(dir / ("calibration_" + tag + ".svg"), case_study_calibration_svg(report, a));
            write_file(dir / ("decision_curve_" + tag + ".svg"), case_study_decision_svg(report, a));
        }
    }
    std::printf("training rows %lld (%lld events, rate %.3f), test rows %lld\n", (long long)report.n_train,
                (long long)report.train_events, report.training_rate, (long long)report.n_test);
    std::cout << table.str();
    return 0;
}

int cmd_synth_cohort(Shared& shared, const SynthOptions& o)
{
    const auto config = finish_config(shared);
    const auto cohort = synthetic_cohort(o.n, o.event_fraction, derive_stream(config.master_seed, {20}));
    std::ostringstream out;
    write_cohort_csv(out, cohort);
    write_file(o.output, out.str());
    std::printf("wrote %lld rows (%lld events) to %s\n", (long long)cohort.data.rows(),
                (long long)cohort.data.event_count(), o.output.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulation of class imbalance corrections and their effect on risk model calibration"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "flat key=value configuration file; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);

    Shared shared;
    shared.run.workers = default_workers();
    std::string output_dir = shared.run.output_dir.string();
    std::string cache = shared.run.coefficient_cache.string();
    app.add_option("--seed", shared.run.master_seed, "master seed")->capture_default_str();
    app.add_option("--runs", shared.run.n_runs, "simulation runs per scenario")->capture_default_str();
    app.add_option("--test-n", shared.run.n_test, "test set size per scenario")->capture_default_str();
    app.add_option("--scenarios", shared.scenarios, "\"all\" or ids such as 1,4,9-12")
        ->capture_default_str()
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::Join);
    app.add_option("--out", output_dir, "output directory")->capture_default_str();
    app.add_option("--workers", shared.run.workers, "worker threads (default: IMBCAL_WORKERS or all cores)")
        ->capture_default_str();
    app.add_option("--cache", cache, "coefficient cache file")->capture_default_str();
    app.add_option("--loess-span", shared.run.loess_span, "span of the calibration-curve smoother")
        ->capture_default_str();
    app.add_option("--nb-weight", shared.nb_weight, "Net Benefit weight: odds or inverse_complement")
        ->capture_default_str();
    app.add_option("--bootstrap", shared.run.bootstrap_resamples, "bootstrap resamples for intervals")
        ->capture_default_str();
    app.add_flag("--no-figures", shared.no_figures, "skip SVG output");
    app.add_flag("--quiet", shared.quiet, "no progress messages");

    SolveOptions solve;
    auto* solve_cmd = app.add_subcommand("solve-dgm", "solve and validate data-generating coefficients");
    solve_cmd->add_option("--datasets", solve.datasets, "development datasets per pair")->capture_default_str();
    solve_cmd->add_option("--restarts", solve.restarts, "optimizer restarts per dataset")->capture_default_str();
    solve_cmd->add_option("--sample-size", solve.sample_size, "rows per development dataset")->capture_default_str();
    solve_cmd->add_option("--validate-n", solve.validate_n, "rows of the validation dataset")->capture_default_str();
    solve_cmd->add_option("--auroc", solve.auroc, "target AUROC")->capture_default_str();

    auto* sim_cmd = app.add_subcommand("simulate", "run the simulation study and write tables and figures");

    std::string runs_csv;
    auto* plot_cmd = app.add_subcommand("plot", "re-render tables and figures from a per-run CSV");
    plot_cmd->add_option("--input", runs_csv, "per-run CSV (default: <out>/runs.csv)");

    CaseOptions cs;
    auto* case_cmd = app.add_subcommand("casestudy", "develop and validate the 8 models on a CSV cohort");
    case_cmd->add_option("--input", cs.input, "cohort CSV")->required();
    case_cmd->add_option("--outcome", cs.outcome, "binary outcome column")->required();
    case_cmd->add_option("--predictors", cs.predictors, "columns, e.g. age,diameter:spline,count:ordinal")
        ->required()
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::Join);
    case_cmd->add_option("--methods", cs.methods, "\"all\" or pairs such as None:SLR,RUS:Ridge")
        ->capture_default_str()
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::Join);
    case_cmd->add_option("--train-fraction", cs.train_fraction, "share of rows used for training")
        ->capture_default_str();
    case_cmd->add_flag("--stratified", cs.stratified, "stratify the split by outcome");
    case_cmd->add_option("--thresholds", cs.thresholds, "risk thresholds (default: 0.5 and the training rate)");
    case_cmd->add_option("--smote-k", cs.smote_k, "SMOTE neighbours")->capture_default_str();

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth-cohort", "write a synthetic tumour cohort CSV");
    synth_cmd->add_option("--n", synth.n, "rows")->capture_default_str();
    synth_cmd->add_option("--event-fraction", synth.event_fraction, "expected event fraction")->capture_default_str();
    synth_cmd->add_option("--output", synth.output, "output CSV")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    shared.run.output_dir = output_dir;
    shared.run.coefficient_cache = cache;

    try {
        if (*solve_cmd) {
            return cmd_solve_dgm(shared, solve);
        }
        if (*sim_cmd) {
            return cmd_simulate(shared);
        }
        if (*plot_cmd) {
            return cmd_plot(shared, runs_csv);
        }
        if (*case_cmd) {
            return cmd_casestudy(shared, cs);
        }
        if (*synth_cmd) {
            return cmd_synth_cohort(shared, synth);
        }
    } catch (const ConfigurationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const IngestionError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 3;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
