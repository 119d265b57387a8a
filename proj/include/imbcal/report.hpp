#pragma once

#include <imbcal/sim.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace imbcal {

// ----------------------------------------------------------- per-run CSV

inline constexpr const char* run_csv_header =
    "scenario_id,run_id,dataset,algorithm,recalibrated,auroc,calib_intercept,calib_slope,"
    "acc_t50,sens_t50,spec_t50,acc_tef,sens_tef,spec_tef,exclusion_reason";

// One row per (run, model key): metrics for included models, the reason for
// excluded ones, empty cells where a value does not apply. Results are written
// in (scenario, run) order and rows within a run in model-key order.
void write_run_csv(std::ostream& out, std::vector<RunResult> results);

// Inverse of write_run_csv. A calibration intercept whose magnitude reaches
// `intercept_cap` is read back as capped.
std::vector<RunResult> read_run_csv(std::istream& in, double intercept_cap = 100.0);

// --------------------------------------------------------------- tables

// Long format: scenario_id,dataset,algorithm,recalibrated,metric,included,median,q25,q75
void write_summary_csv(std::ostream& out, const ScenarioSummary& summary);

// scenario_id,dataset,algorithm,recalibrated,runs,separation,one_class,non_convergence,capped
void write_exclusion_csv(std::ostream& out, const ScenarioSummary& summary);

struct TableColumn
{
    std::string label;
    ModelKey key;
    Metric metric;
};

// Columns for one metric: SLR then Ridge, each over the four datasets.
std::vector<TableColumn> model_columns(Metric metric, bool recalibrated = false);

// Columns for a threshold metric family (accuracy, sensitivity or
// specificity): per algorithm the unadjusted model at 0.5 and at the event
// fraction, then the three corrected models at 0.5.
std::vector<TableColumn> threshold_columns(Metric at_half);

// "median (q25;q75)" with two decimals; values at or beyond -100 print as
// "<-100"; a cell without included runs prints as "NA".
std::string format_summary(const std::optional<MedianIqr>& s);

// scenario,EF,N,p followed by one column per TableColumn.
void write_wide_table(std::ostream& out, const ScenarioSummary& summary, const std::vector<Scenario>& scenarios,
                      const std::vector<TableColumn>& columns);

// Separation counts per dataset: scenario,EF,N,p,Unadjusted,RUS,ROS,SMOTE with
// "count (pct%)" cells.
void write_separation_table(std::ostream& out, const ScenarioSummary& summary,
                            const std::vector<Scenario>& scenarios);

// ----------------------------------------------------------- run config

struct RunConfig
{
    std::uint64_t master_seed = 20240101;
    std::vector<int> scenarios; // empty means all
    int n_runs = 200;
    Eigen::Index n_test = 20000;
    int workers = 1;
    std::filesystem::path output_dir = "results";
    std::filesystem::path coefficient_cache = "data/dgm_coefficients.csv";
    double loess_span = 0.75;
    NetBenefitWeight net_benefit_weight = NetBenefitWeight::odds;
    int bootstrap_resamples = 2000;
    bool figures = true;

    void validate() const;
};

// "all" or a comma separated list of ids and ranges ("1,4,9-12"). Empty
// input or ids outside 1..24 raise ConfigurationError.
std::vector<int> parse_scenario_filter(const std::string& text);

// IMBCAL_WORKERS if set to a positive integer, otherwise the hardware
// concurrency (at least 1).
int default_workers();

NetBenefitWeight parse_net_benefit_weight(const std::string& name);

// The study scenarios selected by the config, with coefficients attached.
std::vector<Scenario> configured_scenarios(const RunConfig& config, const std::vector<DgmSpec>& cache);

std::vector<RunResult> run_study(const std::vector<Scenario>& scenarios, const RunConfig& config,
                                 const SimulationOptions& options = {}, const ProgressFn& progress = {});

// Writes runs.csv, summary.csv, exclusions.csv, the wide tables and, when
// `figures` is set, the box plots below output_dir/figures.
void write_study_outputs(const std::filesystem::path& dir, const std::vector<Scenario>& scenarios,
                         const std::vector<RunResult>& results, bool figures);

// The figures and tables derived from the runs (everything except runs.csv).
void write_study_reports(const std::filesystem::path& dir, const std::vector<Scenario>& scenarios,
                         const std::vector<RunResult>& results, bool figures);

// Box plot of one metric for the scenarios of one event fraction and one
// algorithm; groups are scenarios and series the four datasets.
std::string study_boxplot(const std::vector<Scenario>& scenarios, const std::vector<RunResult>& results,
                          Metric metric, double event_fraction, Algorithm algorithm, bool recalibrated = false);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

} // namespace imbcal
