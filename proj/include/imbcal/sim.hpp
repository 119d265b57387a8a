#pragma once

#include <imbcal/datagen.hpp>
#include <imbcal/glm.hpp>
#include <imbcal/resample.hpp>
#include <imbcal/stats.hpp>

#include <compare>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace imbcal {

enum class Algorithm
{
    slr,
    ridge
};

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

enum class ExclusionReason
{
    none,
    separation,
    one_class,
    non_convergence
};

std::string_view to_string(ExclusionReason r);
ExclusionReason parse_exclusion_reason(std::string_view name);

struct ModelKey
{
    ResampleKind dataset = ResampleKind::none;
    Algorithm algorithm = Algorithm::slr;
    bool recalibrated = false;

    auto operator<=>(const ModelKey&) const = default;
};

// The 14 models of one run: 4 datasets x 2 algorithms plus the intercept-
// recalibrated versions of the 6 models trained on balanced data.
const std::vector<ModelKey>& model_keys();

struct Scenario
{
    int id = 0;
    double event_fraction = 0.0;
    Eigen::Index n_train = 0;
    int p = 0;
    std::optional<DgmSpec> dgm;
    Eigen::Index n_test = 100000;
    int n_runs = 2000;
};

// The 24 scenarios: event fraction outermost, then training size, then p.
std::vector<Scenario> study_scenarios(Eigen::Index n_test = 20000, int n_runs = 200);

// Fills scenario.dgm from solved coefficients; throws ConfigurationError
// naming the first (p, EF) pair without a record.
void attach_coefficients(std::vector<Scenario>& scenarios, const std::vector<DgmSpec>& cache,
                         double target_auroc = 0.75);

struct ThresholdMetrics
{
    double accuracy = 0.0;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
};

struct MetricRecord
{
    ModelKey key;
    double auroc = 0.0;
    double calib_intercept = 0.0;
    std::optional<double> calib_slope;
    ThresholdMetrics at_half;
    std::optional<ThresholdMetrics> at_event_fraction; // unadjusted models only
    bool intercept_capped = false;
};

struct Exclusion
{
    ModelKey key;
    ExclusionReason reason = ExclusionReason::none;
};

struct RunResult
{
    int scenario_id = 0;
    int run_id = 0;
    std::vector<MetricRecord> records;
    std::vector<Exclusion> exclusions;
};

struct SimulationOptions
{
    RidgeConfig ridge{};
    int smote_k = 5;
    double intercept_cap = 100.0;
};

// Stage tags of the per-run stream path (scenario_id, run_id, stage).
namespace stage {
inline constexpr std::uint64_t train = 0;
inline constexpr std::uint64_t rus = 1;
inline constexpr std::uint64_t ros = 2;
inline constexpr std::uint64_t smote = 3;
inline constexpr std::uint64_t cv_ridge = 4; // + dataset index 0..3
} // namespace stage

Dataset make_test_set(const Scenario& scenario, std::uint64_t master_seed);

RunResult run_single(const Scenario& scenario, int run_id, std::uint64_t master_seed, const Dataset& test_set,
                     const SimulationOptions& options = {});

using ProgressFn = std::function<void(int scenario_id, int completed, int total)>;

// All runs of one scenario on `workers` threads; results are in run order and
// do not depend on the worker count.
std::vector<RunResult> run_scenario(const Scenario& scenario, std::uint64_t master_seed, int workers,
                                    const SimulationOptions& options = {}, const ProgressFn& progress = {});

enum class Metric
{
    auroc,
    calib_intercept,
    calib_slope,
    acc_t50,
    sens_t50,
    spec_t50,
    acc_tef,
    sens_tef,
    spec_tef
};

std::string_view to_string(Metric m);
const std::vector<Metric>& all_metrics();
std::optional<double> metric_value(const MetricRecord& record, Metric m);

struct SummaryCell
{
    int scenario_id = 0;
    ModelKey key;
    Metric metric = Metric::auroc;
    std::optional<MedianIqr> summary; // empty when no run contributed
    int included = 0;
};

struct ExclusionCount
{
    int scenario_id = 0;
    ModelKey key;
    int runs = 0;
    int separation = 0;
    int one_class = 0;
    int non_convergence = 0;
    int capped = 0; // included records whose intercept was capped

    int excluded() const noexcept { return separation + one_class + non_convergence; }
};

struct ScenarioSummary
{
    std::vector<SummaryCell> cells;
    std::vector<ExclusionCount> exclusions;
};

// Median and type-7 IQR per (scenario, model, metric) over included runs, in
// scenario, model-key and metric order.
ScenarioSummary aggregate(const std::vector<RunResult>& results);

const SummaryCell* find_cell(const ScenarioSummary& s, int scenario_id, const ModelKey& key, Metric m);

} // namespace imbcal
