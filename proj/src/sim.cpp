#include <imbcal/metrics.hpp>
#include <imbcal/sim.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

namespace imbcal {

namespace {

constexpr ResampleKind dataset_order[] = {ResampleKind::none, ResampleKind::rus, ResampleKind::ros,
                                          ResampleKind::smote};

ThresholdMetrics threshold_metrics(const PredictionSet& ps, double t)
{
    const auto c = classify(ps, t);
    return {c.accuracy(), c.sensitivity(), c.specificity()};
}

MetricRecord evaluate(const ModelKey& key, const Vector& eta, const Vector& ranking, const Vector& y,
                      double event_fraction, double cap)
{
    auto ps = PredictionSet::from_linear_predictor(eta, y);
    ps.scores = ranking;
    MetricRecord r;
    r.key = key;
    r.auroc = auroc(ps);
    r.calib_intercept = calibration_intercept(ps);
    if (std::abs(r.calib_intercept) > cap || !std::isfinite(r.calib_intercept)) {
        r.calib_intercept = std::copysign(cap, r.calib_intercept);
        r.intercept_capped = true;
    }
    try {
        r.calib_slope = calibration_slope(ps);
    } catch (const Error&) {
        r.calib_slope.reset();
    }
    r.at_half = threshold_metrics(ps, 0.5);
    if (key.dataset == ResampleKind::none && !key.recalibrated) {
        r.at_event_fraction = threshold_metrics(ps, event_fraction);
    }
    return r;
}

void exclude_dataset(RunResult& out, ResampleKind dataset, ExclusionReason reason)
{
    for (const auto& k : model_keys()) {
        if (k.dataset == dataset) {
            out.exclusions.push_back({k, reason});
        }
    }
}

} // namespace

std::string_view to_string(Algorithm a)
{
    return a == Algorithm::slr ? "SLR" : "Ridge";
}

Algorithm parse_algorithm(std::string_view name)
{
    if (name == "SLR") {
        return Algorithm::slr;
    }
    if (name == "Ridge") {
        return Algorithm::ridge;
    }
    throw ConfigurationError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(ExclusionReason r)
{
    switch (r) {
    case ExclusionReason::none:
        return "";
    case ExclusionReason::separation:
        return "separation";
    case ExclusionReason::one_class:
        return "one_class";
    case ExclusionReason::non_convergence:
        return "non_convergence";
    }
    return "";
}

ExclusionReason parse_exclusion_reason(std::string_view name)
{
    for (auto r : {ExclusionReason::none, ExclusionReason::separation, ExclusionReason::one_class,
                   ExclusionReason::non_convergence}) {
        if (name == to_string(r)) {
            return r;
        }
    }
    throw ConfigurationError("unknown exclusion reason '" + std::string(name) + "'");
}

const std::vector<ModelKey>& model_keys()
{
    static const std::vector<ModelKey> keys = [] {
        std::vector<ModelKey> k;
        for (auto d : dataset_order) {
            for (auto a : {Algorithm::slr, Algorithm::ridge}) {
                k.push_back({d, a, false});
                if (d != ResampleKind::none) {
                    k.push_back({d, a, true});
                }
            }
        }
        return k;
    }();
    return keys;
}

std::vector<Scenario> study_scenarios(Eigen::Index n_test, int n_runs)
{
    std::vector<Scenario> out;
    int id = 1;
    for (double ef : {0.01, 0.1, 0.3}) {
        for (Eigen::Index n : {2500, 5000}) {
            for (int p : {3, 6, 12, 24}) {
                Scenario s;
                s.id = id++;
                s.event_fraction = ef;
                s.n_train = n;
                s.p = p;
                s.n_test = n_test;
                s.n_runs = n_runs;
                out.push_back(s);
            }
        }
    }
    return out;
}

void attach_coefficients(std::vector<Scenario>& scenarios, const std::vector<DgmSpec>& cache, double target_auroc)
{
    for (auto& s : scenarios) {
        const auto spec = find_spec(cache, s.p, s.event_fraction, target_auroc);
        if (!spec) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "no solved coefficients for p=%d, event fraction=%g, AUROC=%g", s.p,
                          s.event_fraction, target_auroc);
            throw ConfigurationError(buf);
        }
        s.dgm = *spec;
    }
}

Dataset make_test_set(const Scenario& scenario, std::uint64_t master_seed)
{
    if (!scenario.dgm) {
        throw ConfigurationError("scenario " + std::to_string(scenario.id) + " has no solved coefficients");
    }
    return sample_dataset(*scenario.dgm, scenario.n_test, derive_stream(master_seed, {std::uint64_t(scenario.id)}));
}

RunResult run_single(const Scenario& scenario, int run_id, std::uint64_t master_seed, const Dataset& test_set,
                     const SimulationOptions& options)
{
    if (!scenario.dgm) {
        throw ConfigurationError("scenario " + std::to_string(scenario.id) + " has no solved coefficients");
    }
    RunResult out;
    out.scenario_id = scenario.id;
    out.run_id = run_id;
    const RngStream root = derive_stream(master_seed, {std::uint64_t(scenario.id), std::uint64_t(run_id)});

    const Dataset train = sample_dataset(*scenario.dgm, scenario.n_train, root.child(stage::train));
    if (!train.has_both_classes()) {
        for (const auto& k : model_keys()) {
            out.exclusions.push_back({k, ExclusionReason::one_class});
        }
        return out;
    }

    const Vector& y_test = test_set.outcomes();
    for (std::size_t di = 0; di < 4; ++di) {
        const ResampleKind kind = dataset_order[di];
        Dataset dev;
        try {
            auto rs = root.child(kind == ResampleKind::rus ? stage::rus
                                 : kind == ResampleKind::ros ? stage::ros
                                                             : stage::smote);
            dev = resample(train, {kind, options.smote_k, false}, rs);
        } catch (const DegenerateInputError&) {
            exclude_dataset(out, kind, ExclusionReason::one_class);
            continue;
        }
        if (!dev.has_both_classes()) {
            exclude_dataset(out, kind, ExclusionReason::one_class);
            continue;
        }

        std::optional<FittedModel> slr;
        try {
            slr = fit_ml_logistic(dev);
        } catch (const NonConvergenceError&) {
            slr.reset();
        }
        if (slr && slr->separation_detected) {
            exclude_dataset(out, kind, ExclusionReason::separation);
            continue;
        }

        std::optional<FittedModel> ridge;
        try {
            auto cv_rng = root.child(stage::cv_ridge + di);
            ridge = fit_ridge_logistic(dev, options.ridge, cv_rng);
            if (!ridge->converged) {
                ridge.reset();
            }
        } catch (const NonConvergenceError&) {
            ridge.reset();
        }

        for (auto [alg, model] : {std::pair{Algorithm::slr, &slr}, std::pair{Algorithm::ridge, &ridge}}) {
            if (!*model) {
                out.exclusions.push_back({{kind, alg, false}, ExclusionReason::non_convergence});
                if (kind != ResampleKind::none) {
                    out.exclusions.push_back({{kind, alg, true}, ExclusionReason::non_convergence});
                }
                continue;
            }
            const Vector eta = linear_predictor(**model, test_set.features());
            out.records.push_back(
                evaluate({kind, alg, false}, eta, eta, y_test, scenario.event_fraction, options.intercept_cap));
            if (kind != ResampleKind::none) {
                // intercept update on the original, imbalanced training data
                const double a = recalibrate_intercept(**model, train).intercept_a;
                const Vector shifted = (eta.array() + a).matrix();
                out.records.push_back(evaluate({kind, alg, true}, shifted, eta, y_test, scenario.event_fraction,
                                               options.intercept_cap));
            }
        }
    }

    const auto order = [](const auto& a, const auto& b) { return a.key < b.key; };
    std::sort(out.records.begin(), out.records.end(), order);
    std::sort(out.exclusions.begin(), out.exclusions.end(), order);
    return out;
}

std::vector<RunResult> run_scenario(const Scenario& scenario, std::uint64_t master_seed, int workers,
                                    const SimulationOptions& options, const ProgressFn& progress)
{
    const Dataset test_set = make_test_set(scenario, master_seed);
    std::vector<RunResult> results(static_cast<std::size_t>(scenario.n_runs));
    std::atomic<int> next{0};
    std::atomic<int> done{0};
    std::exception_ptr failure;
    std::mutex mu;

    auto work = [&] {
        for (;;) {
            const int run = next.fetch_add(1);
            if (run >= scenario.n_runs) {
                return;
            }
            try {
                results[std::size_t(run)] = run_single(scenario, run, master_seed, test_set, options);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(scenario.n_runs);
                return;
            }
            const int finished = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(mu);
                progress(scenario.id, finished, scenario.n_runs);
            }
        }
    };

    const int n_threads = std::max(1, std::min(workers, scenario.n_runs));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back(work);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return results;
}

std::string_view to_string(Metric m)
{
    switch (m) {
    case Metric::auroc:
        return "auroc";
    case Metric::calib_intercept:
        return "calib_intercept";
    case Metric::calib_slope:
        return "calib_slope";
    case Metric::acc_t50:
        return "acc_t50";
    case Metric::sens_t50:
        return "sens_t50";
    case Metric::spec_t50:
        return "spec_t50";
    case Metric::acc_tef:
        return "acc_tef";
    case Metric::sens_tef:
        return "sens_tef";
    case Metric::spec_tef:
        return "spec_tef";
    }
    return "";
}

const std::vector<Metric>& all_metrics()
{
    static const std::vector<Metric> m{Metric::auroc,    Metric::calib_intercept, Metric::calib_slope,
                                       Metric::acc_t50,  Metric::sens_t50,        Metric::spec_t50,
                                       Metric::acc_tef,  Metric::sens_tef,        Metric::spec_tef};
    return m;
}

std::optional<double> metric_value(const MetricRecord& r, Metric m)
{
    switch (m) {
    case Metric::auroc:
        return r.auroc;
    case Metric::calib_intercept:
        return r.calib_intercept;
    case Metric::calib_slope:
        return r.calib_slope;
    case Metric::acc_t50:
        return r.at_half.accuracy;
    case Metric::sens_t50:
        return r.at_half.sensitivity;
    case Metric::spec_t50:
        return r.at_half.specificity;
    case Metric::acc_tef:
        return r.at_event_fraction ? std::optional(r.at_event_fraction->accuracy) : std::nullopt;
    case Metric::sens_tef:
        return r.at_event_fraction ? r.at_event_fraction->sensitivity : std::nullopt;
    case Metric::spec_tef:
        return r.at_event_fraction ? r.at_event_fraction->specificity : std::nullopt;
    }
    return std::nullopt;
}

ScenarioSummary aggregate(const std::vector<RunResult>& results)
{
    std::map<int, std::vector<const RunResult*>> by_scenario;
    for (const auto& r : results) {
        by_scenario[r.scenario_id].push_back(&r);
    }
    for (auto& [id, runs] : by_scenario) {
        std::stable_sort(runs.begin(), runs.end(), [](const RunResult* a, const RunResult* b) {
            return a->run_id < b->run_id;
        });
    }

    ScenarioSummary out;
    for (const auto& [id, runs] : by_scenario) {
        for (const auto& key : model_keys()) {
            ExclusionCount ex;
            ex.scenario_id = id;
            ex.key = key;
            ex.runs = int(runs.size());
            std::vector<const MetricRecord*> recs;
            for (const RunResult* r : runs) {
                for (const auto& rec : r->records) {
                    if (rec.key == key) {
                        recs.push_back(&rec);
                        ex.capped += rec.intercept_capped ? 1 : 0;
                    }
                }
                for (const auto& e : r->exclusions) {
                    if (e.key == key) {
                        ex.separation += e.reason == ExclusionReason::separation ? 1 : 0;
                        ex.one_class += e.reason == ExclusionReason::one_class ? 1 : 0;
                        ex.non_convergence += e.reason == ExclusionReason::non_convergence ? 1 : 0;
                    }
                }
            }
            out.exclusions.push_back(ex);

            const bool unadjusted = key.dataset == ResampleKind::none && !key.recalibrated;
            for (Metric m : all_metrics()) {
                const bool ef_metric = m == Metric::acc_tef || m == Metric::sens_tef || m == Metric::spec_tef;
                if (ef_metric && !unadjusted) {
                    continue;
                }
                std::vector<double> values;
                for (const MetricRecord* rec : recs) {
                    if (auto v = metric_value(*rec, m)) {
                        values.push_back(*v);
                    }
                }
                SummaryCell cell;
                cell.scenario_id = id;
                cell.key = key;
                cell.metric = m;
                cell.included = int(values.size());
                if (!values.empty()) {
                    cell.summary = median_iqr(std::move(values));
                }
                out.cells.push_back(cell);
            }
        }
    }
    return out;
}

const SummaryCell* find_cell(const ScenarioSummary& s, int scenario_id, const ModelKey& key, Metric m)
{
    for (const auto& c : s.cells) {
        if (c.scenario_id == scenario_id && c.key == key && c.metric == m) {
            return &c;
        }
    }
    return nullptr;
}

} // namespace imbcal
