#include <imbcal/casestudy.hpp>
#include <imbcal/errors.hpp>
#include <imbcal/svg.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <cstdio>
#include <set>
#include <sstream>

namespace imbcal {

namespace {

std::vector<std::string> split_list(const std::string& text, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep)) {
        const auto b = cur.find_first_not_of(" \t");
        const auto e = cur.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
    }
    return out;
}

double parse_cell(const CsvTable& t, std::size_t row, std::size_t col)
{
    const auto& s = t.rows[row][col];
    const auto where = [&] { return "row " + std::to_string(row + 2) + ", column '" + t.header[col] + "'"; };
    if (s.empty()) {
        throw IngestionError(where() + ": missing value");
    }
    double v = 0.0;
    const char* first = s.data();
    if (*first == '+') {
        ++first;
    }
    const auto [p, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
        throw IngestionError(where() + ": '" + s + "' is not a finite number");
    }
    return v;
}

std::string label(const ModelKey& k)
{
    return std::string(to_string(k.algorithm)) + " " + std::string(to_string(k.dataset));
}

std::string fixed(double v, int digits = 2)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s = buf;
    return s.find_first_not_of("-0.") == std::string::npos && s[0] == '-' ? s.substr(1) : s;
}

std::string ci(const Interval& i)
{
    if (!i.lower || !i.upper) {
        return "NA";
    }
    return "(" + fixed(*i.lower) + "; " + fixed(*i.upper) + ")";
}

std::string optional_fixed(const std::optional<double>& v)
{
    return v ? fixed(*v) : "NA";
}

PredictionSet subset(const PredictionSet& p, const std::vector<Eigen::Index>& rows)
{
    PredictionSet s;
    const auto n = Eigen::Index(rows.size());
    s.probabilities.resize(n);
    s.linear_predictors.resize(n);
    s.outcomes.resize(n);
    s.scores.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto r = rows[std::size_t(i)];
        s.probabilities[i] = p.probabilities[r];
        s.linear_predictors[i] = p.linear_predictors[r];
        s.outcomes[i] = p.outcomes[r];
        s.scores[i] = p.scores[r];
    }
    return s;
}

Interval percentile_interval(double estimate, std::vector<double> draws)
{
    Interval i{estimate, std::nullopt, std::nullopt};
    if (draws.size() >= 2) {
        std::sort(draws.begin(), draws.end());
        i.lower = quantile_sorted(draws, 0.025);
        i.upper = quantile_sorted(draws, 0.975);
    }
    return i;
}

constexpr ResampleKind dataset_order[] = {ResampleKind::none, ResampleKind::rus, ResampleKind::ros,
                                          ResampleKind::smote};

std::uint64_t dataset_index(ResampleKind k)
{
    return std::uint64_t(std::find(std::begin(dataset_order), std::end(dataset_order), k) - std::begin(dataset_order));
}

} // namespace

void CaseStudySpec::validate() const
{
    if (outcome.empty()) {
        throw ConfigurationError("case study: no outcome column given");
    }
    if (predictors.empty()) {
        throw ConfigurationError("case study: no predictor columns given");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigurationError("case study: train fraction must lie in (0, 1)");
    }
    for (double t : thresholds) {
        if (!(t > 0.0 && t < 1.0)) {
            throw ConfigurationError("case study: thresholds must lie in (0, 1)");
        }
    }
    for (const auto& k : methods) {
        if (k.recalibrated) {
            throw ConfigurationError("case study: recalibrated models are not part of the method list");
        }
    }
    if (bootstrap_resamples < 1) {
        throw ConfigurationError("case study: bootstrap resamples must be at least 1");
    }
    if (smote_k < 1) {
        throw ConfigurationError("case study: smote k must be at least 1");
    }
    if (!(loess_span > 0.0 && loess_span <= 1.0)) {
        throw ConfigurationError("case study: loess span must lie in (0, 1]");
    }
    ridge.validate();
}

std::vector<PredictorSpec> parse_predictor_list(const std::string& text)
{
    std::vector<PredictorSpec> out;
    for (const auto& item : split_list(text, ',')) {
        if (item.empty()) {
            continue;
        }
        const auto parts = split_list(item, ':');
        PredictorSpec p;
        p.column = parts[0];
        for (std::size_t i = 1; i < parts.size(); ++i) {
            if (parts[i] == "spline") {
                p.spline = true;
            } else if (parts[i] == "ordinal") {
                p.ordinal = true;
            } else if (parts[i] != "continuous") {
                throw ConfigurationError("predictor '" + p.column + "': unknown tag '" + parts[i] +
                                         "' (continuous, ordinal, spline)");
            }
        }
        if (p.spline && p.ordinal) {
            throw ConfigurationError("predictor '" + p.column + "': spline terms need a continuous predictor");
        }
        out.push_back(p);
    }
    if (out.empty()) {
        throw ConfigurationError("empty predictor list");
    }
    return out;
}

std::vector<ModelKey> parse_method_list(const std::string& text)
{
    std::vector<ModelKey> out;
    if (text == "all") {
        for (ResampleKind d : dataset_order) {
            for (Algorithm a : {Algorithm::slr, Algorithm::ridge}) {
                out.push_back({d, a, false});
            }
        }
        return out;
    }
    for (const auto& item : split_list(text, ',')) {
        const auto parts = split_list(item, ':');
        if (parts.size() != 2) {
            throw ConfigurationError("method '" + item + "' should look like RUS:Ridge");
        }
        out.push_back({parse_resample_kind(parts[0]), parse_algorithm(parts[1]), false});
    }
    if (out.empty()) {
        throw ConfigurationError("empty method list");
    }
    return out;
}

void write_cohort_csv(std::ostream& out, const Cohort& cohort)
{
    auto header = cohort.columns;
    header.push_back(cohort.outcome_column);
    write_csv_row(out, header);
    const auto& x = cohort.data.features();
    const auto& y = cohort.data.outcomes();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        std::vector<std::string> row;
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            row.push_back(format_double(x(r, c)));
        }
        row.push_back(y[r] != 0.0 ? "1" : "0");
        write_csv_row(out, row);
    }
}

Dataset case_study_dataset(const CsvTable& table, const CaseStudySpec& spec)
{
    const auto y_col = table.column(spec.outcome);
    std::vector<std::size_t> x_cols;
    for (const auto& p : spec.predictors) {
        x_cols.push_back(table.column(p.column));
    }
    const auto n = Eigen::Index(table.rows.size());
    if (n < 50) {
        throw IngestionError("case study needs at least 50 rows, found " + std::to_string(n));
    }
    Matrix x(n, Eigen::Index(x_cols.size()));
    Vector y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const double v = parse_cell(table, std::size_t(r), y_col);
        if (v != 0.0 && v != 1.0) {
            throw IngestionError("row " + std::to_string(r + 2) + ", column '" + spec.outcome +
                                 "': outcome must be 0 or 1, found '" + table.rows[std::size_t(r)][y_col] + "'");
        }
        y[r] = v;
        for (std::size_t c = 0; c < x_cols.size(); ++c) {
            x(r, Eigen::Index(c)) = parse_cell(table, std::size_t(r), x_cols[c]);
        }
    }
    std::vector<FeatureKind> kinds;
    for (std::size_t c = 0; c < spec.predictors.size(); ++c) {
        if (spec.predictors[c].ordinal) {
            const auto col = x.col(Eigen::Index(c));
            std::set<double> levels(col.begin(), col.end());
            kinds.push_back(FeatureKind::ordinal({levels.begin(), levels.end()}));
        } else {
            kinds.push_back(FeatureKind::continuous());
        }
    }
    return Dataset(std::move(x), std::move(y), std::move(kinds));
}

SplitIndices split_rows(const Vector& outcomes, double train_fraction, RngStream& rng, bool stratified)
{
    const auto n = outcomes.size();
    const auto n_train = Eigen::Index(std::ceil(train_fraction * double(n) - 1e-9));
    SplitIndices s;
    if (!stratified) {
        std::vector<Eigen::Index> order(std::size_t(n), 0);
        std::iota(order.begin(), order.end(), Eigen::Index(0));
        shuffle(order.begin(), order.end(), rng);
        s.train.assign(order.begin(), order.begin() + n_train);
        s.test.assign(order.begin() + n_train, order.end());
    } else {
        std::vector<Eigen::Index> events;
        std::vector<Eigen::Index> nonevents;
        for (Eigen::Index i = 0; i < n; ++i) {
            (outcomes[i] != 0.0 ? events : nonevents).push_back(i);
        }
        shuffle(events.begin(), events.end(), rng);
        shuffle(nonevents.begin(), nonevents.end(), rng);
        auto train_events = Eigen::Index(std::llround(train_fraction * double(events.size())));
        train_events = std::clamp(train_events, n_train - Eigen::Index(nonevents.size()), n_train);
        const auto train_nonevents = n_train - train_events;
        s.train.assign(events.begin(), events.begin() + train_events);
        s.train.insert(s.train.end(), nonevents.begin(), nonevents.begin() + train_nonevents);
        s.test.assign(events.begin() + train_events, events.end());
        s.test.insert(s.test.end(), nonevents.begin() + train_nonevents, nonevents.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

const CaseModelResult* CaseStudyReport::find(const ModelKey& key) const
{
    for (const auto& m : models) {
        if (m.key == key) {
            return &m;
        }
    }
    return nullptr;
}

CaseStudyReport run_case_study(const Dataset& data, const CaseStudySpec& spec)
{
    spec.validate();
    if (Eigen::Index(spec.predictors.size()) != data.cols()) {
        throw DimensionError("case study: predictor list does not match the data columns");
    }
    auto split_rng = derive_stream(spec.seed, {0});
    const auto split = split_rows(data.outcomes(), spec.train_fraction, split_rng, spec.stratified_split);
    const auto train = data.select_rows(split.train);
    const auto test = data.select_rows(split.test);
    train.require_both_classes("case study training set");
    test.require_both_classes("case study test set");

    CaseStudyReport report;
    report.n_train = train.rows();
    report.n_test = test.rows();
    report.train_events = train.event_count();
    report.training_rate = train.event_rate();
    report.thresholds = spec.thresholds.empty() ? std::vector<double>{0.5, report.training_rate} : spec.thresholds;
    for (const auto& p : spec.predictors) {
        report.feature_names.push_back(p.column);
    }

    // knots come from the unadjusted training data and are reused everywhere
    std::vector<Eigen::Index> spline_cols;
    for (std::size_t c = 0; c < spec.predictors.size(); ++c) {
        if (spec.predictors[c].spline) {
            spline_cols.push_back(Eigen::Index(c));
            report.feature_names.push_back(spec.predictors[c].column + "'");
        }
    }
    const auto terms = spline_terms(train, spline_cols);
    const auto test_x = apply_splines(test, terms);

    auto methods = spec.methods.empty() ? parse_method_list("all") : spec.methods;
    std::sort(methods.begin(), methods.end());
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());

    RidgeConfig ridge = spec.ridge;
    ridge.standardize = true;
    const auto grid = threshold_grid(0.0, 0.5, 0.01);

    for (ResampleKind kind : dataset_order) {
        if (std::none_of(methods.begin(), methods.end(), [&](const ModelKey& k) { return k.dataset == kind; })) {
            continue;
        }
        auto resample_rng = derive_stream(spec.seed, {1, dataset_index(kind)});
        const auto adjusted = resample(train, ResampleMethod{kind, spec.smote_k, true}, resample_rng);
        const auto expanded = apply_splines(adjusted, terms);

        for (const auto& key : methods) {
            if (key.dataset != kind) {
                continue;
            }
            CaseModelResult m;
            m.key = key;
            if (key.algorithm == Algorithm::slr) {
                m.model = fit_ml_logistic(expanded);
                if (m.model.separation_detected) {
                    throw NonConvergenceError("case study: " + label(key) + " training data are separated");
                }
            } else {
                auto cv_rng = derive_stream(spec.seed, {2, dataset_index(kind)});
                m.model = fit_ridge_logistic(expanded, ridge, cv_rng);
            }
            const auto preds = predict(m.model, test_x);

            std::vector<double> b_auc;
            std::vector<double> b_int;
            std::vector<double> b_slope;
            auto boot_rng = derive_stream(spec.seed, {3});
            std::vector<Eigen::Index> rows(std::size_t(preds.size()));
            for (int b = 0; b < spec.bootstrap_resamples; ++b) {
                for (auto& r : rows) {
                    r = Eigen::Index(boot_rng.uniform_index(std::uint64_t(preds.size())));
                }
                const auto s = subset(preds, rows);
                if (!Dataset(Matrix(s.size(), 0), s.outcomes).has_both_classes()) {
                    continue;
                }
                b_auc.push_back(auroc(s));
                b_int.push_back(calibration_intercept(s));
                try {
                    b_slope.push_back(calibration_slope(s));
                } catch (const Error&) {
                    // skipped; the interval uses the replicates that converged
                }
            }
            m.auroc = percentile_interval(auroc(preds), std::move(b_auc));
            m.calib_intercept = percentile_interval(calibration_intercept(preds), std::move(b_int));
            m.calib_slope = percentile_interval(calibration_slope(preds), std::move(b_slope));

            for (double t : report.thresholds) {
                const auto c = classify(preds, t);
                m.thresholds.push_back({t, c.accuracy(), c.sensitivity(), c.specificity()});
            }
            m.calibration = flexible_calibration_curve(preds, spec.loess_span);
            m.decision = decision_curve(preds, grid, spec.net_benefit_weight);
            report.models.push_back(std::move(m));
        }
    }
    return report;
}

void write_case_study_table(std::ostream& out, const CaseStudyReport& report)
{
    std::vector<std::string> header{"measure"};
    for (const auto& m : report.models) {
        header.push_back(label(m.key));
    }
    write_csv_row(out, header);
    const auto row = [&](const std::string& name, auto&& cell) {
        std::vector<std::string> r{name};
        for (const auto& m : report.models) {
            r.push_back(cell(m));
        }
        write_csv_row(out, r);
    };
    row("AUROC", [](const CaseModelResult& m) { return fixed(m.auroc.estimate); });
    row("AUROC 95% CI", [](const CaseModelResult& m) { return ci(m.auroc); });
    for (std::size_t t = 0; t < report.thresholds.size(); ++t) {
        char name[32];
        std::snprintf(name, sizeof name, "t=%.3g", report.thresholds[t]);
        row(std::string("Accuracy, ") + name, [&](const CaseModelResult& m) { return fixed(m.thresholds[t].accuracy); });
        row(std::string("Sensitivity, ") + name,
            [&](const CaseModelResult& m) { return optional_fixed(m.thresholds[t].sensitivity); });
        row(std::string("Specificity, ") + name,
            [&](const CaseModelResult& m) { return optional_fixed(m.thresholds[t].specificity); });
    }
    row("Calibration intercept", [](const CaseModelResult& m) { return fixed(m.calib_intercept.estimate); });
    row("Calibration intercept 95% CI", [](const CaseModelResult& m) { return ci(m.calib_intercept); });
    row("Calibration slope", [](const CaseModelResult& m) { return fixed(m.calib_slope.estimate); });
    row("Calibration slope 95% CI", [](const CaseModelResult& m) { return ci(m.calib_slope); });
}

std::string case_study_calibration_svg(const CaseStudyReport& report, Algorithm algorithm)
{
    CalibrationPlotData plot;
    plot.title = "Flexible calibration curves, " + std::string(to_string(algorithm));
    for (const auto& m : report.models) {
        if (m.key.algorithm != algorithm) {
            continue;
        }
        plot.curves.push_back({std::string(to_string(m.key.dataset)),
                               {m.calibration.grid.begin(), m.calibration.grid.end()},
                               {m.calibration.fitted.begin(), m.calibration.fitted.end()}});
    }
    return render_calibration_plot(plot);
}

std::string case_study_decision_svg(const CaseStudyReport& report, Algorithm algorithm)
{
    DecisionCurveData plot;
    plot.title = "Decision curves, " + std::string(to_string(algorithm));
    for (const auto& m : report.models) {
        if (m.key.algorithm != algorithm) {
            continue;
        }
        LineSeries s{std::string(to_string(m.key.dataset)), {}, {}};
        const bool first = plot.thresholds.empty();
        for (const auto& p : m.decision) {
            s.x.push_back(p.threshold);
            s.y.push_back(p.model);
            if (first) {
                plot.thresholds.push_back(p.threshold);
                plot.treat_all.push_back(p.treat_all);
            }
        }
        plot.models.push_back(std::move(s));
    }
    return render_decision_curve(plot);
}

} // namespace imbcal
