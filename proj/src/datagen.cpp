#include <imbcal/datagen.hpp>
#include <imbcal/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace imbcal {

namespace {

double median_of(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double round_significant(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

} // namespace

void DgmSpec::validate() const
{
    if (p < 1) {
        throw ConfigurationError("DgmSpec: p must be at least 1");
    }
    if (!(event_fraction > 0.0 && event_fraction < 1.0)) {
        throw ConfigurationError("DgmSpec: event fraction must lie in (0,1)");
    }
    if (!(target_auroc >= 0.5 && target_auroc < 1.0)) {
        throw ConfigurationError("DgmSpec: target AUROC must lie in [0.5,1)");
    }
}

Matrix sample_predictors(const DgmSpec& spec, Eigen::Index n, RngStream& rng)
{
    if (n < 1) {
        throw DomainError("sample_predictors: n must be at least 1");
    }
    if (spec.p < 1) {
        throw DomainError("sample_predictors: p must be at least 1");
    }
    Matrix x(n, spec.p);
    // row-major fill so that a prefix of rows does not depend on n
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < spec.p; ++j) {
            x(i, j) = rng.normal();
        }
    }
    return x;
}

Dataset sample_outcomes(const DgmSpec& spec, const Matrix& features, RngStream& rng)
{
    if (features.cols() != spec.p) {
        throw DimensionError("sample_outcomes: feature count does not match the specification");
    }
    Vector y(features.rows());
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const double prob = expit(spec.intercept + spec.beta * features.row(i).sum());
        y[i] = rng.uniform() < prob ? 1.0 : 0.0;
    }
    return Dataset(features, y);
}

Dataset sample_dataset(const DgmSpec& spec, Eigen::Index n, const RngStream& rng)
{
    auto xs = rng.child(0);
    auto ys = rng.child(1);
    return sample_outcomes(spec, sample_predictors(spec, n, xs), ys);
}

DgmObjective::DgmObjective(const Matrix& features, double event_fraction, double target_auroc)
    : event_fraction_(event_fraction), target_auroc_(target_auroc)
{
    const Vector s = features.rowwise().sum();
    sorted_score_.assign(s.data(), s.data() + s.size());
    std::sort(sorted_score_.begin(), sorted_score_.end());
}

double DgmObjective::expected_event_rate(double intercept, double beta) const
{
    double total = 0.0;
    for (double s : sorted_score_) {
        total += expit(intercept + beta * s);
    }
    return total / double(sorted_score_.size());
}

double DgmObjective::expected_auroc(double intercept, double beta) const
{
    // Ratio of expected concordant pairs to expected event/non-event pairs
    // for the ranking by the summed predictors.
    double events = 0.0;
    double nonevents = 0.0;
    double same_row = 0.0;
    double concordant = 0.0;
    double nonevents_below = 0.0;
    for (double s : sorted_score_) {
        const double prob = expit(intercept + beta * s);
        concordant += prob * nonevents_below;
        nonevents_below += 1.0 - prob;
        events += prob;
        nonevents += 1.0 - prob;
        same_row += prob * (1.0 - prob);
    }
    return concordant / (events * nonevents - same_row);
}

double DgmObjective::operator()(double intercept, double beta) const
{
    const double da = expected_auroc(intercept, beta) - target_auroc_;
    const double de = expected_event_rate(intercept, beta) - event_fraction_;
    return da * da + de * de;
}

DgmSpec solve_dgm_coefficients(int p, double event_fraction, double target_auroc, const RngStream& rng,
                               const DgmSolverOptions& options)
{
    DgmSpec spec;
    spec.p = p;
    spec.event_fraction = event_fraction;
    spec.target_auroc = target_auroc;
    spec.validate();
    if (options.datasets < 1 || options.restarts < 1 || options.sample_size < 2) {
        throw ConfigurationError("solve_dgm_coefficients: datasets, restarts and sample size must be positive");
    }

    std::vector<double> intercepts;
    std::vector<double> betas;
    double best = INFINITY;
    for (int d = 0; d < options.datasets; ++d) {
        const auto stream = rng.child(std::uint64_t(d));
        auto xs = stream.child(0);
        auto jitter = stream.child(1);
        const DgmObjective objective(sample_predictors(spec, options.sample_size, xs), event_fraction, target_auroc);
        const Objective f = [&](const Vector& v) { return objective(v[0], v[1]); };

        std::vector<double> a_runs;
        std::vector<double> b_runs;
        for (int r = 0; r < options.restarts; ++r) {
            Vector start{{logit(event_fraction), 0.5}};
            if (r > 0) {
                start[0] += 0.5 * jitter.normal();
                start[1] *= std::exp(0.5 * jitter.normal());
            }
            const auto res = minimize_bfgs(f, start, options.bfgs);
            best = std::min(best, res.value);
            if (res.converged) {
                a_runs.push_back(res.x[0]);
                b_runs.push_back(res.x[1]);
            }
        }
        if (!a_runs.empty()) {
            intercepts.push_back(median_of(a_runs));
            betas.push_back(median_of(b_runs));
        }
    }
    if (intercepts.empty()) {
        throw SolverError("solve_dgm_coefficients: no restart converged", best);
    }
    // rounded to the cache precision so a reloaded cache reproduces the same draws
    spec.intercept = round_significant(median_of(intercepts));
    spec.beta = round_significant(median_of(betas));
    return spec;
}

DgmValidation validate_dgm(const DgmSpec& spec, Eigen::Index n, const RngStream& rng)
{
    const auto data = sample_dataset(spec, n, rng);
    const Vector score = data.features().rowwise().sum() * spec.beta;
    return {auroc(score, data.outcomes()), data.event_rate()};
}

std::string format_coefficient_record(const DgmSpec& spec)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g", spec.p, spec.event_fraction, spec.target_auroc,
                  spec.intercept, spec.beta);
    return buf;
}

std::vector<DgmSpec> read_coefficient_cache(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IngestionError("cannot open coefficient cache " + path);
    }
    std::vector<DgmSpec> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.rfind("p,", 0) == 0) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 5) {
            throw IngestionError(path + ":" + std::to_string(line_no) + ": expected 5 fields");
        }
        try {
            DgmSpec s;
            s.p = std::stoi(fields[0]);
            s.event_fraction = std::stod(fields[1]);
            s.target_auroc = std::stod(fields[2]);
            s.intercept = std::stod(fields[3]);
            s.beta = std::stod(fields[4]);
            out.push_back(s);
        } catch (const std::logic_error&) {
            throw IngestionError(path + ":" + std::to_string(line_no) + ": unparseable number");
        }
    }
    return out;
}

void write_coefficient_cache(const std::string& path, const std::vector<DgmSpec>& specs)
{
    std::ofstream out(path);
    if (!out) {
        throw IngestionError("cannot write coefficient cache " + path);
    }
    out << "p,event_fraction,target_auroc,intercept,beta\n";
    for (const auto& s : specs) {
        out << format_coefficient_record(s) << '\n';
    }
}

std::optional<DgmSpec> find_spec(const std::vector<DgmSpec>& specs, int p, double event_fraction,
                                 double target_auroc)
{
    for (const auto& s : specs) {
        if (s.p == p && std::abs(s.event_fraction - event_fraction) <= 1e-9 &&
            std::abs(s.target_auroc - target_auroc) <= 1e-9) {
            return s;
        }
    }
    return std::nullopt;
}

Cohort synthetic_cohort(Eigen::Index n, double event_fraction, const RngStream& rng)
{
    if (n < 1 || !(event_fraction > 0.0 && event_fraction < 1.0)) {
        throw DomainError("synthetic_cohort: need n >= 1 and event fraction in (0,1)");
    }
    auto xs = rng.child(0);
    auto ys = rng.child(1);
    Matrix x(n, 3);
    Vector lp(n);
    const double cum[] = {0.60, 0.75, 0.85, 0.93, 1.0};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double age = std::clamp(50.0 + 15.0 * xs.normal(), 18.0, 90.0);
        const double diameter = std::clamp(std::exp(std::log(45.0) + 0.6 * xs.normal()), 5.0, 400.0);
        const double u = xs.uniform();
        int papillary = 0;
        while (u > cum[papillary]) {
            ++papillary;
        }
        x(i, 0) = std::round(age);
        x(i, 1) = std::round(diameter);
        x(i, 2) = papillary;
        const double ld = std::log(x(i, 1) / 45.0);
        lp[i] = 0.035 * (x(i, 0) - 50.0) + 1.6 * ld - 0.6 * ld * ld + 0.55 * papillary;
    }

    // intercept giving the requested expected event rate on this sample
    double lo = -30.0;
    double hi = 30.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double rate = (lp.array() + mid).unaryExpr([](double v) { return expit(v); }).mean();
        (rate < event_fraction ? lo : hi) = mid;
    }
    const double intercept = 0.5 * (lo + hi);

    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = ys.uniform() < expit(intercept + lp[i]) ? 1.0 : 0.0;
    }
    std::vector<FeatureKind> kinds{FeatureKind::continuous(), FeatureKind::continuous(),
                                   FeatureKind::ordinal({0, 1, 2, 3, 4})};
    return {{"age", "lesion_diameter", "papillary_count"}, "malignant", Dataset(x, y, kinds)};
}

} // namespace imbcal
