#include <imbcal/glm.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace imbcal {

namespace {

// log(1 + e^x)
inline double softplus(double x)
{
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

const double eta_bound = std::log((1.0 - probability_floor) / probability_floor);

std::vector<Eigen::Index> varying_columns(const Matrix& x)
{
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (x.rows() > 0 && x.col(j).maxCoeff() > x.col(j).minCoeff()) {
            cols.push_back(j);
        }
    }
    return cols;
}

// Design matrix [1, X(:, cols)].
Matrix intercept_design(const Matrix& x, const std::vector<Eigen::Index>& cols)
{
    Matrix d(x.rows(), Eigen::Index(cols.size()) + 1);
    d.col(0).setOnes();
    for (std::size_t k = 0; k < cols.size(); ++k) {
        d.col(Eigen::Index(k) + 1) = x.col(cols[k]);
    }
    return d;
}

struct Scaling
{
    Vector center;
    Vector scale;

    static Scaling identity(Eigen::Index p) { return {Vector::Zero(p), Vector::Ones(p)}; }

    static Scaling fit(const Matrix& x)
    {
        Scaling s;
        s.center = x.colwise().mean().transpose();
        s.scale.resize(x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double var = (x.col(j).array() - s.center[j]).square().mean();
            s.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
        }
        return s;
    }

    Matrix apply(const Matrix& x) const
    {
        return ((x.rowwise() - center.transpose()).array().rowwise() / scale.transpose().array()).matrix();
    }
};

/// Newton-Raphson for l(theta) - lambda * |beta|^2 on a design whose first
/// column is the intercept. With `reuse_hessian` the data part of the
/// Hessian is carried across iterations and penalties until progress slows,
/// which makes warm-started path solves cost about one gradient each.
class PenalizedLogistic
{
public:
    PenalizedLogistic(Matrix design, const Vector& y) : design_(std::move(design)), y_(y)
    {
        penalty_mask_ = Vector::Ones(design_.cols());
        penalty_mask_[0] = 0.0;
    }

    Eigen::Index rows() const { return design_.rows(); }
    Eigen::Index dim() const { return design_.cols(); }
    const Matrix& design() const { return design_; }

    struct Outcome
    {
        bool converged = false;
        int iterations = 0;
    };

    Outcome solve(double lambda, Vector& theta, const LogisticOptions& options, bool reuse_hessian)
    {
        if (!state_valid_ || theta.size() != theta_.size() || theta != theta_) {
            theta_ = theta;
            evaluate(theta_, eta_, mu_, ll_data_);
            grad_data_ = gradient(mu_);
            state_valid_ = true;
        }
        const double tol = options.tolerance * double(rows());
        auto penalized = [&](const Vector& t, double ll) {
            return ll - lambda * t.tail(t.size() - 1).squaredNorm();
        };
        double objective = penalized(theta_, ll_data_);
        Vector grad = grad_data_ - 2.0 * lambda * penalty_mask_.cwiseProduct(theta_);

        Outcome out;
        bool need_fresh = !reuse_hessian || !have_hessian_;
        for (int it = 0; it < options.max_iterations; ++it) {
            const double gnorm = grad.cwiseAbs().maxCoeff();
            if (gnorm <= tol) {
                out.converged = true;
                break;
            }
            bool fresh = false;
            if (need_fresh) {
                refresh_hessian();
                fresh = true;
            }
            Vector step = newton_step(lambda, grad);

            bool accepted = false;
            Vector cand_theta, cand_eta, cand_mu;
            double cand_ll = 0.0;
            double cand_obj = 0.0;
            for (;;) {
                double t = 1.0;
                for (int half = 0; half < 30; ++half, t *= 0.5) {
                    cand_theta = theta_ + t * step;
                    evaluate(cand_theta, cand_eta, cand_mu, cand_ll);
                    cand_obj = penalized(cand_theta, cand_ll);
                    if (std::isfinite(cand_obj) && cand_obj >= objective - 1e-12 * (1.0 + std::abs(objective))) {
                        accepted = true;
                        break;
                    }
                }
                if (accepted || fresh) {
                    break;
                }
                // a stale Hessian gave a poor direction; retry with an exact one
                refresh_hessian();
                fresh = true;
                step = newton_step(lambda, grad);
            }
            ++out.iterations;
            if (!accepted) {
                break;
            }
            theta_ = std::move(cand_theta);
            eta_ = std::move(cand_eta);
            mu_ = std::move(cand_mu);
            ll_data_ = cand_ll;
            objective = cand_obj;
            grad_data_ = gradient(mu_);
            grad = grad_data_ - 2.0 * lambda * penalty_mask_.cwiseProduct(theta_);
            need_fresh = !reuse_hessian || grad.cwiseAbs().maxCoeff() > 0.25 * gnorm;
        }
        theta = theta_;
        return out;
    }

    const Vector& eta() const { return eta_; }

private:
    void evaluate(const Vector& theta, Vector& eta, Vector& mu, double& ll) const
    {
        eta.noalias() = design_ * theta;
        // packet-friendly form: t = e^-|eta|, softplus = max(eta, 0) + log(1 + t)
        const auto e = eta.array();
        const Eigen::ArrayXd t = (-e.abs()).exp();
        const Eigen::ArrayXd inv = (1.0 + t).inverse();
        mu = (e >= 0.0).select(inv, t * inv).matrix();
        ll = (y_.array() * e - e.max(0.0) - (1.0 + t).log()).sum();
    }

    Vector gradient(const Vector& mu) const { return design_.transpose() * (y_ - mu); }

    void refresh_hessian()
    {
        const Eigen::ArrayXd w = (mu_.array() * (1.0 - mu_.array())).sqrt();
        const Matrix weighted = design_.array().colwise() * w;
        hessian_data_.setZero(dim(), dim());
        hessian_data_.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose());
        hessian_data_.triangularView<Eigen::StrictlyUpper>() = hessian_data_.transpose();
        have_hessian_ = true;
    }

    Vector newton_step(double lambda, const Vector& grad) const
    {
        Matrix h = hessian_data_;
        h.diagonal() += 2.0 * lambda * penalty_mask_;
        Eigen::LDLT<Matrix> ldlt(h);
        const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-12 * std::max(dmax, 1e-300))) {
            // singular (separated or collinear) data: small ridge on everything
            const double jitter = 1e-10 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
            h.diagonal().array() += jitter;
            ldlt.compute(h);
        }
        return ldlt.solve(grad);
    }

    Matrix design_;
    const Vector& y_;
    Vector penalty_mask_;

    bool state_valid_ = false;
    Vector theta_;
    Vector eta_;
    Vector mu_;
    double ll_data_ = 0.0;
    Vector grad_data_;

    bool have_hessian_ = false;
    Matrix hessian_data_;
};

FittedModel assemble(const Vector& theta, const std::vector<Eigen::Index>& cols, Eigen::Index p,
                     const Scaling& scaling)
{
    FittedModel m;
    m.coefficients = Vector::Zero(p);
    double intercept = theta[0];
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const Eigen::Index j = cols[k];
        const double b = theta[Eigen::Index(k) + 1] / scaling.scale[j];
        m.coefficients[j] = b;
        intercept -= b * scaling.center[j];
    }
    m.intercept = intercept;
    return m;
}

struct PenalizedFit
{
    FittedModel model;
    Vector training_eta;
};

PenalizedFit fit_penalized(const Dataset& data, double lambda, const LogisticOptions& options, bool standardize)
{
    const Scaling scaling = standardize ? Scaling::fit(data.features()) : Scaling::identity(data.cols());
    const Matrix x = standardize ? scaling.apply(data.features()) : data.features();
    const auto cols = varying_columns(x);
    PenalizedLogistic solver(intercept_design(x, cols), data.outcomes());

    Vector theta = Vector::Zero(solver.dim());
    theta[0] = logit(data.event_rate());
    const auto outcome = solver.solve(lambda, theta, options, false);

    PenalizedFit fit{assemble(theta, cols, data.cols(), scaling), solver.eta()};
    fit.model.converged = outcome.converged;
    fit.model.iterations = outcome.iterations;
    return fit;
}

bool apparent_auroc_is_one(const Vector& eta, const Vector& y)
{
    return auroc(eta, y) >= 1.0 - 1e-12;
}

} // namespace

// ------------------------------------------------------------------ public

std::vector<double> lambda_grid(double smallest, double largest, int count)
{
    if (!(smallest > 0.0 && largest > smallest) || count < 2) {
        throw DomainError("lambda_grid: need 0 < smallest < largest and count >= 2");
    }
    std::vector<double> grid;
    grid.reserve(std::size_t(count) + 1);
    grid.push_back(0.0);
    const double lo = std::log(smallest);
    const double step = (std::log(largest) - lo) / double(count - 1);
    for (int i = 0; i < count; ++i) {
        grid.push_back(std::exp(lo + step * double(i)));
    }
    grid.back() = largest;
    return grid;
}

void RidgeConfig::validate() const
{
    if (folds < 2) {
        throw ConfigurationError("ridge: at least 2 folds are required");
    }
    if (!(path_tolerance > 0.0)) {
        throw ConfigurationError("ridge: path tolerance must be positive");
    }
    if (lambdas.empty()) {
        throw ConfigurationError("ridge: empty lambda grid");
    }
    for (double l : lambdas) {
        if (!(l >= 0.0) || !std::isfinite(l)) {
            throw ConfigurationError("ridge: lambda values must be finite and nonnegative");
        }
    }
}

double deviance(const Vector& linear_predictor, const Vector& outcomes)
{
    double d = 0.0;
    for (Eigen::Index i = 0; i < linear_predictor.size(); ++i) {
        const double e = std::clamp(linear_predictor[i], -eta_bound, eta_bound);
        d += outcomes[i] != 0.0 ? softplus(-e) : softplus(e);
    }
    return 2.0 * d;
}

FittedModel fit_ml_logistic(const Dataset& data, const LogisticOptions& options)
{
    data.require_both_classes("fit_ml_logistic");
    auto fit = fit_penalized(data, 0.0, options, false);
    if (apparent_auroc_is_one(fit.training_eta, data.outcomes())) {
        fit.model.separation_detected = true;
        fit.model.converged = false;
    } else if (!fit.model.converged) {
        throw NonConvergenceError("fit_ml_logistic: no convergence after " + std::to_string(fit.model.iterations)
                                  + " iterations");
    }
    return fit.model;
}

FittedModel fit_ridge_logistic_at(const Dataset& data, double lambda, const LogisticOptions& options,
                                  bool standardize)
{
    data.require_both_classes("fit_ridge_logistic");
    if (!(lambda >= 0.0)) {
        throw DomainError("fit_ridge_logistic: lambda must be nonnegative");
    }
    auto fit = fit_penalized(data, lambda, options, standardize);
    if (lambda == 0.0 && apparent_auroc_is_one(fit.training_eta, data.outcomes())) {
        fit.model.separation_detected = true;
        fit.model.converged = false;
    }
    fit.model.lambda = lambda;
    return fit.model;
}

std::vector<int> assign_folds(Eigen::Index rows, int folds, RngStream& rng, const Vector* stratify_by)
{
    if (folds < 2) {
        throw DomainError("assign_folds: at least 2 folds are required");
    }
    std::vector<int> label(static_cast<std::size_t>(rows));
    auto deal = [&](std::vector<Eigen::Index> members, int offset) {
        shuffle(members.begin(), members.end(), rng);
        for (std::size_t i = 0; i < members.size(); ++i) {
            label[std::size_t(members[i])] = int((i + std::size_t(offset)) % std::size_t(folds));
        }
        return int((members.size() + std::size_t(offset)) % std::size_t(folds));
    };
    if (stratify_by == nullptr) {
        std::vector<Eigen::Index> all(static_cast<std::size_t>(rows));
        std::iota(all.begin(), all.end(), Eigen::Index(0));
        deal(std::move(all), 0);
    } else {
        std::vector<Eigen::Index> events, nonevents;
        for (Eigen::Index i = 0; i < rows; ++i) {
            ((*stratify_by)[i] != 0.0 ? events : nonevents).push_back(i);
        }
        const int next = deal(std::move(events), 0);
        deal(std::move(nonevents), next);
    }
    return label;
}

CrossValidationResult cross_validate_ridge(const Dataset& data, const RidgeConfig& config, RngStream& rng)
{
    config.validate();
    data.require_both_classes("cross_validate_ridge");

    const Eigen::Index n = data.rows();
    const bool loo = std::min(data.event_count(), data.nonevent_count()) < config.loocv_below;
    const int k = loo ? int(n) : config.folds;
    if (!loo && n < k) {
        throw DegenerateInputError("cross_validate_ridge: fewer rows than folds");
    }
    const auto label = loo ? assign_folds(n, k, rng) : assign_folds(n, k, rng, config.stratified ? &data.outcomes() : nullptr);

    LogisticOptions path_options = config.solver;
    path_options.tolerance = config.path_tolerance;

    CrossValidationResult cv;
    cv.lambdas = config.lambdas;
    std::sort(cv.lambdas.begin(), cv.lambdas.end(), std::greater<>());
    cv.mean_deviance.assign(cv.lambdas.size(), 0.0);
    cv.folds = k;
    cv.leave_one_out = loo;

    for (int fold = 0; fold < k; ++fold) {
        std::vector<Eigen::Index> train_rows, test_rows;
        for (Eigen::Index i = 0; i < n; ++i) {
            (label[std::size_t(i)] == fold ? test_rows : train_rows).push_back(i);
        }
        if (test_rows.empty()) {
            continue;
        }
        const Dataset train = data.select_rows(train_rows);
        const Dataset test = data.select_rows(test_rows);

        if (!train.has_both_classes()) {
            // no model can be fitted; a constant penalty for every lambda
            const double rate = std::clamp(train.event_rate(), probability_floor, 1.0 - probability_floor);
            const double d = deviance(Vector::Constant(test.rows(), logit(rate)), test.outcomes());
            for (auto& v : cv.mean_deviance) {
                v += d;
            }
            continue;
        }

        const Scaling scaling = config.standardize ? Scaling::fit(train.features()) : Scaling::identity(train.cols());
        const Matrix x_train = config.standardize ? scaling.apply(train.features()) : train.features();
        const Matrix x_test = config.standardize ? scaling.apply(test.features()) : test.features();
        const auto cols = varying_columns(x_train);
        PenalizedLogistic solver(intercept_design(x_train, cols), train.outcomes());
        const Matrix test_design = intercept_design(x_test, cols);

        Vector theta = Vector::Zero(solver.dim());
        theta[0] = logit(train.event_rate());
        for (std::size_t l = 0; l < cv.lambdas.size(); ++l) {
            solver.solve(cv.lambdas[l], theta, path_options, true);
            cv.mean_deviance[l] += deviance(test_design * theta, test.outcomes());
        }
    }
    for (auto& v : cv.mean_deviance) {
        v /= double(n);
    }
    // ties resolve to the larger penalty
    cv.best = std::size_t(std::min_element(cv.mean_deviance.begin(), cv.mean_deviance.end()) - cv.mean_deviance.begin());
    return cv;
}

FittedModel fit_ridge_logistic(const Dataset& data, const RidgeConfig& config, RngStream& rng,
                               CrossValidationResult* cv_out)
{
    auto cv = cross_validate_ridge(data, config, rng);
    auto model = fit_ridge_logistic_at(data, cv.best_lambda(), config.solver, config.standardize);
    if (cv_out != nullptr) {
        *cv_out = std::move(cv);
    }
    return model;
}

Vector linear_predictor(const FittedModel& model, const Matrix& features)
{
    if (features.cols() != model.feature_count()) {
        throw DimensionError("predict: model has " + std::to_string(model.feature_count()) + " coefficients but data have "
                             + std::to_string(features.cols()) + " columns");
    }
    Vector eta = features * model.coefficients;
    eta.array() += model.intercept;
    return eta;
}

Vector predict_probabilities(const FittedModel& model, const Matrix& features)
{
    return clamp_probability(expit(linear_predictor(model, features).array())).matrix();
}

PredictionSet predict(const FittedModel& model, const Dataset& data)
{
    return PredictionSet::from_linear_predictor(linear_predictor(model, data.features()), data.outcomes());
}

bool shows_separation(const FittedModel& model, const Dataset& data)
{
    return apparent_auroc_is_one(linear_predictor(model, data.features()), data.outcomes());
}

bool detect_separation(const Dataset& data)
{
    data.require_both_classes("detect_separation");
    const auto fit = fit_penalized(data, 0.0, {}, false);
    return apparent_auroc_is_one(fit.training_eta, data.outcomes());
}

CalibrationFit recalibrate_intercept(const FittedModel& model, const Dataset& recalib_data)
{
    recalib_data.require_both_classes("recalibrate_intercept");
    const auto preds = predict(model, recalib_data);
    return {offset_intercept(preds.linear_predictors, preds.outcomes), std::nullopt};
}

FittedModel apply(const FittedModel& model, const CalibrationFit& recalibration)
{
    FittedModel out = model;
    out.intercept += recalibration.intercept_a;
    if (recalibration.slope_b) {
        out.coefficients *= *recalibration.slope_b;
        out.intercept = recalibration.intercept_a + *recalibration.slope_b * model.intercept;
    }
    return out;
}

} // namespace imbcal
