#pragma once

#include <imbcal/core.hpp>
#include <imbcal/metrics.hpp>
#include <imbcal/rng.hpp>

#include <vector>

namespace imbcal {

struct LogisticOptions
{
    int max_iterations = 50;
    // converged once max |gradient| <= tolerance * rows
    double tolerance = 1e-8;
};

enum class DevianceRule { min_deviance };

// 0 followed by `count` values equidistant on the log scale from `smallest`
// to `largest`, ascending.
std::vector<double> lambda_grid(double smallest = 1e-4, double largest = 64.0, int count = 250);

struct RidgeConfig
{
    std::vector<double> lambdas = lambda_grid();
    int folds = 10;
    DevianceRule rule = DevianceRule::min_deviance;
    bool stratified = false;
    // center and scale columns before fitting; coefficients are returned on
    // the original scale
    bool standardize = false;
    // below this many events or non-events, cross-validation is leave-one-out
    Eigen::Index loocv_below = 8;
    LogisticOptions solver{};
    // gradient tolerance (times rows) for the warm-started fold paths; the
    // final fit at the chosen penalty uses solver.tolerance
    double path_tolerance = 1e-5;

    void validate() const;
};

struct CrossValidationResult
{
    std::vector<double> lambdas;       // as searched, descending
    std::vector<double> mean_deviance; // out-of-fold deviance per row
    std::size_t best = 0;
    int folds = 0;
    bool leave_one_out = false;

    double best_lambda() const { return lambdas[best]; }
};

/// Maximum-likelihood logistic regression by Newton-Raphson with step
/// halving. Constant columns get coefficient 0 and are left out of the solve.
/// A fit whose apparent AUROC is 1 is returned with `separation_detected`
/// set and `converged` cleared; any other fit that exhausts the iteration
/// budget raises NonConvergenceError.
FittedModel fit_ml_logistic(const Dataset& data, const LogisticOptions& options = {});

// Ridge fit at one fixed penalty: maximizes l(alpha, beta) - lambda * |beta|^2.
FittedModel fit_ridge_logistic_at(const Dataset& data, double lambda, const LogisticOptions& options = {},
                                  bool standardize = false);

// Fold labels in [0, folds) from a uniform random permutation of the rows.
// With `stratify`, each class is permuted and dealt separately.
std::vector<int> assign_folds(Eigen::Index rows, int folds, RngStream& rng, const Vector* stratify_by = nullptr);

CrossValidationResult cross_validate_ridge(const Dataset& data, const RidgeConfig& config, RngStream& rng);

/// Ridge fit with the penalty chosen by cross-validated deviance. Switches to
/// leave-one-out when either class has fewer than `config.loocv_below` rows.
FittedModel fit_ridge_logistic(const Dataset& data, const RidgeConfig& config, RngStream& rng,
                               CrossValidationResult* cv_out = nullptr);

Vector linear_predictor(const FittedModel& model, const Matrix& features);
Vector predict_probabilities(const FittedModel& model, const Matrix& features);
PredictionSet predict(const FittedModel& model, const Dataset& data);

// Apparent AUROC of the ML fit on its own training data equals 1.
bool detect_separation(const Dataset& data);
bool shows_separation(const FittedModel& model, const Dataset& data);

/// Intercept update with the model's linear predictor as offset, fitted on
/// `recalib_data`. Returns only `a`; see apply().
CalibrationFit recalibrate_intercept(const FittedModel& model, const Dataset& recalib_data);

FittedModel apply(const FittedModel& model, const CalibrationFit& recalibration);

// -2 * log-likelihood with probabilities clamped to the core floor.
double deviance(const Vector& linear_predictor, const Vector& outcomes);

} // namespace imbcal
