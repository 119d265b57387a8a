#pragma once

#include <imbcal/core.hpp>
#include <imbcal/optimize.hpp>
#include <imbcal/rng.hpp>

#include <optional>
#include <string>
#include <vector>

namespace imbcal {

// Logistic model with p independent standard-normal predictors of equal strength.
struct DgmSpec
{
    int p = 0;
    double event_fraction = 0.5;
    double target_auroc = 0.75;
    double intercept = 0.0;
    double beta = 0.0;

    void validate() const;
};

Matrix sample_predictors(const DgmSpec& spec, Eigen::Index n, RngStream& rng);
Dataset sample_outcomes(const DgmSpec& spec, const Matrix& features, RngStream& rng);
// Predictors from rng.child(0), outcomes from rng.child(1).
Dataset sample_dataset(const DgmSpec& spec, Eigen::Index n, const RngStream& rng);

// Deterministic surrogate for the observed AUROC and event rate on a fixed
// predictor sample: both are replaced by their expectations over the outcome
// draw, which makes the objective smooth in (intercept, beta).
class DgmObjective
{
public:
    DgmObjective(const Matrix& features, double event_fraction, double target_auroc);

    double expected_event_rate(double intercept, double beta) const;
    double expected_auroc(double intercept, double beta) const;
    double operator()(double intercept, double beta) const;

private:
    std::vector<double> sorted_score_; // row sums, ascending
    double event_fraction_;
    double target_auroc_;
};

struct DgmSolverOptions
{
    int datasets = 20;
    int restarts = 20;
    Eigen::Index sample_size = 100000;
    BfgsOptions bfgs{};
};

DgmSpec solve_dgm_coefficients(int p, double event_fraction, double target_auroc, const RngStream& rng,
                               const DgmSolverOptions& options = {});

struct DgmValidation
{
    double auroc = 0.0;
    double event_rate = 0.0;
};

DgmValidation validate_dgm(const DgmSpec& spec, Eigen::Index n, const RngStream& rng);

// Cache of solved coefficients, one `p,event_fraction,target_auroc,intercept,beta`
// record per line after a header.
std::vector<DgmSpec> read_coefficient_cache(const std::string& path);
void write_coefficient_cache(const std::string& path, const std::vector<DgmSpec>& specs);
std::string format_coefficient_record(const DgmSpec& spec);
std::optional<DgmSpec> find_spec(const std::vector<DgmSpec>& specs, int p, double event_fraction,
                                 double target_auroc);

// Synthetic stand-in for a tumour cohort: age, lesion diameter (nonlinear
// effect on the logit), and an ordinal count of papillary structures.
struct Cohort
{
    std::vector<std::string> columns;
    std::string outcome_column;
    Dataset data;
};

Cohort synthetic_cohort(Eigen::Index n, double event_fraction, const RngStream& rng);

} // namespace imbcal
