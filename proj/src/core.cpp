#include <imbcal/core.hpp>

#include <algorithm>

namespace imbcal {

FeatureKind FeatureKind::ordinal(std::vector<double> levels)
{
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    if (levels.empty()) {
        throw DomainError("ordinal feature needs at least one level");
    }
    FeatureKind k;
    k.tag = Tag::ordinal;
    k.levels = std::move(levels);
    return k;
}

Dataset::Dataset(Matrix features, Vector outcomes)
    : Dataset(std::move(features), std::move(outcomes), {})
{}

Dataset::Dataset(Matrix features, Vector outcomes, std::vector<FeatureKind> kinds)
    : features_(std::move(features)), outcomes_(std::move(outcomes)), kinds_(std::move(kinds))
{
    if (features_.rows() != outcomes_.size()) {
        throw DimensionError("Dataset: " + std::to_string(features_.rows()) + " feature rows but "
                             + std::to_string(outcomes_.size()) + " outcomes");
    }
    if (kinds_.empty()) {
        kinds_.assign(std::size_t(features_.cols()), FeatureKind::continuous());
    }
    if (Eigen::Index(kinds_.size()) != features_.cols()) {
        throw DimensionError("Dataset: feature kind count does not match column count");
    }
    for (Eigen::Index i = 0; i < outcomes_.size(); ++i) {
        if (outcomes_[i] != 0.0 && outcomes_[i] != 1.0) {
            throw DomainError("Dataset: outcome at row " + std::to_string(i) + " is not 0 or 1");
        }
    }
    if (!features_.allFinite()) {
        throw DomainError("Dataset: non-finite feature value");
    }
}

Eigen::Index Dataset::event_count() const
{
    return static_cast<Eigen::Index>(outcomes_.sum());
}

double Dataset::event_rate() const
{
    return rows() == 0 ? 0.0 : outcomes_.mean();
}

bool Dataset::has_both_classes() const
{
    const auto events = event_count();
    return events > 0 && events < rows();
}

void Dataset::require_both_classes(const std::string& context) const
{
    if (!has_both_classes()) {
        throw DegenerateInputError(context + ": data contain a single outcome class");
    }
}

Dataset Dataset::select_rows(const std::vector<Eigen::Index>& rows) const
{
    Matrix x(Eigen::Index(rows.size()), cols());
    Vector y(Eigen::Index(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        x.row(Eigen::Index(i)) = features_.row(rows[i]);
        y[Eigen::Index(i)] = outcomes_[rows[i]];
    }
    Dataset out;
    out.features_ = std::move(x);
    out.outcomes_ = std::move(y);
    out.kinds_ = kinds_;
    return out;
}

PredictionSet PredictionSet::from_linear_predictor(const Vector& lp, const Vector& outcomes)
{
    if (lp.size() != outcomes.size()) {
        throw DimensionError("PredictionSet: prediction and outcome lengths differ");
    }
    PredictionSet out;
    out.probabilities = clamp_probability(expit(lp.array())).matrix();
    out.linear_predictors = out.probabilities.unaryExpr([](double p) { return logit(p); });
    out.outcomes = outcomes;
    out.scores = lp;
    return out;
}

PredictionSet PredictionSet::from_probabilities(const Vector& p, const Vector& outcomes)
{
    if (p.size() != outcomes.size()) {
        throw DimensionError("PredictionSet: prediction and outcome lengths differ");
    }
    PredictionSet out;
    out.probabilities = clamp_probability(p.array()).matrix();
    out.linear_predictors = out.probabilities.unaryExpr([](double v) { return logit(v); });
    out.outcomes = outcomes;
    out.scores = p;
    return out;
}

} // namespace imbcal
