#pragma once

#include <imbcal/errors.hpp>

#include <Eigen/Core>

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace imbcal {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

// Predictions are kept inside [floor, 1 - floor] so that every linear
// predictor stays finite, including those of separated ML fits.
inline constexpr double probability_floor = 1e-12;

template <std::floating_point Scalar>
Scalar logit(Scalar p)
{
    if (!(p > Scalar(0) && p < Scalar(1))) {
        throw DomainError("logit: argument must lie in (0,1), got " + std::to_string(double(p)));
    }
    return std::log(p) - std::log1p(-p);
}

template <std::floating_point Scalar>
Scalar expit(Scalar x)
{
    if (x >= Scalar(0)) {
        return Scalar(1) / (Scalar(1) + std::exp(-x));
    }
    const Scalar e = std::exp(x);
    return e / (Scalar(1) + e);
}

template <std::floating_point Scalar>
Scalar clamp_probability(Scalar p)
{
    constexpr Scalar lo = Scalar(probability_floor);
    constexpr Scalar hi = Scalar(1) - Scalar(probability_floor);
    return p < lo ? lo : (p > hi ? hi : p);
}

// Coefficient-wise expit of an Eigen expression.
template <class Derived>
auto expit(const Eigen::ArrayBase<Derived>& x)
{
    using Scalar = typename Derived::Scalar;
    return x.unaryExpr([](Scalar v) { return expit(v); });
}

template <class Derived>
auto clamp_probability(const Eigen::ArrayBase<Derived>& p)
{
    using Scalar = typename Derived::Scalar;
    return p.unaryExpr([](Scalar v) { return clamp_probability(v); });
}

// ------------------------------------------------------------------ types

struct FeatureKind
{
    enum class Tag { continuous, ordinal };

    Tag tag = Tag::continuous;
    std::vector<double> levels; // ascending; ordinal only

    static FeatureKind continuous() { return {}; }
    static FeatureKind ordinal(std::vector<double> levels);

    bool is_ordinal() const noexcept { return tag == Tag::ordinal; }
    bool operator==(const FeatureKind&) const = default;
};

// Predictor matrix plus binary outcomes. The constructor validates:
// outcomes are 0/1, row counts agree, all features finite.
class Dataset
{
public:
    Dataset() = default;
    Dataset(Matrix features, Vector outcomes);
    Dataset(Matrix features, Vector outcomes, std::vector<FeatureKind> kinds);

    const Matrix& features() const noexcept { return features_; }
    const Vector& outcomes() const noexcept { return outcomes_; }
    const std::vector<FeatureKind>& feature_kinds() const noexcept { return kinds_; }

    Eigen::Index rows() const noexcept { return features_.rows(); }
    Eigen::Index cols() const noexcept { return features_.cols(); }

    Eigen::Index event_count() const;
    Eigen::Index nonevent_count() const { return rows() - event_count(); }
    double event_rate() const;
    bool has_both_classes() const;

    // Throws DegenerateInputError naming `context` unless both classes occur.
    void require_both_classes(const std::string& context) const;

    // Rows in the given order (indices may repeat).
    Dataset select_rows(const std::vector<Eigen::Index>& rows) const;

private:
    Matrix features_;
    Vector outcomes_;
    std::vector<FeatureKind> kinds_;
};

struct FittedModel
{
    double intercept = 0.0;
    Vector coefficients;
    std::optional<double> lambda; // set iff ridge-fitted
    bool converged = false;
    bool separation_detected = false;
    int iterations = 0;

    Eigen::Index feature_count() const noexcept { return coefficients.size(); }
};

// Model output on an evaluation sample. Probabilities are clamped and the
// linear predictor is the logit of the clamped probability. `scores` keeps
// the unclamped linear predictor for ranking, so clamping never creates ties.
struct PredictionSet
{
    Vector probabilities;
    Vector linear_predictors;
    Vector outcomes;
    Vector scores;

    Eigen::Index size() const noexcept { return probabilities.size(); }

    static PredictionSet from_linear_predictor(const Vector& lp, const Vector& outcomes);
    static PredictionSet from_probabilities(const Vector& p, const Vector& outcomes);
};

} // namespace imbcal
