#pragma once

#include <imbcal/csv.hpp>
#include <imbcal/datagen.hpp>
#include <imbcal/features.hpp>
#include <imbcal/sim.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace imbcal {

struct PredictorSpec
{
    std::string column;
    bool ordinal = false;
    bool spline = false;
};

struct CaseStudySpec
{
    std::string input_csv;
    std::string outcome;
    std::vector<PredictorSpec> predictors;
    double train_fraction = 0.8;
    std::uint64_t seed = 1;
    bool stratified_split = false;
    // empty: 0.5 and the training event rate
    std::vector<double> thresholds;
    // subset of the 8 unrecalibrated models; empty means all of them
    std::vector<ModelKey> methods;
    int bootstrap_resamples = 2000;
    double loess_span = 0.75;
    NetBenefitWeight net_benefit_weight = NetBenefitWeight::odds;
    int smote_k = 5;
    RidgeConfig ridge{};

    void validate() const;
};

// "age,lesion_diameter:spline,papillary_count:ordinal" style list.
std::vector<PredictorSpec> parse_predictor_list(const std::string& text);

// "None:SLR,RUS:Ridge" style list; "all" gives the 8 models.
std::vector<ModelKey> parse_method_list(const std::string& text);

// Predictor columns followed by the outcome column.
void write_cohort_csv(std::ostream& out, const Cohort& cohort);

// Extracts the outcome and predictors; errors name the row and column.
Dataset case_study_dataset(const CsvTable& table, const CaseStudySpec& spec);

struct SplitIndices
{
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};

// ceil(f * N) training rows and the rest for testing, chosen by a random
// permutation (per class when stratified). Both lists are ascending.
SplitIndices split_rows(const Vector& outcomes, double train_fraction, RngStream& rng, bool stratified = false);

struct Interval
{
    double estimate = 0.0;
    std::optional<double> lower;
    std::optional<double> upper;
};

struct ThresholdResult
{
    double threshold = 0.5;
    double accuracy = 0.0;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
};

struct CaseModelResult
{
    ModelKey key;
    FittedModel model;
    Interval auroc;
    Interval calib_intercept;
    Interval calib_slope;
    std::vector<ThresholdResult> thresholds;
    CalibrationCurve calibration;
    std::vector<DecisionCurvePoint> decision;
};

struct CaseStudyReport
{
    Eigen::Index n_train = 0;
    Eigen::Index n_test = 0;
    Eigen::Index train_events = 0;
    double training_rate = 0.0;
    std::vector<double> thresholds;
    std::vector<std::string> feature_names;
    std::vector<CaseModelResult> models;

    const CaseModelResult* find(const ModelKey& key) const;
};

CaseStudyReport run_case_study(const Dataset& data, const CaseStudySpec& spec);

// Table of estimates with 95% bootstrap intervals, one column per model.
void write_case_study_table(std::ostream& out, const CaseStudyReport& report);

std::string case_study_calibration_svg(const CaseStudyReport& report, Algorithm algorithm);
std::string case_study_decision_svg(const CaseStudyReport& report, Algorithm algorithm);

} // namespace imbcal
