#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "a2c/data.hpp"
#include "a2c/types.hpp"

namespace a2c {

enum class ClassifierKind { SoftmaxLinear, OneHiddenLayer };

const char* classifier_kind_name(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view tag);

struct ClassifierConfig {
    ClassifierKind kind = ClassifierKind::SoftmaxLinear;
    std::size_t epochs = 300;
    double learning_rate = 0.5;
    std::uint64_t seed = 0;
    /// Width of the tanh layer for OneHiddenLayer.
    std::size_t hidden = 32;
};

struct TrainingMeta {
    std::size_t epochs = 0;
    double learning_rate = 0.0;
    std::uint64_t seed = 0;
    double final_loss = 0.0;
    /// Mean cross-entropy before each update, then the final value.
    std::vector<double> loss_curve;
};

/// Multiclass model over the ordered known class set. Weights are stored
/// row-major: output_weights is |classes| x (hidden or dimension).
struct ClassifierModel {
    ClassifierKind kind = ClassifierKind::SoftmaxLinear;
    std::vector<ClassLabel> class_set;
    std::size_t dimension = 0;
    std::size_t hidden = 0;
    std::vector<double> hidden_weights;  // hidden x dimension
    std::vector<double> hidden_bias;     // hidden
    std::vector<double> output_weights;  // classes x (hidden | dimension)
    std::vector<double> output_bias;     // classes
    TrainingMeta meta;

    std::size_t num_classes() const { return class_set.size(); }
    std::size_t parameter_count() const;
};

/// Untrained model: zero output layer, seeded small hidden weights.
ClassifierModel init_classifier(std::size_t dimension, std::vector<ClassLabel> class_set,
                                const ClassifierConfig& config);

/// Full-batch gradient descent on mean cross-entropy. `targets` are positions
/// in class_set.
ClassifierModel fit_classifier(const FeatureMatrix& x, std::span<const std::size_t> targets,
                               std::vector<ClassLabel> class_set, const ClassifierConfig& config);

/// Trains on partition.a_train over class set C_A.
ClassifierModel fit_classifier(const DatasetPartition& partition, const ClassifierConfig& config);

PredictionDistribution predict_proba(const ClassifierModel& model, std::span<const double> x);

/// Argmax label; ties resolve to the lowest class id.
ClassLabel predict_label(const ClassifierModel& model, std::span<const double> x);

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient;  // same layout as flatten_parameters
};

std::vector<double> flatten_parameters(const ClassifierModel& model);
void assign_parameters(ClassifierModel& model, std::span<const double> params);

/// Mean cross-entropy and its analytic gradient.
LossGradient loss_and_gradient(const ClassifierModel& model, const FeatureMatrix& x,
                               std::span<const std::size_t> targets);

enum class EvalScope { KnownOnly, Full };

/// Micro-F1 (accuracy). Labels outside the class set count as wrong under
/// Full and are skipped under KnownOnly.
double evaluate_classifier(const ClassifierModel& model, const Dataset& dataset,
                           std::span<const std::size_t> indices, EvalScope scope);

/// Training curve as "epoch,loss" CSV.
std::string training_curve_csv(const ClassifierModel& model);

}  // namespace a2c
