#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace a2c {

using ClassId = std::uint32_t;
using SampleId = std::uint64_t;

struct ClassLabel {
    ClassId id = 0;
    std::string name;

    friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

struct Sample {
    SampleId id = 0;
    std::vector<double> features;
    std::optional<ClassId> label;
};

/// Dense row-major matrix of feature vectors.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
};

enum class RejectVerdict { Accept, Defer };

/// Output of the rejector gate. Accept iff score > theta_r.
struct RejectDecision {
    RejectVerdict value = RejectVerdict::Defer;
    double score = 0.0;
};

/// Classifier probabilities over the ordered known class set.
struct PredictionDistribution {
    std::vector<double> probs;

    std::size_t argmax() const;
};

/// Everything handed to the expert when a sample is deferred.
struct ExpertContext {
    double reject_score = 0.0;
    RejectDecision reject_decision;
    PredictionDistribution classifier_probs;
    std::vector<std::string> contextual_info;
    std::vector<std::string> side_info;
};

enum class Stage { Classifier, Expert, CoexResolved, CoexUnresolved };

const char* stage_name(Stage s);

/// Final outcome for one sample. predicted == nullopt means Caution (no label).
struct Decision {
    SampleId sample_id = 0;
    std::optional<ClassId> truth;
    std::optional<ClassId> predicted;
    Stage stage = Stage::Classifier;
    double score = 0.0;
    std::optional<ExpertContext> context;

    bool correct() const { return predicted.has_value() && truth == predicted; }
};

}  // namespace a2c
