#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "a2c/data.hpp"
#include "a2c/types.hpp"

namespace a2c {

enum class ScorerKind { Centroid, KnnDistance, PcaReconstruction };

const char* scorer_name(ScorerKind kind);
ScorerKind parse_scorer_kind(std::string_view tag);

struct RejectorHyper {
    std::size_t k = 5;
    std::size_t components = 10;
};

/// One-class acceptance model. Scores are oriented so that HIGHER means more
/// compatible with the known classes: each scorer returns the negated anomaly
/// measure (distance to centroid, mean k-NN distance, reconstruction error).
struct RejectorModel {
    ScorerKind kind = ScorerKind::Centroid;
    std::size_t dimension = 0;
    /// Centroid, or the PCA mean.
    std::vector<double> center;
    /// knn-distance reference vectors, row-major.
    std::vector<double> reference;
    std::size_t k = 0;
    /// pca-reconstruction basis, `components` orthonormal rows of length dimension.
    std::vector<double> basis;
    std::size_t components = 0;
    std::optional<double> theta_r;
    double calibration_quantile = 0.05;

    std::size_t reference_count() const { return dimension ? reference.size() / dimension : 0; }
    bool calibrated() const { return theta_r.has_value(); }
};

RejectorModel fit_rejector(const FeatureMatrix& train, ScorerKind kind, const RejectorHyper& hyper = {});

/// Fits on partition samples; every label must belong to C_A.
RejectorModel fit_rejector(const DatasetPartition& partition, std::span<const std::size_t> train_indices,
                           ScorerKind kind, const RejectorHyper& hyper = {});

double acceptance_score(const RejectorModel& model, std::span<const double> x);
std::vector<double> acceptance_scores(const RejectorModel& model, const FeatureMatrix& xs);

/// q-quantile with linear interpolation between order statistics
/// (position q*(n-1) in the ascending sort).
double linear_quantile(std::vector<double> values, double q);

/// Sets theta_r to the q-quantile of the acceptance scores on `calib`.
RejectorModel calibrate_threshold(RejectorModel model, const FeatureMatrix& calib, double q = 0.05);
RejectorModel calibrate_threshold_from_scores(RejectorModel model, std::vector<double> scores, double q = 0.05);

/// Accept iff acceptance_score > theta_r. Ties defer.
RejectDecision reject_decide(const RejectorModel& model, std::span<const double> x);

struct RejectorEvaluation {
    double accuracy = 0.0;
    std::size_t known_total = 0;
    std::size_t known_accepted = 0;
    std::size_t unknown_total = 0;
    std::size_t unknown_deferred = 0;
};

/// Known-vs-unknown accuracy on a_test (should accept) and D_B + D_C (should defer).
RejectorEvaluation evaluate_rejector(const RejectorModel& model, const DatasetPartition& partition);

}  // namespace a2c
