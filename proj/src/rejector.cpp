#include "a2c/rejector.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "a2c/error.hpp"

namespace a2c {
namespace {

constexpr const char* kStage = "rejector";

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double squared_distance(std::span<const double> a, const double* b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void check_dimension(const RejectorModel& model, std::size_t got) {
    if (got != model.dimension) {
        throw Error(kStage, "feature dimension mismatch: model expects " + std::to_string(model.dimension) +
                                ", got " + std::to_string(got));
    }
}

}  // namespace

const char* scorer_name(ScorerKind kind) {
    switch (kind) {
        case ScorerKind::Centroid: return "centroid";
        case ScorerKind::KnnDistance: return "knn-distance";
        case ScorerKind::PcaReconstruction: return "pca-reconstruction";
    }
    return "?";
}

ScorerKind parse_scorer_kind(std::string_view tag) {
    if (tag == "centroid") return ScorerKind::Centroid;
    if (tag == "knn-distance") return ScorerKind::KnnDistance;
    if (tag == "pca-reconstruction") return ScorerKind::PcaReconstruction;
    throw UsageError(kStage, "unknown scorer kind '" + std::string(tag) + "'");
}

RejectorModel fit_rejector(const FeatureMatrix& train, ScorerKind kind, const RejectorHyper& hyper) {
    if (train.rows == 0) throw Error(kStage, "training set is empty");
    RejectorModel m;
    m.kind = kind;
    m.dimension = train.cols;

    switch (kind) {
        case ScorerKind::Centroid: {
            m.center.assign(train.cols, 0.0);
            for (std::size_t i = 0; i < train.rows; ++i) {
                const auto r = train.row(i);
                for (std::size_t j = 0; j < train.cols; ++j) m.center[j] += r[j];
            }
            for (auto& v : m.center) v /= static_cast<double>(train.rows);
            break;
        }
        case ScorerKind::KnnDistance: {
            if (hyper.k == 0) throw Error(kStage, "k must be at least 1");
            if (hyper.k >= train.rows) {
                throw Error(kStage, "k = " + std::to_string(hyper.k) + " must be smaller than the training set (" +
                                        std::to_string(train.rows) + ")");
            }
            m.reference = train.data;
            m.k = hyper.k;
            break;
        }
        case ScorerKind::PcaReconstruction: {
            if (hyper.components == 0) throw Error(kStage, "component count must be at least 1");
            if (hyper.components > train.cols) {
                throw Error(kStage, "component count " + std::to_string(hyper.components) +
                                        " exceeds feature dimension " + std::to_string(train.cols));
            }
            Eigen::Map<const RowMatrix> x(train.data.data(), static_cast<Eigen::Index>(train.rows),
                                          static_cast<Eigen::Index>(train.cols));
            const Eigen::RowVectorXd mean = x.colwise().mean();
            const RowMatrix centered = x.rowwise() - mean;
            const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(train.rows);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
            if (eig.info() != Eigen::Success) throw Error(kStage, "eigendecomposition failed");

            m.center.assign(mean.data(), mean.data() + mean.size());
            m.components = hyper.components;
            m.basis.reserve(m.components * m.dimension);
            const auto d = static_cast<Eigen::Index>(train.cols);
            for (std::size_t c = 0; c < m.components; ++c) {
                Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - static_cast<Eigen::Index>(c));
                Eigen::Index pivot = 0;
                v.cwiseAbs().maxCoeff(&pivot);
                if (v(pivot) < 0) v = -v;
                m.basis.insert(m.basis.end(), v.data(), v.data() + v.size());
            }
            break;
        }
    }
    return m;
}

RejectorModel fit_rejector(const DatasetPartition& partition, std::span<const std::size_t> train_indices,
                           ScorerKind kind, const RejectorHyper& hyper) {
    for (auto i : train_indices) {
        const auto& s = partition.sample(i);
        if (!s.label || partition.group_of(*s.label) != Group::A) {
            throw Error(kStage, "training sample " + std::to_string(s.id) + " is not from a known class");
        }
    }
    return fit_rejector(gather_features(*partition.dataset, train_indices), kind, hyper);
}

double acceptance_score(const RejectorModel& model, std::span<const double> x) {
    check_dimension(model, x.size());
    switch (model.kind) {
        case ScorerKind::Centroid:
            return -std::sqrt(squared_distance(x, model.center.data()));
        case ScorerKind::KnnDistance: {
            const std::size_t n = model.reference_count();
            std::vector<double> d2(n);
            for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x, model.reference.data() + i * model.dimension);
            std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(model.k - 1), d2.end());
            std::sort(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(model.k));
            double sum = 0.0;
            for (std::size_t i = 0; i < model.k; ++i) sum += std::sqrt(d2[i]);
            return -sum / static_cast<double>(model.k);
        }
        case ScorerKind::PcaReconstruction: {
            const auto d = static_cast<Eigen::Index>(model.dimension);
            Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
            Eigen::Map<const Eigen::VectorXd> mean(model.center.data(), d);
            Eigen::Map<const RowMatrix> basis(model.basis.data(), static_cast<Eigen::Index>(model.components), d);
            const Eigen::VectorXd centered = xv - mean;
            const Eigen::VectorXd residual = centered - basis.transpose() * (basis * centered);
            return -residual.norm();
        }
    }
    return 0.0;
}

std::vector<double> acceptance_scores(const RejectorModel& model, const FeatureMatrix& xs) {
    std::vector<double> out(xs.rows);
    for (std::size_t i = 0; i < xs.rows; ++i) out[i] = acceptance_score(model, xs.row(i));
    return out;
}

double linear_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(kStage, "quantile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || values[lo] == values[hi]) return values[lo];
    return values[lo] + frac * (values[hi] - values[lo]);
}

RejectorModel calibrate_threshold_from_scores(RejectorModel model, std::vector<double> scores, double q) {
    if (scores.empty()) throw Error(kStage, "calibration set is empty");
    if (!(q > 0.0 && q < 1.0)) throw Error(kStage, "calibration quantile must lie in (0, 1)");
    const double theta = linear_quantile(std::move(scores), q);
    if (!std::isfinite(theta)) throw Error(kStage, "calibrated threshold is not finite");
    model.theta_r = theta;
    model.calibration_quantile = q;
    return model;
}

RejectorModel calibrate_threshold(RejectorModel model, const FeatureMatrix& calib, double q) {
    if (calib.rows == 0) throw Error(kStage, "calibration set is empty");
    auto scores = acceptance_scores(model, calib);
    return calibrate_threshold_from_scores(std::move(model), std::move(scores), q);
}

RejectDecision reject_decide(const RejectorModel& model, std::span<const double> x) {
    if (!model.theta_r) throw Error(kStage, "model is not calibrated (theta_r unset)");
    const double s = acceptance_score(model, x);
    return {s > *model.theta_r ? RejectVerdict::Accept : RejectVerdict::Defer, s};
}

RejectorEvaluation evaluate_rejector(const RejectorModel& model, const DatasetPartition& partition) {
    if (!model.theta_r) throw Error(kStage, "model is not calibrated (theta_r unset)");
    RejectorEvaluation ev;
    for (auto i : partition.a_test) {
        ++ev.known_total;
        if (reject_decide(model, partition.sample(i).features).value == RejectVerdict::Accept) ++ev.known_accepted;
    }
    for (Group g : {Group::B, Group::C}) {
        for (auto i : partition.subset(g)) {
            ++ev.unknown_total;
            if (reject_decide(model, partition.sample(i).features).value == RejectVerdict::Defer) ++ev.unknown_deferred;
        }
    }
    const auto total = ev.known_total + ev.unknown_total;
    if (total == 0) throw Error(kStage, "evaluation set is empty");
    ev.accuracy = static_cast<double>(ev.known_accepted + ev.unknown_deferred) / static_cast<double>(total);
    return ev;
}

}  // namespace a2c
