#include "a2c/classifier.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "a2c/error.hpp"
#include "a2c/rng.hpp"
#include "a2c/text.hpp"

namespace a2c {
namespace {

constexpr const char* kStage = "classifier";

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using Idx = Eigen::Index;

Idx ix(std::size_t v) { return static_cast<Idx>(v); }

std::size_t input_width(const ClassifierModel& m) {
    return m.kind == ClassifierKind::OneHiddenLayer ? m.hidden : m.dimension;
}

/// Row-wise log-softmax, stable against overflow.
RowMatrix log_softmax(const RowMatrix& z) {
    RowMatrix out(z.rows(), z.cols());
    for (Idx i = 0; i < z.rows(); ++i) {
        const double mx = z.row(i).maxCoeff();
        const double lse = mx + std::log((z.row(i).array() - mx).exp().sum());
        out.row(i) = z.row(i).array() - lse;
    }
    return out;
}

struct Forward {
    RowMatrix hidden;  // empty for softmax-linear
    RowMatrix logits;
};

Forward forward(const ClassifierModel& m, const ConstRowMap& x) {
    Forward f;
    const Eigen::Map<const RowMatrix> w2(m.output_weights.data(), ix(m.num_classes()), ix(input_width(m)));
    const Eigen::Map<const Eigen::RowVectorXd> b2(m.output_bias.data(), ix(m.num_classes()));
    if (m.kind == ClassifierKind::OneHiddenLayer) {
        const Eigen::Map<const RowMatrix> w1(m.hidden_weights.data(), ix(m.hidden), ix(m.dimension));
        const Eigen::Map<const Eigen::RowVectorXd> b1(m.hidden_bias.data(), ix(m.hidden));
        f.hidden = ((x * w1.transpose()).rowwise() + b1).array().tanh();
        f.logits = (f.hidden * w2.transpose()).rowwise() + b2;
    } else {
        f.logits = (x * w2.transpose()).rowwise() + b2;
    }
    return f;
}

void check_targets(std::span<const std::size_t> targets, std::size_t rows, std::size_t classes) {
    if (targets.size() != rows) throw Error(kStage, "target count does not match sample count");
    for (auto t : targets) {
        if (t >= classes) throw Error(kStage, "target index out of range");
    }
}

}  // namespace

const char* classifier_kind_name(ClassifierKind kind) {
    return kind == ClassifierKind::OneHiddenLayer ? "one-hidden-layer" : "softmax-linear";
}

ClassifierKind parse_classifier_kind(std::string_view tag) {
    if (tag == "softmax-linear") return ClassifierKind::SoftmaxLinear;
    if (tag == "one-hidden-layer") return ClassifierKind::OneHiddenLayer;
    throw UsageError(kStage, "unknown classifier kind '" + std::string(tag) + "'");
}

std::size_t ClassifierModel::parameter_count() const {
    return hidden_weights.size() + hidden_bias.size() + output_weights.size() + output_bias.size();
}

ClassifierModel init_classifier(std::size_t dimension, std::vector<ClassLabel> class_set,
                                const ClassifierConfig& config) {
    if (class_set.size() < 2) throw Error(kStage, "at least two classes are required");
    std::sort(class_set.begin(), class_set.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    ClassifierModel m;
    m.kind = config.kind;
    m.class_set = std::move(class_set);
    m.dimension = dimension;
    if (config.kind == ClassifierKind::OneHiddenLayer) {
        if (config.hidden == 0) throw Error(kStage, "hidden width must be at least 1");
        m.hidden = config.hidden;
        m.hidden_weights.resize(m.hidden * dimension);
        m.hidden_bias.assign(m.hidden, 0.0);
        const double a = std::sqrt(6.0 / static_cast<double>(dimension + m.hidden));
        Rng rng(mix64(config.seed, 0x68696464656eULL));
        for (auto& w : m.hidden_weights) w = a * (2.0 * unit_interval(rng()) - 1.0);
    }
    m.output_weights.assign(m.num_classes() * input_width(m), 0.0);
    m.output_bias.assign(m.num_classes(), 0.0);
    m.meta.learning_rate = config.learning_rate;
    m.meta.seed = config.seed;
    return m;
}

std::vector<double> flatten_parameters(const ClassifierModel& m) {
    std::vector<double> p;
    p.reserve(m.parameter_count());
    p.insert(p.end(), m.hidden_weights.begin(), m.hidden_weights.end());
    p.insert(p.end(), m.hidden_bias.begin(), m.hidden_bias.end());
    p.insert(p.end(), m.output_weights.begin(), m.output_weights.end());
    p.insert(p.end(), m.output_bias.begin(), m.output_bias.end());
    return p;
}

void assign_parameters(ClassifierModel& m, std::span<const double> p) {
    if (p.size() != m.parameter_count()) throw Error(kStage, "parameter vector has the wrong length");
    auto it = p.begin();
    for (auto* block : {&m.hidden_weights, &m.hidden_bias, &m.output_weights, &m.output_bias}) {
        std::copy(it, it + static_cast<std::ptrdiff_t>(block->size()), block->begin());
        it += static_cast<std::ptrdiff_t>(block->size());
    }
}

LossGradient loss_and_gradient(const ClassifierModel& m, const FeatureMatrix& xs,
                               std::span<const std::size_t> targets) {
    if (xs.cols != m.dimension) throw Error(kStage, "feature dimension mismatch");
    if (xs.rows == 0) throw Error(kStage, "empty training batch");
    check_targets(targets, xs.rows, m.num_classes());

    const ConstRowMap x(xs.data.data(), ix(xs.rows), ix(xs.cols));
    const auto f = forward(m, x);
    const RowMatrix logp = log_softmax(f.logits);
    const double n = static_cast<double>(xs.rows);

    LossGradient out;
    RowMatrix dz = logp.array().exp();
    for (std::size_t i = 0; i < xs.rows; ++i) {
        out.loss -= logp(ix(i), ix(targets[i]));
        dz(ix(i), ix(targets[i])) -= 1.0;
    }
    out.loss /= n;
    dz /= n;

    const RowMatrix& input = m.kind == ClassifierKind::OneHiddenLayer ? f.hidden : RowMatrix(x);
    const RowMatrix dw2 = dz.transpose() * input;
    const Eigen::RowVectorXd db2 = dz.colwise().sum();

    out.gradient.reserve(m.parameter_count());
    if (m.kind == ClassifierKind::OneHiddenLayer) {
        const Eigen::Map<const RowMatrix> w2(m.output_weights.data(), ix(m.num_classes()), ix(m.hidden));
        const RowMatrix dh = dz * w2;
        const RowMatrix da = dh.array() * (1.0 - f.hidden.array().square());
        const RowMatrix dw1 = da.transpose() * x;
        const Eigen::RowVectorXd db1 = da.colwise().sum();
        out.gradient.insert(out.gradient.end(), dw1.data(), dw1.data() + dw1.size());
        out.gradient.insert(out.gradient.end(), db1.data(), db1.data() + db1.size());
    }
    out.gradient.insert(out.gradient.end(), dw2.data(), dw2.data() + dw2.size());
    out.gradient.insert(out.gradient.end(), db2.data(), db2.data() + db2.size());
    return out;
}

ClassifierModel fit_classifier(const FeatureMatrix& x, std::span<const std::size_t> targets,
                               std::vector<ClassLabel> class_set, const ClassifierConfig& config) {
    if (x.rows == 0) throw Error(kStage, "training set is empty");
    std::vector<ClassId> original;
    for (const auto& c : class_set) original.push_back(c.id);
    auto m = init_classifier(x.cols, class_set, config);

    // init_classifier sorts the class set; remap targets accordingly.
    std::vector<std::size_t> remapped(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] >= original.size()) throw Error(kStage, "target index out of range");
        const ClassId id = original[targets[i]];
        const auto it = std::find_if(m.class_set.begin(), m.class_set.end(), [&](const auto& c) { return c.id == id; });
        remapped[i] = static_cast<std::size_t>(it - m.class_set.begin());
    }
    std::vector<bool> present(m.num_classes(), false);
    for (auto t : remapped) present[t] = true;
    if (std::count(present.begin(), present.end(), true) < 2) {
        throw Error(kStage, "training data contains fewer than two classes");
    }

    auto params = flatten_parameters(m);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto lg = loss_and_gradient(m, x, remapped);
        if (!std::isfinite(lg.loss)) {
            throw Error(kStage, "non-finite loss at epoch " + std::to_string(epoch) + " (learning rate " +
                                    text::format_double(config.learning_rate) + "); lower the learning rate");
        }
        m.meta.loss_curve.push_back(lg.loss);
        for (std::size_t j = 0; j < params.size(); ++j) params[j] -= config.learning_rate * lg.gradient[j];
        assign_parameters(m, params);
    }
    const double final_loss = loss_and_gradient(m, x, remapped).loss;
    if (!std::isfinite(final_loss)) throw Error(kStage, "non-finite loss after training");
    m.meta.loss_curve.push_back(final_loss);
    m.meta.final_loss = final_loss;
    m.meta.epochs = config.epochs;
    return m;
}

ClassifierModel fit_classifier(const DatasetPartition& partition, const ClassifierConfig& config) {
    if (partition.a_train.empty()) throw Error(kStage, "partition has no training split");
    std::vector<ClassLabel> class_set;
    for (auto id : partition.classes(Group::A)) class_set.push_back(partition.dataset->classes.label(id));
    std::map<ClassId, std::size_t> position;
    for (std::size_t i = 0; i < class_set.size(); ++i) position[class_set[i].id] = i;

    std::vector<std::size_t> targets;
    targets.reserve(partition.a_train.size());
    for (auto i : partition.a_train) {
        const auto& s = partition.sample(i);
        if (!s.label || !position.count(*s.label)) {
            throw Error(kStage, "training sample " + std::to_string(s.id) + " is not from a known class");
        }
        targets.push_back(position[*s.label]);
    }
    return fit_classifier(gather_features(*partition.dataset, partition.a_train), targets, std::move(class_set), config);
}

PredictionDistribution predict_proba(const ClassifierModel& m, std::span<const double> x) {
    if (x.size() != m.dimension) {
        throw Error(kStage, "feature dimension mismatch: model expects " + std::to_string(m.dimension) + ", got " +
                                std::to_string(x.size()));
    }
    const ConstRowMap xm(x.data(), 1, ix(x.size()));
    const auto f = forward(m, xm);
    const RowMatrix logp = log_softmax(f.logits);
    PredictionDistribution p;
    p.probs.resize(m.num_classes());
    double sum = 0.0;
    for (std::size_t k = 0; k < p.probs.size(); ++k) {
        p.probs[k] = std::exp(logp(0, ix(k)));
        sum += p.probs[k];
    }
    for (auto& v : p.probs) v /= sum;
    return p;
}

ClassLabel predict_label(const ClassifierModel& m, std::span<const double> x) {
    return m.class_set[predict_proba(m, x).argmax()];
}

double evaluate_classifier(const ClassifierModel& m, const Dataset& dataset, std::span<const std::size_t> indices,
                           EvalScope scope) {
    std::size_t total = 0;
    std::size_t correct = 0;
    for (auto i : indices) {
        const auto& s = dataset.samples.at(i);
        if (!s.label) throw Error(kStage, "evaluation sample " + std::to_string(s.id) + " has no label");
        const bool known = std::any_of(m.class_set.begin(), m.class_set.end(),
                                       [&](const auto& c) { return c.id == *s.label; });
        if (!known && scope == EvalScope::KnownOnly) continue;
        ++total;
        if (known && predict_label(m, s.features).id == *s.label) ++correct;
    }
    if (total == 0) throw Error(kStage, "evaluation set is empty");
    return static_cast<double>(correct) / static_cast<double>(total);
}

std::string training_curve_csv(const ClassifierModel& m) {
    std::string out = "epoch,loss\n";
    for (std::size_t e = 0; e < m.meta.loss_curve.size(); ++e) {
        out += std::to_string(e) + "," + text::format_double(m.meta.loss_curve[e]) + "\n";
    }
    return out;
}

}  // namespace a2c
