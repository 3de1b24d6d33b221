#include <doctest.h>

#include <cmath>
#include <numeric>

#include "a2c/classifier.hpp"
#include "a2c/error.hpp"
#include "support/fixtures.hpp"

using namespace a2c;

namespace {

std::vector<ClassLabel> labels(std::size_t k) {
    std::vector<ClassLabel> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back({static_cast<ClassId>(i), "k" + std::to_string(i)});
    return out;
}

struct Problem {
    FeatureMatrix x;
    std::vector<std::size_t> y;
};

Problem random_problem(Rng& rng, std::size_t n, std::size_t d, std::size_t k) {
    Problem p{{n, d, {}}, {}};
    for (std::size_t i = 0; i < n * d; ++i) p.x.data.push_back(standard_normal(rng));
    for (std::size_t i = 0; i < n; ++i) p.y.push_back(i % k);
    return p;
}

double max_relative_gradient_error(ClassifierModel m, const Problem& p) {
    auto params = flatten_parameters(m);
    const auto analytic = loss_and_gradient(m, p.x, p.y).gradient;
    double worst = 0.0;
    const double h = 1e-6;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto plus = params, minus = params;
        plus[i] += h;
        minus[i] -= h;
        assign_parameters(m, plus);
        const double lp = loss_and_gradient(m, p.x, p.y).loss;
        assign_parameters(m, minus);
        const double lm = loss_and_gradient(m, p.x, p.y).loss;
        const double numeric = (lp - lm) / (2 * h);
        const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
        worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
    }
    return worst;
}

}  // namespace

TEST_CASE("zero weights give uniform predictions and ln K loss") {
    ClassifierConfig cfg;
    cfg.epochs = 0;
    Rng rng(1);
    const auto p = random_problem(rng, 30, 4, 3);
    const auto m = fit_classifier(p.x, p.y, labels(3), cfg);
    CHECK(m.meta.final_loss == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    const auto probs = predict_proba(m, p.x.row(0)).probs;
    for (double v : probs) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("hand-set two-class softmax") {
    auto m = init_classifier(2, labels(2), {});
    m.output_weights = {1, 0, 0, 0};
    const auto p = predict_proba(m, std::vector<double>{1, 0}).probs;
    CHECK(p[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(1.0 / (std::exp(1.0) + 1.0)).epsilon(1e-15));
    CHECK(p[0] == doctest::Approx(0.7311).epsilon(1e-4));
}

TEST_CASE("probabilities are normalized, also for extreme inputs") {
    Rng rng(2);
    const auto p = random_problem(rng, 60, 5, 4);
    for (auto kind : {ClassifierKind::SoftmaxLinear, ClassifierKind::OneHiddenLayer}) {
        ClassifierConfig cfg;
        cfg.kind = kind;
        cfg.epochs = 20;
        cfg.hidden = 6;
        const auto m = fit_classifier(p.x, p.y, labels(4), cfg);
        for (int t = 0; t < 1000; ++t) {
            const auto x = testing::random_vector(rng, 5, t % 10 == 0 ? 1e3 : 1.0);
            const auto probs = predict_proba(m, x).probs;
            const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("analytic gradients match central differences") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = random_problem(rng, 12, 3, 3);
        for (auto kind : {ClassifierKind::SoftmaxLinear, ClassifierKind::OneHiddenLayer}) {
            ClassifierConfig cfg;
            cfg.kind = kind;
            cfg.hidden = 4;
            cfg.seed = static_cast<std::uint64_t>(trial);
            auto m = init_classifier(3, labels(3), cfg);
            auto params = flatten_parameters(m);
            for (auto& v : params) v = 0.5 * standard_normal(rng);
            assign_parameters(m, params);
            CHECK(max_relative_gradient_error(m, p) < 1e-4);
        }
    }
}

TEST_CASE("softmax-linear separates well-separated classes") {
    const auto part = testing::gaussian_partition(4, 0, 0, 100, 8.0, 5);
    ClassifierConfig cfg;
    cfg.epochs = 200;
    const auto m = fit_classifier(part, cfg);
    CHECK(evaluate_classifier(m, *part.dataset, part.a_train, EvalScope::KnownOnly) >= 0.99);
    CHECK(m.meta.loss_curve.size() == 201);
    CHECK(m.meta.loss_curve.back() < m.meta.loss_curve.front());
    CHECK(training_curve_csv(m).rfind("epoch,loss\n0,", 0) == 0);
}

TEST_CASE("training is deterministic per seed") {
    const auto part = testing::gaussian_partition(3, 0, 0, 40, 3.0, 8);
    ClassifierConfig cfg;
    cfg.kind = ClassifierKind::OneHiddenLayer;
    cfg.epochs = 30;
    cfg.hidden = 5;
    cfg.seed = 99;
    const auto a = fit_classifier(part, cfg);
    const auto b = fit_classifier(part, cfg);
    CHECK(flatten_parameters(a) == flatten_parameters(b));
    cfg.seed = 100;
    CHECK(flatten_parameters(fit_classifier(part, cfg)) != flatten_parameters(a));
}

TEST_CASE("full-set micro-F1 counts unknown classes as wrong") {
    const auto part = testing::gaussian_partition(2, 1, 0, 50, 6.0, 12);
    ClassifierConfig cfg;
    cfg.epochs = 100;
    const auto m = fit_classifier(part, cfg);
    CHECK(evaluate_classifier(m, *part.dataset, part.d_b(), EvalScope::Full) == 0.0);
    const auto eval = part.evaluation_indices();
    const double known = evaluate_classifier(m, *part.dataset, part.a_test, EvalScope::KnownOnly);
    const double full = evaluate_classifier(m, *part.dataset, eval, EvalScope::Full);
    CHECK(full == doctest::Approx(known * part.a_test.size() / eval.size()).epsilon(1e-12));
}

TEST_CASE("training errors") {
    Rng rng(4);
    auto p = random_problem(rng, 10, 2, 1);
    CHECK_THROWS_AS(fit_classifier(p.x, p.y, labels(1), {}), Error);
    p = random_problem(rng, 10, 2, 2);
    for (auto& v : p.x.data) v *= 1e200;
    ClassifierConfig cfg;
    cfg.learning_rate = 1e300;
    cfg.epochs = 5;
    try {
        fit_classifier(p.x, p.y, labels(2), cfg);
        FAIL("expected divergence");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("learning rate") != std::string::npos);
    }
}
