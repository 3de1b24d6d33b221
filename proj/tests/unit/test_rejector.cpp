#include <doctest.h>

#include <cmath>
#include <limits>

#include "a2c/error.hpp"
#include "a2c/rejector.hpp"
#include "support/fixtures.hpp"

using namespace a2c;

namespace {

FeatureMatrix matrix(std::vector<std::vector<double>> rows) {
    FeatureMatrix m{rows.size(), rows.empty() ? 0 : rows[0].size(), {}};
    for (const auto& r : rows) m.data.insert(m.data.end(), r.begin(), r.end());
    return m;
}

FeatureMatrix gaussian_cloud(Rng& rng, std::size_t n, std::size_t d, double shift = 0.0) {
    FeatureMatrix m{n, d, {}};
    for (std::size_t i = 0; i < n * d; ++i) m.data.push_back(standard_normal(rng) + shift);
    return m;
}

}  // namespace

TEST_CASE("centroid scorer") {
    auto m = fit_rejector(matrix({{0, 0}, {2, 2}}), ScorerKind::Centroid);
    CHECK(m.center == std::vector<double>{1, 1});
    CHECK(acceptance_score(m, std::vector<double>{1, 1}) == 0.0);
    CHECK(acceptance_score(m, std::vector<double>{4, 5}) == doctest::Approx(-5.0).epsilon(1e-15));
    CHECK_THROWS_AS(acceptance_score(m, std::vector<double>{1, 1, 1}), Error);
}

TEST_CASE("pca scorer recovers a line exactly") {
    std::vector<std::vector<double>> rows;
    for (int i = -5; i <= 5; ++i) rows.push_back({1.0 + 2.0 * i, -1.0 + 1.0 * i, 3.0 - 2.0 * i});
    const auto m = fit_rejector(matrix(rows), ScorerKind::PcaReconstruction, {5, 1});
    REQUIRE(m.basis.size() == 3);
    const double norm = 3.0;
    const double cosine = std::abs(m.basis[0] * 2 + m.basis[1] * 1 + m.basis[2] * -2) / norm;
    CHECK(cosine == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& r : rows) CHECK(std::abs(acceptance_score(m, r)) < 1e-9);
    CHECK(std::abs(acceptance_score(m, std::vector<double>{1.0 + 2.0 * 7.5, -1.0 + 7.5, 3.0 - 15.0})) < 1e-9);
    CHECK(acceptance_score(m, std::vector<double>{0, 10, 0}) < -1.0);
    CHECK_THROWS_AS(fit_rejector(matrix(rows), ScorerKind::PcaReconstruction, {5, 4}), Error);
}

TEST_CASE("pca residual equals brute-force distance to the fitted subspace") {
    Rng rng(3);
    const std::size_t d = 6, comps = 2;
    const auto train = gaussian_cloud(rng, 200, d);
    const auto m = fit_rejector(train, ScorerKind::PcaReconstruction, {5, comps});
    for (std::size_t c = 0; c < comps; ++c) {
        for (std::size_t e = 0; e < comps; ++e) {
            double dot = 0;
            for (std::size_t j = 0; j < d; ++j) dot += m.basis[c * d + j] * m.basis[e * d + j];
            CHECK(dot == doctest::Approx(c == e ? 1.0 : 0.0).epsilon(1e-10));
        }
    }
    for (int trial = 0; trial < 10; ++trial) {
        const auto x = testing::random_vector(rng, d, 2.0);
        // Brute force: minimize |x - mean - B^T a| over a grid refinement of coefficients.
        std::vector<double> centered(d);
        for (std::size_t j = 0; j < d; ++j) centered[j] = x[j] - m.center[j];
        double best = std::numeric_limits<double>::infinity();
        double a0 = 0, a1 = 0;
        for (double step = 1.0; step > 1e-7; step /= 4) {
            double ba0 = a0, ba1 = a1;
            for (int i = -8; i <= 8; ++i) {
                for (int k = -8; k <= 8; ++k) {
                    const double c0 = a0 + i * step, c1 = a1 + k * step;
                    double r = 0;
                    for (std::size_t j = 0; j < d; ++j) {
                        const double v = centered[j] - c0 * m.basis[j] - c1 * m.basis[d + j];
                        r += v * v;
                    }
                    if (r < best) best = r, ba0 = c0, ba1 = c1;
                }
            }
            a0 = ba0, a1 = ba1;
        }
        CHECK(-acceptance_score(m, x) == doctest::Approx(std::sqrt(best)).epsilon(1e-6));
    }
}

TEST_CASE("knn scorer stores references and ignores training order") {
    Rng rng(9);
    auto train = gaussian_cloud(rng, 100, 3);
    const auto m = fit_rejector(train, ScorerKind::KnnDistance, {1, 1});
    CHECK(m.reference_count() == 100);

    auto shuffled = train;
    std::vector<std::size_t> order(100);
    for (std::size_t i = 0; i < 100; ++i) order[i] = i;
    shuffle(order, rng);
    for (std::size_t i = 0; i < 100; ++i) {
        std::copy_n(train.data.begin() + order[i] * 3, 3, shuffled.data.begin() + i * 3);
    }
    const auto m5 = fit_rejector(train, ScorerKind::KnnDistance, {5, 1});
    const auto s5 = fit_rejector(shuffled, ScorerKind::KnnDistance, {5, 1});
    for (int t = 0; t < 20; ++t) {
        const auto x = testing::random_vector(rng, 3);
        CHECK(acceptance_score(m5, x) == doctest::Approx(acceptance_score(s5, x)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(fit_rejector(train, ScorerKind::KnnDistance, {100, 1}), Error);
    CHECK_THROWS_AS(fit_rejector(FeatureMatrix{}, ScorerKind::Centroid), Error);
}

TEST_CASE("scores decrease monotonically away from the data and are translation equivariant") {
    Rng rng(21);
    const auto train = gaussian_cloud(rng, 150, 4);
    for (auto kind : {ScorerKind::Centroid, ScorerKind::KnnDistance, ScorerKind::PcaReconstruction}) {
        CAPTURE(scorer_name(kind));
        const auto m = fit_rejector(train, kind, {5, 2});
        auto dir = testing::random_vector(rng, 4);
        if (kind == ScorerKind::PcaReconstruction) {
            // Step orthogonally to the fitted subspace.
            for (std::size_t c = 0; c < 2; ++c) {
                double dot = 0;
                for (std::size_t j = 0; j < 4; ++j) dot += dir[j] * m.basis[c * 4 + j];
                for (std::size_t j = 0; j < 4; ++j) dir[j] -= dot * m.basis[c * 4 + j];
            }
        }
        double prev = std::numeric_limits<double>::infinity();
        for (double t = 5.0; t <= 50.0; t += 5.0) {
            std::vector<double> x(4);
            for (std::size_t j = 0; j < 4; ++j) x[j] = (kind == ScorerKind::Centroid ? 0.0 : m.center.empty() ? 0.0 : m.center[j]) + t * dir[j];
            const double s = acceptance_score(m, x);
            CHECK(s < prev);
            prev = s;
        }

        auto moved = train;
        const std::vector<double> shift = {3.0, -7.0, 0.5, 11.0};
        for (std::size_t i = 0; i < moved.rows; ++i) {
            for (std::size_t j = 0; j < 4; ++j) moved.data[i * 4 + j] += shift[j];
        }
        const auto mm = fit_rejector(moved, kind, {5, 2});
        for (int t = 0; t < 5; ++t) {
            auto x = testing::random_vector(rng, 4, 3.0);
            auto y = x;
            for (std::size_t j = 0; j < 4; ++j) y[j] += shift[j];
            CHECK(acceptance_score(mm, y) == doctest::Approx(acceptance_score(m, x)).epsilon(1e-9));
        }
    }
}

TEST_CASE("threshold calibration by linear-interpolated quantile") {
    RejectorModel m;
    m = calibrate_threshold_from_scores(m, {-1, -2, -3, -4}, 0.25);
    CHECK(*m.theta_r == doctest::Approx(-3.25).epsilon(1e-15));
    int accepted = 0;
    for (double s : {-1.0, -2.0, -3.0, -4.0}) accepted += s > *m.theta_r;
    CHECK(accepted == 3);

    m = calibrate_threshold_from_scores(m, {-1, -2, -3, -4}, 1e-9);
    CHECK(*m.theta_r < -3.999);

    m = calibrate_threshold_from_scores(m, {-2, -2, -2}, 0.05);
    CHECK(*m.theta_r == -2.0);
    CHECK_THROWS_AS(calibrate_threshold_from_scores(m, {-1, -2}, 0.0), Error);
    CHECK_THROWS_AS(calibrate_threshold_from_scores(m, {}, 0.1), Error);
    CHECK(linear_quantile({3, 1, 2}, 0.5) == 2.0);
}

TEST_CASE("strict acceptance rule") {
    auto m = fit_rejector(matrix({{0, 0}, {2, 2}}), ScorerKind::Centroid);
    CHECK_THROWS_AS(reject_decide(m, std::vector<double>{1, 1}), Error);
    m.theta_r = -std::sqrt(2.0);
    CHECK(reject_decide(m, std::vector<double>{1, 1}).value == RejectVerdict::Accept);
    CHECK(reject_decide(m, std::vector<double>{2, 2}).value == RejectVerdict::Defer);
    m.theta_r = -0.5;
    const auto d = reject_decide(m, std::vector<double>{1.0, 1.5});
    CHECK(d.score == -0.5);
    CHECK(d.value == RejectVerdict::Defer);
}

TEST_CASE("separated clusters: far points defer") {
    const auto p = testing::gaussian_partition(1, 1, 0, 300, 12.0, 4, 0.8, 2);
    auto m = fit_rejector(p, p.a_train, ScorerKind::Centroid);
    m = calibrate_threshold(m, gather_features(*p.dataset, p.a_train), 0.01);
    for (auto i : p.d_b()) CHECK(reject_decide(m, p.sample(i).features).value == RejectVerdict::Defer);
    const auto ev = evaluate_rejector(m, p);
    CHECK(ev.unknown_deferred == ev.unknown_total);
    CHECK(ev.accuracy > 0.97);

    m.theta_r = std::numeric_limits<double>::infinity();
    const auto all = evaluate_rejector(m, p);
    CHECK(all.accuracy == doctest::Approx(300.0 / 360.0));
    CHECK_THROWS_AS(fit_rejector(p, p.d_b(), ScorerKind::Centroid), Error);
}
