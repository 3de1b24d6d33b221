#include <doctest.h>

#include <fstream>

#include "a2c/error.hpp"
#include "a2c/persistence.hpp"
#include "support/fixtures.hpp"

using namespace a2c;

namespace {

const DatasetPartition& part() {
    static const auto p = testing::gaussian_partition(3, 1, 1, 60, 4.0, 31);
    return p;
}

}  // namespace

TEST_CASE("classifier round trip keeps predictions bit-identical") {
    const auto dir = testing::scratch_dir("persist-classifier");
    for (auto kind : {ClassifierKind::SoftmaxLinear, ClassifierKind::OneHiddenLayer}) {
        ClassifierConfig cfg;
        cfg.kind = kind;
        cfg.epochs = 40;
        cfg.hidden = 7;
        const auto m = fit_classifier(part(), cfg);
        const auto path = dir / "c.model";
        save_model(m, path);
        const auto back = load_classifier(path);
        CHECK(serialize_model(back) == serialize_model(m));
        CHECK(back.class_set == m.class_set);
        Rng rng(5);
        for (int i = 0; i < 100; ++i) {
            const auto x = testing::random_vector(rng, m.dimension, 3.0);
            CHECK(predict_proba(back, x).probs == predict_proba(m, x).probs);
        }
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("rejector round trip for every scorer") {
    const auto dir = testing::scratch_dir("persist-rejector");
    for (auto kind : {ScorerKind::Centroid, ScorerKind::KnnDistance, ScorerKind::PcaReconstruction}) {
        auto m = fit_rejector(part(), part().a_train, kind, {3, 2});
        if (kind != ScorerKind::Centroid) m = calibrate_threshold(m, gather_features(*part().dataset, part().a_train), 0.1);
        save_model(m, dir / "r.model");
        const auto back = load_rejector(dir / "r.model");
        CHECK(back.theta_r == m.theta_r);
        Rng rng(6);
        for (int i = 0; i < 50; ++i) {
            const auto x = testing::random_vector(rng, m.dimension, 3.0);
            CHECK(acceptance_score(back, x) == acceptance_score(m, x));
        }
    }
    CHECK_THROWS_AS(load_classifier(dir / "r.model"), UsageError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("damaged model files") {
    const auto m = fit_rejector(part(), part().a_train, ScorerKind::Centroid);
    const auto text = serialize_model(m);
    CHECK(text.rfind("A2CMODL1\nkind = rejector\nchecksum = ", 0) == 0);

    CHECK_THROWS_AS(parse_model(text.substr(0, text.size() / 2)), CorruptionError);
    CHECK_THROWS_AS(parse_model(text.substr(0, 4)), CorruptionError);

    auto flipped = text;
    flipped[flipped.size() - 3] = flipped[flipped.size() - 3] == '1' ? '2' : '1';
    CHECK_THROWS_AS(parse_model(flipped), CorruptionError);

    auto v9 = text;
    v9.replace(0, 8, "A2CMODL9");
    CHECK_THROWS_AS(parse_model(v9), VersionError);

    auto kind = text;
    kind.replace(kind.find("rejector"), 8, "ensemble");
    CHECK_THROWS_AS(parse_model(kind), VersionError);

    CHECK_THROWS_AS(parse_model("PK\x03\x04 not a model at all"), CorruptionError);
    CHECK_THROWS_AS(load_model("/nonexistent/model"), Error);
}
