#include <doctest.h>

#include <cmath>

#include "a2c/coex.hpp"
#include "a2c/error.hpp"
#include "a2c/expert.hpp"
#include "support/fixtures.hpp"

using namespace a2c;

namespace {

std::shared_ptr<const Dataset> named(const std::vector<std::string>& names) {
    auto ds = std::make_shared<Dataset>();
    ds->feature_names = {"x"};
    auto sorted = names;
    std::sort(sorted.begin(), sorted.end());
    ds->classes = ClassRegistry(sorted);
    SampleId id = 0;
    for (const auto& n : names) ds->samples.push_back({id++, {0.0}, ds->classes.find(n)});
    return ds;
}

std::set<std::string> known_names(const ExpertProfile& e, const Dataset& ds) {
    std::set<std::string> out;
    for (auto id : e.known_classes) out.insert(ds.classes.name(id));
    return out;
}

}  // namespace

TEST_CASE("competence tiers follow the class groups") {
    const auto ds = named({"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"});
    const auto p = partition_dataset(ds, mnist_assignment(), {});
    CHECK(known_names(build_expert(1, p), *ds) == std::set<std::string>{"0", "2", "4", "6", "8"});
    CHECK(known_names(build_expert(2, p), *ds) == std::set<std::string>{"1", "3", "5"});
    CHECK(build_expert(3, p).known_classes.size() == 8);
    CHECK_THROWS_AS(build_expert(4, p), UsageError);

    const auto p_empty_b = partition_dataset(ds, {{"0", "2"}, {}, {"7"}}, {});
    CHECK(build_expert(2, p_empty_b).known_classes.empty());
}

TEST_CASE("KDD tier 3 knows 15 classes") {
    std::vector<std::string> names;
    for (const auto& g : {kdd_assignment().a, kdd_assignment().b, kdd_assignment().c}) {
        names.insert(names.end(), g.begin(), g.end());
    }
    const auto p = partition_dataset(named(names), kdd_assignment(), {});
    CHECK(build_expert(3, p).known_classes.size() == 15);
}

TEST_CASE("expert labels known classes and escalates the rest") {
    const auto ds = named({"a", "b", "c"});
    const auto p = partition_dataset(ds, {{"a"}, {"b"}, {"c"}}, {});
    const ExpertContext ctx;
    const auto& a = ds->samples[0];
    const auto& c = ds->samples[2];
    CHECK(expert_decide(build_expert(1, p), a, ctx).label == a.label);
    CHECK(expert_decide(build_expert(2, p), a, ctx).escalated());
    CHECK(expert_decide(build_expert(3, p), c, ctx).escalated());
    Sample unlabeled{9, {0.0}, std::nullopt};
    CHECK_THROWS_AS(expert_decide(build_expert(3, p), unlabeled, ctx), Error);
}

TEST_CASE("CoEx resolution thresholds the draw") {
    Sample s{1, {0.0}, ClassId{4}};
    CHECK_THROWS_AS(resolve_coex(s, {RateLevel::None, 0}, 0.1), Error);
    for (double draw : {0.0, 0.5, 0.999999}) {
        const auto d = resolve_coex(s, {RateLevel::R4, 0}, draw);
        CHECK(d.predicted == ClassId{4});
        CHECK(d.stage == Stage::CoexResolved);
        CHECK(d.score == 1.0);
    }
    const auto first = resolve_coex(s, {RateLevel::R1, 0}, 0.3);
    const auto second = resolve_coex(s, {RateLevel::R1, 0}, 0.7);
    CHECK(first.correct());
    CHECK_FALSE(second.predicted);
    CHECK(second.stage == Stage::CoexUnresolved);
    CHECK(second.score == 0.0);
    CHECK_THROWS_AS(resolve_coex(s, {RateLevel::R1, 0}, 1.0), Error);
}

TEST_CASE("rate levels") {
    CHECK(resolve_probability(RateLevel::R1) == 0.5);
    CHECK(resolve_probability(RateLevel::R2) == 0.75);
    CHECK(resolve_probability(RateLevel::R3) == 0.9);
    CHECK(resolve_probability(RateLevel::R4) == 1.0);
    CHECK(parse_rate_level("none") == RateLevel::None);
    CHECK(parse_rate_level("3") == RateLevel::R3);
    CHECK_THROWS_AS(parse_rate_level("5"), UsageError);
}

TEST_CASE("Bayes update arithmetic") {
    auto s = uniform_beliefs({0, 1});
    const auto same = bayes_update(s, {"u", {0.3, 0.3}, {0.7, 0.7}});
    CHECK(same.expert == s.expert);
    CHECK(same.collaborator == s.collaborator);

    const auto post = bayes_update(s, {"e", {0.9, 0.1}, {0.9, 0.1}});
    CHECK(post.expert[0] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(post.expert[1] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(post.evidence_log.size() == 1);

    CHECK_THROWS_AS(bayes_update(bayes_update(s, {"x", {1, 0}, {1, 0}}), {"y", {0, 1}, {0, 1}}), Error);
    CHECK_THROWS_AS(bayes_update(s, {"z", {1, 0, 0}, {1, 0}}), Error);
}

TEST_CASE("sequential updates equal one product update") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        auto s = uniform_beliefs({0, 1, 2, 3});
        auto e1 = testing::random_vector(rng, 4), e2 = testing::random_vector(rng, 4);
        auto c1 = testing::random_vector(rng, 4), c2 = testing::random_vector(rng, 4);
        for (auto* v : {&e1, &e2, &c1, &c2}) for (auto& x : *v) x = std::abs(x) + 0.01;
        const auto seq = bayes_update(bayes_update(s, {"1", e1, c1}), {"2", e2, c2});
        std::vector<double> pe(4), pc(4);
        for (int i = 0; i < 4; ++i) pe[i] = e1[i] * e2[i], pc[i] = c1[i] * c2[i];
        const auto once = bayes_update(s, {"p", pe, pc});
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(seq.expert[i] - once.expert[i]) < 1e-12);
            CHECK(std::abs(seq.collaborator[i] - once.collaborator[i]) < 1e-12);
        }
    }
}

TEST_CASE("consensus loop") {
    std::vector<Evidence> favor_second(5, Evidence{"9:1", {0.1, 0.9}, {0.1, 0.9}});
    auto r = run_belief_loop(uniform_beliefs({3, 8}), favor_second, 0.9);
    CHECK(r.consensus);
    CHECK(r.label == ClassId{8});
    CHECK(r.iterations <= 2);
    CHECK(belief_trace_csv(r).rfind("iteration,candidate,expert_prob,collaborator_prob\n", 0) == 0);

    auto agreed = uniform_beliefs({0, 1});
    agreed.expert = {0.95, 0.05};
    agreed.collaborator = {0.92, 0.08};
    r = run_belief_loop(agreed, {}, 0.9);
    CHECK(r.consensus);
    CHECK(r.iterations == 0);
    CHECK(r.label == ClassId{0});

    auto split = uniform_beliefs({0, 1});
    split.expert = {0.2, 0.8};
    split.collaborator = {0.8, 0.2};
    r = run_belief_loop(split, favor_second, 0.9, 0);
    CHECK_FALSE(r.consensus);
    CHECK(r.label == ClassId{1});
    CHECK_THROWS_AS(run_belief_loop(split, {}, 0.5), Error);
}
