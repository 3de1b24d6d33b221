#include <doctest.h>

#include <limits>
#include <sstream>

#include "a2c/error.hpp"
#include "a2c/metrics.hpp"
#include "a2c/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace a2c;

namespace {

PipelineComponents trained(const DatasetPartition& p, int tier, RateLevel rate, double q = 0.05) {
    PipelineComponents c;
    c.rejector = calibrate_threshold(fit_rejector(p, p.a_train, ScorerKind::Centroid),
                                     gather_features(*p.dataset, p.a_train), q);
    ClassifierConfig cfg;
    cfg.epochs = 150;
    c.classifier = fit_classifier(p, cfg);
    c.expert = build_expert(tier, p);
    c.coex = {rate, 5};
    return c;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("routing by mode") {
    const auto p = testing::gaussian_partition(2, 1, 1, 100, 14.0, 3);
    auto c = trained(p, 3, RateLevel::R4);
    validate_components(c, p);
    const auto accepted = std::find_if(p.a_test.begin(), p.a_test.end(), [&](std::size_t i) {
        return reject_decide(c.rejector, p.sample(i).features).value == RejectVerdict::Accept;
    });
    REQUIRE(accepted != p.a_test.end());
    const auto& known = p.sample(*accepted);
    const auto& unknown_c = p.sample(p.d_c().front());
    const auto& unknown_b = p.sample(p.d_b().front());

    for (auto mode : {Mode::Automation, Mode::Deferral, Mode::Collaborative}) {
        const auto d = route_sample(c, mode, known, 0.3);
        CHECK(d.stage == Stage::Classifier);
        CHECK(d.correct());
    }
    auto d = route_sample(c, Mode::Deferral, unknown_c, 0.3);
    CHECK(d.stage == Stage::Expert);
    CHECK_FALSE(d.predicted);
    CHECK(d.score == 0.0);
    d = route_sample(c, Mode::Collaborative, unknown_c, 0.3);
    CHECK(d.stage == Stage::CoexResolved);
    CHECK(d.correct());
    d = route_sample(c, Mode::Deferral, unknown_b, 0.3);
    CHECK(d.stage == Stage::Expert);
    CHECK(d.correct());
    CHECK(d.context.has_value());
    d = route_sample(c, Mode::Automation, unknown_b, 0.3);
    CHECK_FALSE(d.correct());

    c.coex.rate_level = RateLevel::None;
    CHECK_THROWS_AS(route_sample(c, Mode::Collaborative, unknown_c, 0.3), UsageError);
    CHECK_THROWS_AS(parse_mode("manual"), UsageError);
}

TEST_CASE("component validation") {
    const auto p = testing::gaussian_partition(2, 1, 1, 50, 8.0, 3);
    auto c = trained(p, 1, RateLevel::R1);
    c.rejector.theta_r.reset();
    CHECK_THROWS_AS(validate_components(c, p), InvariantError);
    c = trained(p, 1, RateLevel::R1);
    c.expert.known_classes.insert(p.classes(Group::C).front());
    CHECK_THROWS_AS(validate_components(c, p), InvariantError);
}

TEST_CASE("perfect components at t=3, r=4 score 1 and runs are reproducible") {
    const auto p = testing::gaussian_partition(2, 2, 2, 60, 16.0, 9);
    const auto c = trained(p, 3, RateLevel::R4, 0.001);
    const auto eval = p.evaluation_indices();
    const auto r1 = run_mode(c, Mode::Collaborative, *p.dataset, eval, 4);
    CHECK(r1.micro_f1 == 1.0);
    const auto r2 = run_mode(c, Mode::Collaborative, *p.dataset, eval, 4);
    CHECK(render_report(r1, ReportFormat::Csv) == render_report(r2, ReportFormat::Csv));
    CHECK(render_summary(r1) == render_summary(r2));

    const auto automation = run_mode(c, Mode::Automation, *p.dataset, eval, 4);
    CHECK(automation.micro_f1 == doctest::Approx(static_cast<double>(p.a_test.size()) / eval.size()));
    CHECK_THROWS_AS(run_mode(c, Mode::Automation, *p.dataset, {}, 4), Error);
}

TEST_CASE("micro-F1") {
    std::vector<LabelPair> all = {{1, 1}, {2, 2}};
    CHECK(micro_f1(all) == 1.0);
    std::vector<LabelPair> three = {{1, 1}, {2, 2}, {3, 3}, {4, std::nullopt}};
    CHECK(micro_f1(three) == 0.75);
    CHECK_THROWS_AS(micro_f1(std::vector<LabelPair>{}), Error);
}

TEST_CASE("grid oracle arithmetic") {
    const ComponentRates perfect{1, 1, 1, 1};
    const GroupSizes n{100, 100, 100};
    CHECK(expected_grid_oracle(perfect, n, 3, RateLevel::None) == doctest::Approx(2.0 / 3.0));
    CHECK(expected_grid_oracle(perfect, n, 3, RateLevel::R4) == 1.0);
    CHECK(expected_grid_oracle(perfect, n, 2, RateLevel::None) == doctest::Approx(2.0 / 3.0));
    const ComponentRates all_deferred{0, 1, 1, 1};
    CHECK(expected_grid_oracle(all_deferred, n, 2, RateLevel::None) == doctest::Approx(1.0 / 3.0));
    CHECK(expected_grid_oracle(all_deferred, n, 1, RateLevel::None) == doctest::Approx(1.0 / 3.0));
    CHECK(expected_grid_oracle(all_deferred, n, 1, RateLevel::R1) == doctest::Approx((100 + 50 + 50) / 300.0));
    CHECK_THROWS_AS(expected_grid_oracle(perfect, n, 0, RateLevel::R1), Error);
    CHECK_THROWS_AS(expected_grid_oracle({1.5, 0, 0, 0}, n, 1, RateLevel::R1), Error);
}

TEST_CASE("grid rows rise with the rate and t=3 dominates") {
    const auto p = testing::gaussian_partition(3, 2, 2, 80, 5.0, 21);
    const auto c = trained(p, 1, RateLevel::None);
    GridOptions opt;
    opt.seed = 8;
    const auto g = run_grid(p, c, opt);
    CHECK(g.cells.size() == 15);
    for (int t : {1, 2, 3}) {
        for (std::size_t r = 1; r < 5; ++r) CHECK(g.at(t, kAllRateLevels[r]).micro_f1 >= g.at(t, kAllRateLevels[r - 1]).micro_f1);
    }
    for (auto r : kAllRateLevels) {
        CHECK(g.at(3, r).micro_f1 >= g.at(1, r).micro_f1);
        CHECK(g.at(3, r).micro_f1 >= g.at(2, r).micro_f1);
    }
    CHECK_THROWS_AS(g.at(4, RateLevel::R1), Error);

    const auto csv = render_report(g, ReportFormat::Csv);
    CHECK(lines(csv) == 16);
    CHECK(csv.rfind("tier,rate_level,micro_f1,n_eval,p_acc_A,p_def_B,p_def_C,a_known\n", 0) == 0);
    const auto md = render_report(g, ReportFormat::Markdown);
    CHECK(md.find("| t | r=∅ | r=1 | r=2 | r=3 | r=4 |") != std::string::npos);
    CHECK(md.find("| 3 |") != std::string::npos);
    CHECK_THROWS_AS(render_report(GridResult{}, ReportFormat::Csv), InvariantError);
    CHECK_THROWS_AS(parse_report_format("html"), UsageError);
}

TEST_CASE("without unknown groups and with everything accepted all cells agree") {
    const auto p = testing::gaussian_partition(3, 0, 0, 50, 5.0, 2);
    auto c = trained(p, 1, RateLevel::None);
    c.rejector.theta_r = -std::numeric_limits<double>::infinity();
    const auto g = run_grid(p, c, {});
    const double first = g.cells.begin()->second.micro_f1;
    for (const auto& [key, cell] : g.cells) CHECK(cell.micro_f1 == first);
}

TEST_CASE("run report rendering") {
    const auto p = testing::gaussian_partition(2, 1, 1, 30, 10.0, 6);
    const auto c = trained(p, 3, RateLevel::R2);
    const auto r = run_mode(c, Mode::Collaborative, *p.dataset, p.evaluation_indices(), 1);
    const auto csv = render_report(r, ReportFormat::Csv, &p.dataset->classes);
    CHECK(csv.rfind("sample_id,true,predicted,stage,s_i\n", 0) == 0);
    CHECK(lines(csv) == r.decisions.size() + 1);
    CHECK(render_report(r, ReportFormat::Markdown).find("collaborative") != std::string::npos);
    CHECK(render_summary(r).find("micro_f1 = ") != std::string::npos);
}
