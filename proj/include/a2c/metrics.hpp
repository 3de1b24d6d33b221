#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "a2c/coex.hpp"
#include "a2c/data.hpp"
#include "a2c/pipeline.hpp"

namespace a2c {

/// (true label, predicted label or nullopt for Caution).
using LabelPair = std::pair<std::optional<ClassId>, std::optional<ClassId>>;

/// Single-label micro-F1, i.e. correct / total. Caution is always wrong.
double micro_f1(std::span<const LabelPair> pairs);

struct ComponentRates {
    double p_acc_A = 0.0;  // accepted share of a_test
    double p_def_B = 0.0;  // deferred share of D_B
    double p_def_C = 0.0;  // deferred share of D_C
    double a_known = 0.0;  // classifier accuracy on accepted a_test
};

struct GroupSizes {
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    std::size_t n_c = 0;

    std::size_t total() const { return n_a + n_b + n_c; }
};

/// Closed-form expected micro-F1 of the routed pipeline:
///   n_A [p_acc a_known + (1 - p_acc) e_A] + n_B p_def_B e_B + n_C p_def_C e_C
/// divided by the total, with e_g = 1 when the tier covers group g and
/// resolve_probability(rate) otherwise. Accepted unknowns score 0.
double expected_grid_oracle(const ComponentRates& rates, const GroupSizes& sizes, int tier, RateLevel rate);

enum class DrawSchedule {
    /// Independent keyed uniforms per sample id.
    Stochastic,
    /// Within each group's deferred samples, draws are (k + 0.5) / m in a
    /// seed-keyed order, so exactly rho*m resolve whenever rho*m is whole.
    Stratified,
};

struct GridOptions {
    std::vector<int> tiers = {1, 2, 3};
    std::vector<RateLevel> rates = {RateLevel::None, RateLevel::R1, RateLevel::R2, RateLevel::R3, RateLevel::R4};
    std::uint64_t seed = 0;
    DrawSchedule schedule = DrawSchedule::Stochastic;
};

struct GridCell {
    double micro_f1 = 0.0;
    std::size_t n_eval = 0;
    std::size_t correct = 0;
};

struct GridResult {
    std::map<std::pair<int, RateLevel>, GridCell> cells;
    ComponentRates rates;
    GroupSizes sizes;
    std::uint64_t seed = 0;
    DrawSchedule schedule = DrawSchedule::Stochastic;

    const GridCell& at(int tier, RateLevel rate) const;
};

/// Evaluates every (tier, rate) cell on a_test + D_B + D_C with the shared
/// rejector and classifier from `components` and one draw table. rate none
/// uses deferral mode; the others use collaborative mode.
GridResult run_grid(const DatasetPartition& partition, const PipelineComponents& components,
                    const GridOptions& options);

enum class ReportFormat { Csv, Markdown };

ReportFormat parse_report_format(std::string_view tag);

/// Grid: CSV `tier,rate_level,micro_f1,n_eval,p_acc_A,p_def_B,p_def_C,a_known`
/// or a markdown table with tiers as rows and rate levels as columns.
std::string render_report(const GridResult& result, ReportFormat format);

/// Run: CSV `sample_id,true,predicted,stage,s_i` or a markdown summary.
std::string render_report(const RunReport& report, ReportFormat format, const ClassRegistry* names = nullptr);

/// Summary document: mode, tier, rate, micro-F1 and stage histogram.
std::string render_summary(const RunReport& report);

}  // namespace a2c
