#include "a2c/pipeline.hpp"

#include <algorithm>

#include "a2c/error.hpp"
#include "a2c/metrics.hpp"
#include "a2c/rng.hpp"
#include "a2c/text.hpp"

namespace a2c {
namespace {

constexpr const char* kStage = "pipeline";

}  // namespace

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::Automation: return "automation";
        case Mode::Deferral: return "deferral";
        case Mode::Collaborative: return "collaborative";
    }
    return "?";
}

Mode parse_mode(std::string_view tag) {
    if (tag == "automation") return Mode::Automation;
    if (tag == "deferral") return Mode::Deferral;
    if (tag == "collaborative") return Mode::Collaborative;
    throw UsageError(kStage, "unknown mode '" + std::string(tag) + "' (expected automation, deferral or collaborative)");
}

void validate_components(const PipelineComponents& c, const DatasetPartition& partition) {
    if (!c.rejector.calibrated()) throw InvariantError(kStage, "rejector is not calibrated");
    std::vector<ClassId> ids;
    for (const auto& l : c.classifier.class_set) ids.push_back(l.id);
    if (ids != partition.classes(Group::A)) throw InvariantError(kStage, "classifier class set differs from C_A");
    if (c.expert.known_classes != build_expert(c.expert.tier, partition).known_classes) {
        throw InvariantError(kStage, "expert profile was not built from this partition");
    }
    if (c.rejector.dimension != partition.dataset->dimension() || c.classifier.dimension != partition.dataset->dimension()) {
        throw InvariantError(kStage, "component feature dimension differs from the dataset");
    }
}

Assessment assess(const PipelineComponents& c, const Sample& sample) {
    Assessment a;
    a.reject = reject_decide(c.rejector, sample.features);
    a.probs = predict_proba(c.classifier, sample.features);
    a.predicted = c.classifier.class_set[a.probs.argmax()].id;
    return a;
}

ExpertContext make_expert_context(const PipelineComponents& c, const Assessment& a, const Dataset& dataset) {
    ExpertContext ctx;
    ctx.reject_score = a.reject.score;
    ctx.reject_decision = a.reject;
    ctx.classifier_probs = a.probs;
    ctx.contextual_info.push_back("acceptance score " + text::format_double(a.reject.score) +
                                  (a.reject.value == RejectVerdict::Accept ? " > " : " <= ") + "threshold " +
                                  text::format_double(*c.rejector.theta_r) + " (" + scorer_name(c.rejector.kind) + ")");
    const auto top = a.probs.argmax();
    ctx.side_info.push_back("classifier would predict '" + dataset.classes.name(c.classifier.class_set[top].id) +
                            "' with probability " + text::format_double(a.probs.probs[top]));
    return ctx;
}

Decision route_assessed(const PipelineComponents& c, Mode mode, const Sample& sample, const Assessment& a,
                        double draw, const Dataset* dataset) {
    if (!sample.label) throw Error(kStage, "sample " + std::to_string(sample.id) + " has no label");
    if (mode == Mode::Collaborative && c.coex.rate_level == RateLevel::None) {
        throw UsageError(kStage, "collaborative mode requires a rate level other than none");
    }
    Decision d;
    d.sample_id = sample.id;
    d.truth = sample.label;

    if (mode == Mode::Automation || a.reject.value == RejectVerdict::Accept) {
        d.predicted = a.predicted;
        d.stage = Stage::Classifier;
        d.score = d.correct() ? 1.0 : 0.0;
        return d;
    }

    ExpertContext ctx;
    if (dataset) {
        ctx = make_expert_context(c, a, *dataset);
    } else {
        ctx.reject_score = a.reject.score;
        ctx.reject_decision = a.reject;
        ctx.classifier_probs = a.probs;
    }
    const auto outcome = expert_decide(c.expert, sample, ctx);
    if (!outcome.escalated()) {
        d.predicted = outcome.label;
        d.stage = Stage::Expert;
        d.score = 1.0;
    } else if (mode == Mode::Deferral) {
        d.stage = Stage::Expert;
        d.score = 0.0;
    } else {
        d = resolve_coex(sample, c.coex, draw);
    }
    d.context = std::move(ctx);
    return d;
}

Decision route_sample(const PipelineComponents& c, Mode mode, const Sample& sample, double draw) {
    return route_assessed(c, mode, sample, assess(c, sample), draw);
}

double sample_draw(std::uint64_t seed, SampleId id) { return keyed_uniform(seed, id); }

RunReport run_mode(const PipelineComponents& c, Mode mode, const Dataset& dataset, std::span<const std::size_t> indices,
                   std::uint64_t seed) {
    if (indices.empty()) throw Error(kStage, "sample set is empty");
    RunReport r;
    r.mode = mode;
    r.tier = c.expert.tier;
    r.rate = mode == Mode::Collaborative ? c.coex.rate_level : RateLevel::None;
    r.seed = seed;
    r.decisions.reserve(indices.size());
    for (auto i : indices) {
        const auto& s = dataset.samples.at(i);
        r.decisions.push_back(route_assessed(c, mode, s, assess(c, s), sample_draw(seed, s.id), &dataset));
    }
    std::sort(r.decisions.begin(), r.decisions.end(), [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
    std::vector<LabelPair> pairs;
    pairs.reserve(r.decisions.size());
    for (const auto& d : r.decisions) {
        pairs.push_back({d.truth, d.predicted});
        auto& tally = r.by_stage[d.stage];
        (d.correct() ? tally.correct : tally.incorrect)++;
    }
    r.micro_f1 = micro_f1(pairs);
    r.composition = std::to_string(indices.size()) + " samples";
    return r;
}

}  // namespace a2c
