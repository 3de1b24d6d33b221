#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "a2c/classifier.hpp"
#include "a2c/coex.hpp"
#include "a2c/data.hpp"
#include "a2c/expert.hpp"
#include "a2c/rejector.hpp"

namespace a2c {

enum class Mode { Automation, Deferral, Collaborative };

const char* mode_name(Mode mode);
Mode parse_mode(std::string_view tag);

struct PipelineComponents {
    RejectorModel rejector;
    ClassifierModel classifier;
    ExpertProfile expert;
    CoExConfig coex;
};

/// Rejector calibrated, classifier class set equal to C_A, expert built from
/// the partition's class sets. Throws InvariantError otherwise.
void validate_components(const PipelineComponents& components, const DatasetPartition& partition);

/// Per-sample outputs of the automated stages, shared by every routing mode.
struct Assessment {
    RejectDecision reject;
    PredictionDistribution probs;
    ClassId predicted = 0;
};

Assessment assess(const PipelineComponents& components, const Sample& sample);

ExpertContext make_expert_context(const PipelineComponents& components, const Assessment& assessment,
                                  const Dataset& dataset);

Decision route_assessed(const PipelineComponents& components, Mode mode, const Sample& sample,
                        const Assessment& assessment, double draw, const Dataset* dataset = nullptr);

/// automation: classifier always. deferral: rejector gates classifier vs
/// expert; escalations are Caution (stage Expert, s=0). collaborative:
/// escalations go to resolve_coex with `draw`.
Decision route_sample(const PipelineComponents& components, Mode mode, const Sample& sample, double draw);

/// CoEx draw for a sample: a pure function of (seed, sample id).
double sample_draw(std::uint64_t seed, SampleId id);

struct StageTally {
    std::size_t correct = 0;
    std::size_t incorrect = 0;
};

struct RunReport {
    Mode mode = Mode::Automation;
    int tier = 0;
    RateLevel rate = RateLevel::None;
    std::uint64_t seed = 0;
    std::vector<Decision> decisions;  // sorted by sample id
    double micro_f1 = 0.0;
    std::map<Stage, StageTally> by_stage;
    std::string composition;
};

RunReport run_mode(const PipelineComponents& components, Mode mode, const Dataset& dataset,
                   std::span<const std::size_t> indices, std::uint64_t seed);

}  // namespace a2c
