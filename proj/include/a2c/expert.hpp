#pragma once

#include <set>

#include "a2c/data.hpp"
#include "a2c/types.hpp"

namespace a2c {

/// Simulated analyst. Tier 1 knows C_A, tier 2 knows C_B, tier 3 knows both.
struct ExpertProfile {
    int tier = 1;
    std::set<ClassId> known_classes;

    bool knows(ClassId id) const { return known_classes.count(id) != 0; }
};

struct ExpertOutcome {
    /// Empty means the expert escalates to collaborative exploration.
    std::optional<ClassId> label;

    bool escalated() const { return !label.has_value(); }
};

ExpertProfile build_expert(int tier, const DatasetPartition& partition);

/// Labels the sample with its true class when that class is within the
/// expert's competence, otherwise escalates. The context is accepted for
/// interface fidelity; the simulated expert does not consult it.
ExpertOutcome expert_decide(const ExpertProfile& profile, const Sample& sample, const ExpertContext& context);

}  // namespace a2c
