#include "a2c/expert.hpp"

#include "a2c/error.hpp"

namespace a2c {

ExpertProfile build_expert(int tier, const DatasetPartition& partition) {
    if (tier < 1 || tier > 3) throw UsageError("expert", "tier must be 1, 2 or 3, got " + std::to_string(tier));
    ExpertProfile p;
    p.tier = tier;
    if (tier == 1 || tier == 3) p.known_classes.insert(partition.classes(Group::A).begin(), partition.classes(Group::A).end());
    if (tier == 2 || tier == 3) p.known_classes.insert(partition.classes(Group::B).begin(), partition.classes(Group::B).end());
    return p;
}

ExpertOutcome expert_decide(const ExpertProfile& profile, const Sample& sample, const ExpertContext& /*context*/) {
    if (!sample.label) throw Error("expert", "sample " + std::to_string(sample.id) + " has no ground-truth label");
    if (profile.knows(*sample.label)) return {*sample.label};
    return {};
}

}  // namespace a2c
