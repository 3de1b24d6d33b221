#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "a2c/types.hpp"

namespace a2c {

/// Collaborative-exploration resolution level. None means no CoEx stage.
enum class RateLevel { None = 0, R1 = 1, R2 = 2, R3 = 3, R4 = 4 };

/// None -> 0, R1..R4 -> 0.50, 0.75, 0.90, 1.00.
double resolve_probability(RateLevel level);
std::string rate_level_name(RateLevel level);
RateLevel parse_rate_level(std::string_view tag);

inline constexpr RateLevel kAllRateLevels[] = {RateLevel::None, RateLevel::R1, RateLevel::R2, RateLevel::R3,
                                               RateLevel::R4};

struct CoExConfig {
    RateLevel rate_level = RateLevel::None;
    std::uint64_t seed = 0;

    double resolve_prob() const { return resolve_probability(rate_level); }
};

/// Resolves an escalated sample: draw < resolve_prob gives the true label
/// (CoexResolved, s=1), otherwise Caution (CoexUnresolved, s=0). The caller
/// supplies one draw per sample id and reuses it across rate levels.
Decision resolve_coex(const Sample& sample, const CoExConfig& config, double draw);

struct Evidence {
    std::string id;
    std::vector<double> likelihood_expert;
    std::vector<double> likelihood_collaborator;
};

/// Beliefs of the expert (E) and the collaborator (A) over candidate labels.
struct BeliefState {
    std::vector<ClassId> candidates;
    std::vector<double> expert;
    std::vector<double> collaborator;
    std::vector<Evidence> evidence_log;
};

BeliefState uniform_beliefs(std::vector<ClassId> candidates);

/// posterior ∝ likelihood ⊙ prior for both nodes, renormalized.
/// Throws when a likelihood carries zero mass under the current belief.
BeliefState bayes_update(BeliefState state, const Evidence& evidence);

struct BeliefSnapshot {
    std::size_t iteration = 0;
    std::vector<double> expert;
    std::vector<double> collaborator;
};

struct ConsensusResult {
    std::optional<ClassId> label;
    std::size_t iterations = 0;
    bool consensus = false;
    BeliefState final_state;
    std::vector<BeliefSnapshot> trace;
};

/// Updates on evidence in order until both nodes put at least `tau` on the
/// same candidate, or evidence / max_iters run out. Without consensus the
/// expert's argmax is taken (ties -> lowest class id).
ConsensusResult run_belief_loop(BeliefState priors, const std::vector<Evidence>& evidence, double tau = 0.9,
                                std::size_t max_iters = 100);

/// "iteration,candidate,expert_prob,collaborator_prob"
std::string belief_trace_csv(const ConsensusResult& result);

}  // namespace a2c
