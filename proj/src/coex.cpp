#include "a2c/coex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "a2c/error.hpp"
#include "a2c/text.hpp"

namespace a2c {
namespace {

constexpr const char* kStage = "coex";

// Consensus threshold comparisons tolerate rounding, e.g. 0.45/0.5 vs 0.9.
constexpr double kTauSlack = 1e-12;

std::vector<double> posterior(const std::vector<double>& prior, const std::vector<double>& likelihood,
                              const char* node) {
    if (likelihood.size() != prior.size()) {
        throw Error(kStage, std::string(node) + " likelihood has " + std::to_string(likelihood.size()) +
                                " entries, expected " + std::to_string(prior.size()));
    }
    std::vector<double> out(prior.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i) {
        if (!(likelihood[i] >= 0.0) || !std::isfinite(likelihood[i])) {
            throw Error(kStage, std::string(node) + " likelihood must be finite and non-negative");
        }
        out[i] = likelihood[i] * prior[i];
        mass += out[i];
    }
    if (!(mass > 0.0)) {
        throw Error(kStage, std::string("contradictory evidence: ") + node + " likelihood has zero mass under the current belief");
    }
    if (std::adjacent_find(likelihood.begin(), likelihood.end(), std::not_equal_to<>()) == likelihood.end()) return prior;
    for (auto& v : out) v /= mass;
    return out;
}

std::optional<std::size_t> agreed_candidate(const BeliefState& s, double tau) {
    for (std::size_t i = 0; i < s.candidates.size(); ++i) {
        if (s.expert[i] >= tau - kTauSlack && s.collaborator[i] >= tau - kTauSlack) return i;
    }
    return std::nullopt;
}

}  // namespace

double resolve_probability(RateLevel level) {
    switch (level) {
        case RateLevel::None: return 0.0;
        case RateLevel::R1: return 0.50;
        case RateLevel::R2: return 0.75;
        case RateLevel::R3: return 0.90;
        case RateLevel::R4: return 1.00;
    }
    return 0.0;
}

std::string rate_level_name(RateLevel level) {
    return level == RateLevel::None ? "none" : std::to_string(static_cast<int>(level));
}

RateLevel parse_rate_level(std::string_view tag) {
    const auto t = text::to_lower(text::trim(tag));
    if (t == "none" || t == "0" || t == "empty") return RateLevel::None;
    if (t == "1") return RateLevel::R1;
    if (t == "2") return RateLevel::R2;
    if (t == "3") return RateLevel::R3;
    if (t == "4") return RateLevel::R4;
    throw UsageError(kStage, "unknown rate level '" + std::string(tag) + "' (expected none, 1, 2, 3 or 4)");
}

Decision resolve_coex(const Sample& sample, const CoExConfig& config, double draw) {
    if (config.rate_level == RateLevel::None) {
        throw Error(kStage, "collaborative exploration invoked with rate level none");
    }
    if (!sample.label) throw Error(kStage, "sample " + std::to_string(sample.id) + " has no ground-truth label");
    if (!(draw >= 0.0 && draw < 1.0)) throw Error(kStage, "draw must lie in [0, 1)");
    Decision d;
    d.sample_id = sample.id;
    d.truth = sample.label;
    if (draw < config.resolve_prob()) {
        d.predicted = sample.label;
        d.stage = Stage::CoexResolved;
        d.score = 1.0;
    } else {
        d.stage = Stage::CoexUnresolved;
        d.score = 0.0;
    }
    return d;
}

BeliefState uniform_beliefs(std::vector<ClassId> candidates) {
    if (candidates.empty()) throw Error(kStage, "belief needs at least one candidate");
    BeliefState s;
    const double p = 1.0 / static_cast<double>(candidates.size());
    s.expert.assign(candidates.size(), p);
    s.collaborator.assign(candidates.size(), p);
    s.candidates = std::move(candidates);
    return s;
}

BeliefState bayes_update(BeliefState state, const Evidence& evidence) {
    state.expert = posterior(state.expert, evidence.likelihood_expert, "expert");
    state.collaborator = posterior(state.collaborator, evidence.likelihood_collaborator, "collaborator");
    state.evidence_log.push_back(evidence);
    return state;
}

ConsensusResult run_belief_loop(BeliefState priors, const std::vector<Evidence>& evidence, double tau,
                                std::size_t max_iters) {
    if (!(tau > 0.5 && tau <= 1.0)) throw Error(kStage, "consensus threshold must lie in (0.5, 1]");
    if (priors.expert.size() != priors.candidates.size() || priors.collaborator.size() != priors.candidates.size()) {
        throw Error(kStage, "belief vectors do not match the candidate list");
    }
    ConsensusResult r;
    r.final_state = std::move(priors);
    const auto snapshot = [&] {
        r.trace.push_back({r.iterations, r.final_state.expert, r.final_state.collaborator});
    };
    snapshot();
    auto agreed = agreed_candidate(r.final_state, tau);
    for (std::size_t i = 0; !agreed && i < evidence.size() && r.iterations < max_iters; ++i) {
        r.final_state = bayes_update(std::move(r.final_state), evidence[i]);
        ++r.iterations;
        snapshot();
        agreed = agreed_candidate(r.final_state, tau);
    }
    const auto& s = r.final_state;
    if (agreed) {
        r.consensus = true;
        r.label = s.candidates[*agreed];
        return r;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.candidates.size(); ++i) {
        if (s.expert[i] > s.expert[best] || (s.expert[i] == s.expert[best] && s.candidates[i] < s.candidates[best])) {
            best = i;
        }
    }
    if (!s.candidates.empty()) r.label = s.candidates[best];
    return r;
}

std::string belief_trace_csv(const ConsensusResult& result) {
    std::string out = "iteration,candidate,expert_prob,collaborator_prob\n";
    for (const auto& snap : result.trace) {
        for (std::size_t i = 0; i < snap.expert.size(); ++i) {
            out += std::to_string(snap.iteration) + "," + std::to_string(result.final_state.candidates[i]) + "," +
                   text::format_double(snap.expert[i]) + "," + text::format_double(snap.collaborator[i]) + "\n";
        }
    }
    return out;
}

}  // namespace a2c
