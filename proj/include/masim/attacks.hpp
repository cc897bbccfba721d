#pragma once

#include <vector>

#include "masim/embedding_defense.hpp"
#include "masim/episode.hpp"

namespace masim {

enum class TauMode { fixed, margin_radius };

std::string to_string(TauMode m);
TauMode tau_mode_from_string(const std::string& s);

struct AttackConfig {
    AttackKind kind = AttackKind::drift;
    double tau = defaults::attack_tau;
    double eps = defaults::attack_eps;              // drift step bound, rounds >= 2
    double tau_wrapper = defaults::attack_tau_wrapper;
    int payload_budget = defaults::attack_payload_budget;
    int wrapper_len = defaults::attack_wrapper_len;
    int n_candidates = defaults::attack_candidates;
    double obvious_min_dist = defaults::attack_obvious_min_dist;
    // margin_radius replaces tau each round with the scorer's benign margin
    // divided by its Lipschitz constant (engine computes the radius)
    TauMode tau_mode = TauMode::fixed;

    void validate() const;
};

struct Candidate {
    Message message;
    double dist = 0.0;        // distance to the current benign support
    double drift_dist = 0.0;  // distance to the attacker's previous message
};

// Candidate embeddings sampled around the support point nearest the
// attacker's previous message (round 1: nearest the support mean), at
// displacements swept over a descending grid in (0, tau]. Descending
// order makes the lowest-index tie-break prefer the most displaced
// feasible candidate. Claims are the target label, except chaos, which
// cycles over the labels other than the current benign majority.
std::vector<Candidate> generate_candidates(const EpisodeState& state, AgentId attacker, int round,
                                           const AttackConfig& cfg, const SupportSet& support,
                                           double effective_tau);

// Exact one-step objective: number of benign out-neighbors whose answer
// would switch to the target if the candidate replaced the attacker's slot
// in the already drafted round messages. Weights are raw persuasions.
int flip_count(const Candidate& candidate, const EpisodeState& state, int round);

// Projected disagreement over all benign agents after the same one-step
// update (ordered-pair rate).
double projected_disagreement(const Candidate& candidate, const EpisodeState& state, int round);

// Selectors return the chosen message; infeasible candidate sets fall back
// to the least constraint-violating candidate with fallback=true.
Message select_slow_drift(const std::vector<Candidate>& candidates, const EpisodeState& state, int round,
                          const AttackConfig& cfg, double effective_tau);
Message select_benign_wrapper(const EpisodeState& state, AgentId attacker, int round, const AttackConfig& cfg,
                              const SupportSet& support, double effective_tau);
Message select_chaos(const std::vector<Candidate>& candidates, const EpisodeState& state, int round,
                     const AttackConfig& cfg, double effective_tau);

// Overt baseline: an embedding rotated away from the support mean until it
// sits at least obvious_min_dist from every support point.
Message obvious_message(const EpisodeState& state, AgentId attacker, int round, const AttackConfig& cfg,
                        const SupportSet& support);

// Dispatch by cfg.kind; effective_tau is cfg.tau unless the engine passes a
// margin-derived radius.
Message attack_message(const EpisodeState& state, AgentId attacker, int round, const AttackConfig& cfg,
                       const SupportSet& support, double effective_tau);

}  // namespace masim
