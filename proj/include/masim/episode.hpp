#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "masim/defaults.hpp"
#include "masim/rng.hpp"
#include "masim/topology.hpp"

namespace masim {

using AgentId = int;
using Label = int;

enum class Role { benign, attacker };
enum class AttackKind { none, obvious, drift, wrapper, chaos };

std::string to_string(Role r);
Role role_from_string(const std::string& s);
std::string to_string(AttackKind k);
AttackKind attack_kind_from_string(const std::string& s);

struct Belief {
    // one logit per label; answer is the argmax
    Eigen::VectorXd logits;
};

// argmax label, lowest index wins ties
Label answer_of(const Belief& b);
// Shannon entropy of softmax(logits), in nats
double belief_entropy(const Belief& b);

// One message: a claimed answer plus surrogate artifacts standing in for
// text (an embedding on the unit sphere and a per-token entropy profile).
struct Message {
    AgentId author = 0;
    int round = 0;
    Label claim = 0;
    Eigen::VectorXd embedding;
    std::vector<double> entropy_profile;
    double persuasion = 0.0;
    AttackKind attack_kind = AttackKind::none;
    bool fallback = false;
};

struct EpisodeConfig {
    int n_agents = 8;
    int n_rounds = defaults::n_rounds;
    int n_labels = defaults::n_labels;
    Label gold_label = defaults::gold_label;
    Label target_label = defaults::target_label;
    std::vector<AgentId> attacker_ids{1};
    int embedding_dim = defaults::embedding_dim;
    double benign_prior_mass = defaults::benign_prior_mass;           // q0
    double answer_direction_scale = defaults::answer_direction_scale; // beta
    double noise_sigma = defaults::noise_sigma;
    double persuasion_benign = defaults::persuasion_benign;           // kappa_b
    double persuasion_attacker = defaults::persuasion_attacker;       // kappa_a
    double entropy_gap = defaults::entropy_gap;                       // Delta
    double contamination_decay = defaults::contamination_decay;       // rho
    int tokens_per_message = defaults::tokens_per_message;
    double entropy_base = defaults::entropy_base;
    double entropy_belief_coupling = defaults::entropy_belief_coupling;
    double entropy_shape = defaults::entropy_shape;
    double entropy_max = defaults::entropy_max;

    void validate() const;
    bool is_attacker(AgentId a) const;
    std::vector<AgentId> benign_agents() const;
};

struct EpisodeState {
    EpisodeConfig config;
    Topology topology;
    std::uint64_t seed = 0;

    std::vector<Belief> beliefs;  // per agent
    // history[r] holds round-r messages in author order; index 0 holds the
    // pre-round anchor drafts (benign authors only)
    std::vector<std::vector<Message>> history;
    // delivered[r][i] mirrors history[r]; false once a defense withheld it
    std::vector<std::vector<char>> delivered;
    Eigen::VectorXd anchor;                    // per-episode task anchor
    std::vector<Eigen::VectorXd> label_dirs;   // per-label unit directions
    int rounds_completed = 0;

    Role role_of(AgentId a) const { return config.is_attacker(a) ? Role::attacker : Role::benign; }
    // benign embeddings authored in round r (0 = anchors)
    std::vector<Eigen::VectorXd> benign_support(int r) const;
};

EpisodeState init_episode(const EpisodeConfig& config, const Topology& topology, std::uint64_t seed);

// Benign message for the given round. Context is the mean embedding of the
// messages this agent received in the previous round (round 1 and agents
// that received nothing fall back to the task anchor).
Message benign_draft(const EpisodeState& state, AgentId agent, int round);

// Pure additive update; order of the incoming list does not matter.
Belief belief_update(const Belief& before, std::vector<std::pair<Label, double>> incoming, int n_labels);

// Fraction of benign agents whose current belief argmax equals the target.
double contamination(const EpisodeState& state);

// Entropy profile mean for a drafting agent: a belief-entropy coupled base,
// plus for attackers a gap that shrinks as contamination spreads.
double entropy_profile_mean(const EpisodeState& state, AgentId agent);
std::vector<double> draw_entropy_profile(const EpisodeState& state, AgentId agent, RngStream& rng);
std::vector<double> draw_entropy_profile(const EpisodeState& state, AgentId agent, int round, Draw purpose);

}  // namespace masim
