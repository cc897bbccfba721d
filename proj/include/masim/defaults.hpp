#pragma once

// Single home for every default the config surface exposes. Change them
// here, not at call sites.

namespace masim::defaults {

// episode
inline constexpr int n_rounds = 3;
inline constexpr int n_labels = 4;
inline constexpr int gold_label = 0;
inline constexpr int target_label = 2;
inline constexpr int embedding_dim = 16;
inline constexpr double benign_prior_mass = 0.55;
inline constexpr double answer_direction_scale = 0.5;
// full noise vector norm is sigma * sqrt(dim); keep it well under attack_tau
// or round-1 benign messages are as far from the support as the attacker
inline constexpr double noise_sigma = 0.02;
// attacker-to-benign persuasion ratio is deliberately large: belief updates
// accumulate peer weight additively, so in dense graphs the attacker has to
// outweigh a whole in-neighborhood of honest reinforcement to flip anyone,
// and confidence down-weighting at alpha = 1 should still leave a flip
// possible
inline constexpr double persuasion_benign = 0.1;
inline constexpr double persuasion_attacker = 12.0;
inline constexpr double entropy_gap = 0.6;
inline constexpr double contamination_decay = 1.0;
inline constexpr int tokens_per_message = 24;
inline constexpr double entropy_base = 0.2;
inline constexpr double entropy_belief_coupling = 0.2;
inline constexpr double entropy_shape = 3.0;
inline constexpr double entropy_max = 10.8;

// attacks
inline constexpr double attack_tau = 0.25;
inline constexpr double attack_eps = 0.45;
inline constexpr double attack_tau_wrapper = 0.08;
inline constexpr int attack_payload_budget = 1;
inline constexpr int attack_wrapper_len = 9;
inline constexpr int attack_candidates = 8;
inline constexpr double attack_obvious_min_dist = 0.8;

// defenses
inline constexpr double conf_prune_delta = 0.4;
inline constexpr double conf_downweight_alpha = 0.0;
inline constexpr int conf_top_k = 10;
inline constexpr double emb_lambda = 0.5;
inline constexpr int knn_k = 3;
inline constexpr double knn_offset = 0.3;

// linear scorer training
inline constexpr int train_iterations = 600;
inline constexpr double train_learning_rate = 0.5;
inline constexpr int scorer_train_episodes = 24;

// metrics
inline constexpr double half_life_threshold = 0.7;

// backend
inline constexpr int llm_top_n_logprobs = 5;
inline constexpr int llm_max_retries = 3;
inline constexpr double llm_backoff_initial_s = 0.25;
inline constexpr double llm_backoff_max_s = 4.0;

}  // namespace masim::defaults
