#pragma once

#include <optional>
#include <string>
#include <vector>

#include "masim/attacks.hpp"
#include "masim/confidence.hpp"
#include "masim/embedding_defense.hpp"
#include "masim/records.hpp"

namespace masim {

enum class ConfidenceStrategy { prune, downweight, both };
enum class DefenseOrder { confidence_first, embedding_first };

std::string to_string(ConfidenceStrategy s);
ConfidenceStrategy confidence_strategy_from_string(const std::string& s);
std::string to_string(DefenseOrder o);
DefenseOrder defense_order_from_string(const std::string& s);

struct EmbeddingDefense {
    // a ready scorer; knn scorers are rebuilt per round on the current
    // support when rebuild_knn is set
    AnyScorer scorer = LinearScorer{};
    double lambda = defaults::emb_lambda;
    bool rebuild_knn = false;
    int knn_k = defaults::knn_k;
    double knn_offset = defaults::knn_offset;
};

struct ConfidenceDefense {
    ConfidenceConfig config;
    ConfidenceStrategy strategy = ConfidenceStrategy::prune;
};

struct DefensePlan {
    std::optional<ConfidenceDefense> confidence;
    std::optional<EmbeddingDefense> embedding;
    DefenseOrder order = DefenseOrder::confidence_first;
    std::string name = "none";
};

struct RunSetup {
    EpisodeConfig episode;
    TopologySpec topology;
    std::optional<AttackConfig> attack;
    DefensePlan defense;
    // fresh graph per episode seed (topology.seed is ignored) or one fixed
    // graph shared by every episode
    bool topology_per_episode = true;
};

// Advances one synchronous round: benign drafts, attacker selections,
// defenses, belief updates. Returns one record per agent.
std::vector<RoundRecord> run_round(EpisodeState& state, int round, const DefensePlan& plan,
                                   const std::optional<AttackConfig>& attack, const std::string& run_id);

EpisodeRecord run_episode(const RunSetup& setup, std::uint64_t seed);

// Sequential over seeds or sliced across threads; either way records come
// back in seed order and are byte-identical to the serial path.
std::vector<EpisodeRecord> run_batch(const RunSetup& setup, const std::vector<std::uint64_t>& seeds,
                                     int n_threads = 1);

// modal label, lowest index wins ties
Label majority_vote(const std::vector<Label>& answers, int n_labels);

// Collects labeled embeddings from overt-attack episodes (no defense) and
// fits the linear scorer on them, refined at the given lambda.
LinearScorer train_scorer_on_obvious(const RunSetup& base, double lambda,
                                     const std::vector<std::uint64_t>& seeds,
                                     const TrainParams& params = {});

}  // namespace masim
