#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "masim/episode.hpp"

namespace masim {

enum class PrunedBy { none, embedding, confidence };

std::string to_string(PrunedBy p);
PrunedBy pruned_by_from_string(const std::string& s);

// One row per agent per round. Diagnostic signals (confidence, embedding
// score) are recorded whether or not the matching defense is active;
// pruned_by == none means the message reached every out-neighbor.
struct RoundRecord {
    std::string run_id;
    int round = 0;
    AgentId agent = 0;
    Role role = Role::benign;
    Label claim = 0;
    double confidence = 1.0;
    double embedding_score = 0.0;
    PrunedBy pruned_by = PrunedBy::none;
    AttackKind attack_kind = AttackKind::none;
    bool fallback = false;
    Eigen::VectorXd embedding;
};

struct EpisodeRecord {
    std::uint64_t seed = 0;
    int n_agents = 0;
    int n_rounds = 0;
    Label gold = 0;
    Label target = 0;
    std::vector<Label> final_answers;  // benign agents, ascending id
    Label final_answer = 0;            // majority vote
    std::vector<RoundRecord> rounds;   // all rounds, author order within round
    // grouping keys for summaries
    std::string topology_name;
    std::string attack_name;
    std::string defense_name;
};

}  // namespace masim
