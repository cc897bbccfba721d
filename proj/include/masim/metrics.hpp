#pragma once

#include <optional>
#include <vector>

#include "masim/records.hpp"

namespace masim {

// Mean pairwise cosine distances between message embeddings, grouped by who
// wrote the two messages and whether benign authors agreed. Each cell is
// averaged per episode-round first, then across cells, so long episodes
// don't dominate.
struct DistanceTable {
    std::optional<double> benign_malicious;
    std::optional<double> benign_benign_same;
    std::optional<double> benign_benign_diff;
};

enum class DetectionSignal { embedding, confidence };
std::string to_string(DetectionSignal s);
DetectionSignal detection_signal_from_string(const std::string& s);

// Fraction of episodes whose final majority answer equals the gold label.
double accuracy(const std::vector<EpisodeRecord>& episodes);

// Fraction of episodes whose final majority answer equals the attack target.
double attack_success_rate(const std::vector<EpisodeRecord>& episodes);

// Rank-based AUROC with midrank tie handling. Scores are oriented so that
// larger means more benign; returns P(benign > attacker) + 0.5 P(tie).
double auroc(const std::vector<double>& benign_scores, const std::vector<double>& attacker_scores);

// Per-round AUROC of the chosen per-message signal, pooled across episodes.
// Round r uses every message written in round r.
std::vector<double> auroc_by_round(const std::vector<EpisodeRecord>& episodes, int n_rounds,
                                   DetectionSignal signal);

// First round whose AUROC drops strictly below the threshold, or nullopt if
// the detector holds through the last round.
std::optional<int> half_life(const std::vector<double>& auroc_series, double threshold);

// Area under the per-round AUROC series (plain sum over rounds).
double auc_r(const std::vector<double>& auroc_series);

DistanceTable distance_table(const std::vector<EpisodeRecord>& episodes);

// Fraction of ordered agent pairs giving different answers.
double disagreement_rate(const std::vector<Label>& answers);

}  // namespace masim
