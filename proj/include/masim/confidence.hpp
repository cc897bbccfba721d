#pragma once

#include <string>
#include <vector>

#include "masim/defaults.hpp"

namespace masim {

enum class GMap { exp_neg, inverse };

std::string to_string(GMap g);
GMap g_map_from_string(const std::string& s);

struct ConfidenceConfig {
    int top_k = defaults::conf_top_k;
    GMap g_map = GMap::exp_neg;
    double prune_delta = defaults::conf_prune_delta;
    double downweight_alpha = defaults::conf_downweight_alpha;

    void validate() const;
};

// Shannon entropy of a token distribution, in nats; 0 * ln 0 counts as 0.
// The distribution must be non-negative and sum to 1 within 1e-9.
double token_entropy(const std::vector<double>& probs);

// Mean of the min(k, T) largest entries.
double topk_uncertainty(const std::vector<double>& entropies, int k);

// Monotone decreasing map from uncertainty to (0, 1].
double confidence_of_uncertainty(double u, GMap g);
double confidence_of_profile(const std::vector<double>& entropies, const ConfidenceConfig& cfg);

// indices with confidence < delta (withheld); delivery keeps C >= delta
std::vector<int> prune_by_confidence(const std::vector<double>& confidences, double delta);

struct TaggedMessage {
    double confidence = 1.0;
    std::string rendered;
    double weight_multiplier = 1.0;
};

// Renders "[confidence=%.2f] " + surface and computes the down-weight
// multiplier C^alpha (alpha 0 leaves weights untouched).
TaggedMessage pack_and_weight(const std::string& surface, double confidence, const ConfidenceConfig& cfg);

}  // namespace masim
