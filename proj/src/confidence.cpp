#include "masim/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "masim/errors.hpp"

namespace masim {

std::string to_string(GMap g) { return g == GMap::exp_neg ? "exp_neg" : "inverse"; }

GMap g_map_from_string(const std::string& s) {
    if (s == "exp_neg") return GMap::exp_neg;
    if (s == "inverse") return GMap::inverse;
    throw ConfigError("unknown g_map: " + s);
}

void ConfidenceConfig::validate() const {
    if (top_k < 1) throw ConfigError("confidence: top_k must be positive");
    if (!(prune_delta >= 0.0 && prune_delta <= 1.0))
        throw ConfigError("confidence: prune_delta must lie in [0, 1]");
    if (downweight_alpha < 0.0) throw ConfigError("confidence: downweight_alpha must be non-negative");
}

double token_entropy(const std::vector<double>& probs) {
    if (probs.empty()) throw DomainError("token_entropy: empty distribution");
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw DomainError("token_entropy: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("token_entropy: probabilities must sum to 1");
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

double topk_uncertainty(const std::vector<double>& entropies, int k) {
    if (entropies.empty()) throw DomainError("topk_uncertainty: empty profile");
    if (k < 1) throw DomainError("topk_uncertainty: k must be positive");
    const int take = std::min<int>(k, static_cast<int>(entropies.size()));
    std::vector<double> sorted(entropies);
    std::partial_sort(sorted.begin(), sorted.begin() + take, sorted.end(), std::greater<>());
    double sum = 0.0;
    for (int i = 0; i < take; ++i) sum += sorted[i];
    return sum / take;
}

double confidence_of_uncertainty(double u, GMap g) {
    if (u < 0.0) throw DomainError("confidence: uncertainty must be non-negative");
    return g == GMap::exp_neg ? std::exp(-u) : 1.0 / (1.0 + u);
}

double confidence_of_profile(const std::vector<double>& entropies, const ConfidenceConfig& cfg) {
    return confidence_of_uncertainty(topk_uncertainty(entropies, cfg.top_k), cfg.g_map);
}

std::vector<int> prune_by_confidence(const std::vector<double>& confidences, double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw DomainError("prune_by_confidence: delta must lie in [0, 1]");
    std::vector<int> withheld;
    for (std::size_t i = 0; i < confidences.size(); ++i)
        if (confidences[i] < delta) withheld.push_back(static_cast<int>(i));
    return withheld;
}

TaggedMessage pack_and_weight(const std::string& surface, double confidence, const ConfidenceConfig& cfg) {
    if (!(confidence >= 0.0 && confidence <= 1.0)) throw DomainError("pack_and_weight: confidence out of range");
    char prefix[32];
    std::snprintf(prefix, sizeof prefix, "[confidence=%.2f] ", confidence);
    TaggedMessage t;
    t.confidence = confidence;
    t.rendered = std::string(prefix) + surface;
    t.weight_multiplier = cfg.downweight_alpha > 0.0 ? std::pow(confidence, cfg.downweight_alpha) : 1.0;
    return t;
}

}  // namespace masim
