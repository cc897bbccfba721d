#pragma once

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "masim/defaults.hpp"
#include "masim/topology.hpp"

#include <nlohmann/json_fwd.hpp>

namespace masim {

struct SupportSet {
    std::vector<Eigen::VectorXd> points;
    int round = 0;
};

// min Euclidean distance to the support; empty support is an error
double dist_to_support(const Eigen::VectorXd& h, const SupportSet& support);

// fraction of attack embeddings at distance >= c from the support
double separation_rate(const std::vector<Eigen::VectorXd>& attack_embeddings, const SupportSet& support,
                       double c);

// 1 - cos(u, v), range [0, 2]; zero vectors are an error
double cosine_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// One step of context mixing: each present embedding moves toward the mean
// of its active in-neighbors. h_hat_i = (1-lambda) h_i + lambda * mean_j h_j
// over active senders j in N(i); an agent with no active in-neighbor keeps
// h_i. The result is not re-normalized. Entries are indexed by agent;
// nullopt marks agents with no message this round. `active` marks senders
// that still count as context (e.g. not withheld by an earlier defense).
std::vector<std::optional<Eigen::VectorXd>> refine_embeddings(
    const std::vector<std::optional<Eigen::VectorXd>>& by_agent, const std::vector<char>& active,
    const Topology& topology, double lambda);

// Linear score w.h + b; accept means score >= 0.
struct LinearScorer {
    Eigen::VectorXd weights;
    double bias = 0.0;
    double lipschitz_cached = 0.0;

    double score(const Eigen::VectorXd& h) const;
    double lipschitz() const { return lipschitz_cached; }
    void refresh_lipschitz() { lipschitz_cached = weights.norm(); }
};

// Score offset minus the mean distance to the k nearest reference points.
//
// Lipschitz constant 1: each z in the reference gives a 1-Lipschitz map
// h -> |h - z|. For any k-subset T the average (1/k) sum_{z in T} |h - z|
// is then 1-Lipschitz, and the mean of the k smallest distances equals the
// min of those averages over all k-subsets. A pointwise min of 1-Lipschitz
// functions is 1-Lipschitz, so the score is too.
struct KnnScorer {
    SupportSet reference;
    int k = defaults::knn_k;
    double offset = defaults::knn_offset;

    KnnScorer() = default;
    KnnScorer(SupportSet ref, int k_, double offset_);

    double score(const Eigen::VectorXd& h) const;
    double lipschitz() const { return 1.0; }
};

using AnyScorer = std::variant<LinearScorer, KnnScorer>;

double score(const AnyScorer& scorer, const Eigen::VectorXd& h);
double scorer_lipschitz(const AnyScorer& scorer);

struct TrainParams {
    int iterations = defaults::train_iterations;
    double learning_rate = defaults::train_learning_rate;
};

// Full-batch logistic regression from zero init with a fixed iteration
// count and learning rate; deterministic for a fixed input order.
LinearScorer train_linear_scorer(const std::vector<Eigen::VectorXd>& embeddings,
                                 const std::vector<char>& is_benign, const TrainParams& params = {});

// indices of messages with score(refined) < 0
std::vector<int> prune_by_score(const AnyScorer& scorer,
                                const std::vector<std::optional<Eigen::VectorXd>>& refined);

nlohmann::json scorer_to_json(const LinearScorer& s);
LinearScorer scorer_from_json(const nlohmann::json& j);

}  // namespace masim
