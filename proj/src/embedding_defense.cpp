#include "masim/embedding_defense.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "masim/errors.hpp"

namespace masim {

double dist_to_support(const Eigen::VectorXd& h, const SupportSet& support) {
    if (support.points.empty()) throw DomainError("dist_to_support: empty support");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& z : support.points) {
        if (z.size() != h.size()) throw DomainError("dist_to_support: dimension mismatch");
        best = std::min(best, (h - z).norm());
    }
    return best;
}

double separation_rate(const std::vector<Eigen::VectorXd>& attack_embeddings, const SupportSet& support,
                       double c) {
    if (!(c > 0.0)) throw DomainError("separation_rate: threshold must be positive");
    if (attack_embeddings.empty()) throw DomainError("separation_rate: no attack embeddings");
    int hits = 0;
    for (const auto& h : attack_embeddings)
        if (dist_to_support(h, support) >= c) ++hits;
    return static_cast<double>(hits) / attack_embeddings.size();
}

double cosine_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) throw DomainError("cosine_distance: dimension mismatch");
    const double nu = u.norm(), nv = v.norm();
    if (nu < 1e-12 || nv < 1e-12) throw DomainError("cosine_distance: zero vector");
    return 1.0 - u.dot(v) / (nu * nv);
}

std::vector<std::optional<Eigen::VectorXd>> refine_embeddings(
    const std::vector<std::optional<Eigen::VectorXd>>& by_agent, const std::vector<char>& active,
    const Topology& topology, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("refine_embeddings: lambda must lie in [0, 1]");
    if (by_agent.size() != static_cast<std::size_t>(topology.n_agents()) || active.size() != by_agent.size())
        throw DomainError("refine_embeddings: size mismatch with topology");

    std::vector<std::optional<Eigen::VectorXd>> refined(by_agent.size());
    for (int i = 0; i < topology.n_agents(); ++i) {
        if (!by_agent[i]) continue;
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(by_agent[i]->size());
        int got = 0;
        for (int j : topology.in_neighbors(i)) {
            if (!by_agent[j] || !active[j]) continue;
            sum += *by_agent[j];
            ++got;
        }
        if (got == 0)
            refined[i] = *by_agent[i];
        else
            refined[i] = (1.0 - lambda) * (*by_agent[i]) + (lambda / got) * sum;
    }
    return refined;
}

double LinearScorer::score(const Eigen::VectorXd& h) const {
    if (h.size() != weights.size()) throw DomainError("LinearScorer: dimension mismatch");
    return weights.dot(h) + bias;
}

KnnScorer::KnnScorer(SupportSet ref, int k_, double offset_) : reference(std::move(ref)), k(k_), offset(offset_) {
    if (reference.points.empty()) throw DomainError("KnnScorer: empty reference");
    if (k < 1 || k > static_cast<int>(reference.points.size()))
        throw DomainError("KnnScorer: k must lie in [1, |reference|]");
}

double KnnScorer::score(const Eigen::VectorXd& h) const {
    if (reference.points.empty()) throw DomainError("KnnScorer: empty reference");
    if (k < 1 || k > static_cast<int>(reference.points.size()))
        throw DomainError("KnnScorer: k must lie in [1, |reference|]");
    std::vector<double> d;
    d.reserve(reference.points.size());
    for (const auto& z : reference.points) {
        if (z.size() != h.size()) throw DomainError("KnnScorer: dimension mismatch");
        d.push_back((h - z).norm());
    }
    std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
    double mean = 0.0;
    for (int i = 0; i < k; ++i) mean += d[i];
    mean /= k;
    return offset - mean;
}

double score(const AnyScorer& scorer, const Eigen::VectorXd& h) {
    return std::visit([&](const auto& s) { return s.score(h); }, scorer);
}

double scorer_lipschitz(const AnyScorer& scorer) {
    return std::visit([](const auto& s) { return s.lipschitz(); }, scorer);
}

LinearScorer train_linear_scorer(const std::vector<Eigen::VectorXd>& embeddings,
                                 const std::vector<char>& is_benign, const TrainParams& params) {
    if (embeddings.size() != is_benign.size()) throw DomainError("train_linear_scorer: size mismatch");
    if (embeddings.empty()) throw DomainError("train_linear_scorer: empty training set");
    const bool has_pos = std::find(is_benign.begin(), is_benign.end(), char(1)) != is_benign.end();
    const bool has_neg = std::find(is_benign.begin(), is_benign.end(), char(0)) != is_benign.end();
    if (!has_pos || !has_neg) throw DomainError("train_linear_scorer: both classes required");
    if (params.iterations < 1 || !(params.learning_rate > 0.0))
        throw DomainError("train_linear_scorer: bad training params");

    const int d = static_cast<int>(embeddings[0].size());
    for (const auto& x : embeddings)
        if (x.size() != d) throw DomainError("train_linear_scorer: inconsistent dimensions");

    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    double b = 0.0;
    const double n = static_cast<double>(embeddings.size());
    for (int it = 0; it < params.iterations; ++it) {
        Eigen::VectorXd gw = Eigen::VectorXd::Zero(d);
        double gb = 0.0;
        for (std::size_t i = 0; i < embeddings.size(); ++i) {
            const double y = is_benign[i] ? 1.0 : -1.0;
            const double s = w.dot(embeddings[i]) + b;
            // d/ds log(1 + exp(-y s)) = -y sigmoid(-y s)
            const double g = -y / (1.0 + std::exp(y * s));
            gw += g * embeddings[i];
            gb += g;
        }
        w -= params.learning_rate / n * gw;
        b -= params.learning_rate / n * gb;
    }
    LinearScorer out{w, b, 0.0};
    out.refresh_lipschitz();
    return out;
}

std::vector<int> prune_by_score(const AnyScorer& scorer,
                                const std::vector<std::optional<Eigen::VectorXd>>& refined) {
    std::vector<int> pruned;
    for (std::size_t i = 0; i < refined.size(); ++i)
        if (refined[i] && score(scorer, *refined[i]) < 0.0) pruned.push_back(static_cast<int>(i));
    return pruned;
}

nlohmann::json scorer_to_json(const LinearScorer& s) {
    std::vector<double> w(s.weights.data(), s.weights.data() + s.weights.size());
    return nlohmann::json{{"kind", "linear"}, {"weights", w}, {"bias", s.bias}};
}

LinearScorer scorer_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("kind", "") != "linear")
        throw ConfigError("scorer_from_json: expected kind == \"linear\"");
    if (!j.contains("weights") || !j["weights"].is_array() || !j.contains("bias"))
        throw ConfigError("scorer_from_json: missing weights or bias");
    std::vector<double> w = j["weights"].get<std::vector<double>>();
    if (w.empty()) throw ConfigError("scorer_from_json: empty weights");
    LinearScorer s;
    s.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<int>(w.size()));
    s.bias = j["bias"].get<double>();
    s.refresh_lipschitz();
    return s;
}

}  // namespace masim
