#include "masim/topology.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "masim/errors.hpp"
#include "masim/rng.hpp"

namespace masim {

std::string to_string(TopologyKind k) {
    switch (k) {
        case TopologyKind::chain: return "chain";
        case TopologyKind::star: return "star";
        case TopologyKind::sparse_random: return "sparse_random";
        case TopologyKind::fully_connected: return "fully_connected";
    }
    throw DomainError("unknown topology kind");
}

TopologyKind topology_kind_from_string(const std::string& s) {
    if (s == "chain") return TopologyKind::chain;
    if (s == "star") return TopologyKind::star;
    if (s == "sparse_random") return TopologyKind::sparse_random;
    if (s == "fully_connected") return TopologyKind::fully_connected;
    throw ConfigError("unknown topology kind: " + s);
}

std::string display_name(const TopologySpec& spec) {
    if (spec.kind != TopologyKind::sparse_random) return to_string(spec.kind);
    char buf[48];
    std::snprintf(buf, sizeof buf, "sparse_random(p=%g)", spec.edge_prob.value_or(0.0));
    return buf;
}

void TopologySpec::validate() const {
    if (n_agents < 2) throw ConfigError("topology: n_agents must be at least 2");
    if (kind == TopologyKind::sparse_random) {
        if (!edge_prob) throw ConfigError("topology: sparse_random requires edge_prob");
        if (!(*edge_prob >= 0.0 && *edge_prob <= 1.0))
            throw ConfigError("topology: edge_prob must lie in [0, 1]");
    } else if (edge_prob) {
        throw ConfigError("topology: edge_prob is only valid for sparse_random");
    }
    if (reverse && kind != TopologyKind::chain)
        throw ConfigError("topology: reverse is only valid for chain");
    if (!bidirectional && kind != TopologyKind::star)
        throw ConfigError("topology: bidirectional is only valid for star");
}

Topology::Topology(int n_agents, std::vector<std::pair<int, int>> edges)
    : n_agents_(n_agents), edges_(std::move(edges)) {
    if (n_agents_ < 2) throw DomainError("topology: n_agents must be at least 2");
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    in_.assign(n_agents_, {});
    for (const auto& [a, b] : edges_) {
        if (a < 0 || a >= n_agents_ || b < 0 || b >= n_agents_)
            throw DomainError("topology: edge endpoint out of range");
        if (a == b) throw DomainError("topology: self-loops are not allowed");
        in_[b].push_back(a);
    }
    for (auto& v : in_) std::sort(v.begin(), v.end());
}

const std::vector<int>& Topology::in_neighbors(int agent) const {
    if (agent < 0 || agent >= n_agents_) throw DomainError("in_neighbors: agent id out of range");
    return in_[agent];
}

std::vector<int> Topology::out_neighbors(int agent) const {
    if (agent < 0 || agent >= n_agents_) throw DomainError("out_neighbors: agent id out of range");
    std::vector<int> out;
    for (const auto& [a, b] : edges_)
        if (a == agent) out.push_back(b);
    std::sort(out.begin(), out.end());
    return out;
}

bool Topology::has_edge(int from, int to) const {
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(from, to));
}

double Topology::mean_in_degree() const {
    return static_cast<double>(edges_.size()) / n_agents_;
}

Topology build_topology(const TopologySpec& spec) {
    spec.validate();
    const int n = spec.n_agents;
    std::vector<std::pair<int, int>> edges;
    switch (spec.kind) {
        case TopologyKind::chain:
            for (int j = 0; j + 1 < n; ++j) {
                if (spec.reverse)
                    edges.emplace_back(j + 1, j);
                else
                    edges.emplace_back(j, j + 1);
            }
            break;
        case TopologyKind::star:
            // hub is agent 0
            for (int i = 1; i < n; ++i) {
                edges.emplace_back(0, i);
                if (spec.bidirectional) edges.emplace_back(i, 0);
            }
            break;
        case TopologyKind::fully_connected:
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    if (a != b) edges.emplace_back(a, b);
            break;
        case TopologyKind::sparse_random: {
            // one uniform draw per ordered pair, lexicographic order, so the
            // edge set depends only on (seed, n_agents, edge_prob)
            RngStream rng(mix64(spec.seed ^ 0x746f706fULL));
            const double p = *spec.edge_prob;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    if (a == b) continue;
                    if (rng.uniform01() < p) edges.emplace_back(a, b);
                }
            break;
        }
    }
    return Topology(n, std::move(edges));
}

}  // namespace masim
