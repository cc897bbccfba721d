#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace masim {

enum class TopologyKind { chain, star, sparse_random, fully_connected };

std::string to_string(TopologyKind k);
TopologyKind topology_kind_from_string(const std::string& s);

struct TopologySpec {
    TopologyKind kind = TopologyKind::fully_connected;
    int n_agents = 8;
    // present iff kind == sparse_random
    std::optional<double> edge_prob;
    std::uint64_t seed = 0;
    // chain only: edges run high index to low instead of low to high
    bool reverse = false;
    // star only: false gives hub-to-leaf edges only
    bool bidirectional = true;

    void validate() const;
};

// "chain", "star", ... with the edge probability folded in for sparse
// graphs, e.g. "sparse_random(p=0.5)". Used as a grouping key in outputs.
std::string display_name(const TopologySpec& spec);

// Directed communication graph. Edge (a, b) means messages from a are
// delivered to b.
class Topology {
   public:
    Topology(int n_agents, std::vector<std::pair<int, int>> edges);

    int n_agents() const { return n_agents_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    // ascending sender ids, bounds-checked
    const std::vector<int>& in_neighbors(int agent) const;
    std::vector<int> out_neighbors(int agent) const;
    bool has_edge(int from, int to) const;
    double mean_in_degree() const;

   private:
    int n_agents_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> in_;
};

Topology build_topology(const TopologySpec& spec);

}  // namespace masim
