#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "masim/engine.hpp"

namespace masim {

enum class BackendKind { synthetic, llm };
std::string to_string(BackendKind k);
BackendKind backend_kind_from_string(const std::string& s);

struct BackendConfig {
    BackendKind kind = BackendKind::synthetic;
    std::string base_url = "http://127.0.0.1:8080/v1/chat/completions";
    std::string model = "local";
    std::string api_key_env = "MASIM_API_KEY";
    int top_n_logprobs = defaults::llm_top_n_logprobs;
    int max_retries = defaults::llm_max_retries;
    double backoff_initial_s = defaults::llm_backoff_initial_s;
    double backoff_max_s = defaults::llm_backoff_max_s;
    double temperature = 0.0;
    int max_tokens = 256;
    std::string prompt_dir = "assets/prompts";
    std::string transcript_path;  // empty disables transcript logging
};

struct ConfidenceDefenseConfig {
    ConfidenceStrategy strategy = ConfidenceStrategy::prune;
    ConfidenceConfig params;
};

struct EmbeddingDefenseConfig {
    std::string scorer = "linear";  // "linear" or "knn"
    double lambda = defaults::emb_lambda;
    std::string scorer_path;  // load a serialized linear scorer instead of training
    int knn_k = defaults::knn_k;
    double knn_offset = defaults::knn_offset;
    int train_episodes = defaults::scorer_train_episodes;
    int train_iterations = defaults::train_iterations;
    double train_learning_rate = defaults::train_learning_rate;
    std::uint64_t train_seed_base = 9000;
};

struct DefenseConfig {
    std::string name;  // defaults to a composed description
    DefenseOrder order = DefenseOrder::confidence_first;
    std::optional<ConfidenceDefenseConfig> confidence;
    std::optional<EmbeddingDefenseConfig> embedding;

    std::string display_name() const;
};

struct SweepConfig {
    std::vector<std::string> topologies{"chain", "star", "fully_connected", "sparse_random"};
    std::vector<double> edge_probs{0.25, 0.5, 0.75, 1.0};
};

struct RunConfig {
    std::uint64_t seed = 1;
    int n_seeds = 20;
    int n_threads = 1;
    std::string output_dir = "out";
    TopologySpec topology;
    bool topology_per_episode = true;
    EpisodeConfig episode;  // n_agents is taken from topology
    std::optional<AttackConfig> attack;
    DefenseConfig defense;
    BackendConfig backend;
    SweepConfig sweep;

    void validate() const;
    std::vector<std::uint64_t> seeds() const;
    nlohmann::json to_json() const;  // round-trips through from_json
    static RunConfig from_json(const nlohmann::json& j);
};

// Parses a config file, applies --set overrides (dotted paths, values parsed
// as JSON with a plain-string fallback), and validates. Unknown keys anywhere
// are an error naming the key. An empty path starts from the built-in config.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);
nlohmann::json apply_override(nlohmann::json doc, const std::string& assignment);

// Builds the executable setup: resolves the scorer (load, train, or per-round
// knn) and mirrors the agent count into the episode config.
RunSetup materialize(const RunConfig& cfg);

}  // namespace masim
