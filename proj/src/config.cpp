#include "masim/config.hpp"

#include <fstream>
#include <numeric>

#include "masim/errors.hpp"

namespace masim {

using nlohmann::json;

std::string to_string(BackendKind k) {
    switch (k) {
        case BackendKind::synthetic: return "synthetic";
        case BackendKind::llm: return "llm";
    }
    throw DomainError("unknown backend kind");
}

BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "synthetic") return BackendKind::synthetic;
    if (s == "llm") return BackendKind::llm;
    throw ConfigError("unknown backend kind: " + s);
}

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw ConfigError("config: " + where + ": " + what);
}

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) bad(where, "expected an object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) bad(where, "unknown key \"" + it.key() + "\"");
    }
}

template <typename T>
void take(const json& j, const std::string& where, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    try {
        it->get_to(out);
    } catch (const json::exception&) {
        bad(where + "." + std::string(key), "wrong type");
    }
}

template <typename Parse, typename E>
void take_enum(const json& j, const std::string& where, const char* key, Parse parse, E& out) {
    std::string s;
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    take(j, where, key, s);
    out = parse(s);
}

TopologySpec topology_from_json(const json& j, bool& per_episode) {
    expect_object(j, "topology");
    reject_unknown(j, "topology",
                   {"kind", "n_agents", "edge_prob", "seed", "reverse", "bidirectional", "per_episode"});
    TopologySpec spec;
    take_enum(j, "topology", "kind", topology_kind_from_string, spec.kind);
    take(j, "topology", "n_agents", spec.n_agents);
    if (auto it = j.find("edge_prob"); it != j.end() && !it->is_null()) {
        double p = 0.0;
        take(j, "topology", "edge_prob", p);
        spec.edge_prob = p;
    }
    take(j, "topology", "seed", spec.seed);
    take(j, "topology", "reverse", spec.reverse);
    take(j, "topology", "bidirectional", spec.bidirectional);
    take(j, "topology", "per_episode", per_episode);
    return spec;
}

json topology_to_json(const TopologySpec& spec, bool per_episode) {
    json j{{"kind", to_string(spec.kind)},
           {"n_agents", spec.n_agents},
           {"seed", spec.seed},
           {"reverse", spec.reverse},
           {"bidirectional", spec.bidirectional},
           {"per_episode", per_episode}};
    if (spec.edge_prob) j["edge_prob"] = *spec.edge_prob;
    return j;
}

EpisodeConfig episode_from_json(const json& j) {
    expect_object(j, "episode");
    reject_unknown(j, "episode",
                   {"n_rounds", "n_labels", "gold_label", "target_label", "attacker_ids", "embedding_dim",
                    "benign_prior_mass", "answer_direction_scale", "noise_sigma", "persuasion_benign",
                    "persuasion_attacker", "entropy_gap", "contamination_decay", "tokens_per_message",
                    "entropy_base", "entropy_belief_coupling", "entropy_shape", "entropy_max"});
    EpisodeConfig e;
    take(j, "episode", "n_rounds", e.n_rounds);
    take(j, "episode", "n_labels", e.n_labels);
    take(j, "episode", "gold_label", e.gold_label);
    take(j, "episode", "target_label", e.target_label);
    take(j, "episode", "attacker_ids", e.attacker_ids);
    take(j, "episode", "embedding_dim", e.embedding_dim);
    take(j, "episode", "benign_prior_mass", e.benign_prior_mass);
    take(j, "episode", "answer_direction_scale", e.answer_direction_scale);
    take(j, "episode", "noise_sigma", e.noise_sigma);
    take(j, "episode", "persuasion_benign", e.persuasion_benign);
    take(j, "episode", "persuasion_attacker", e.persuasion_attacker);
    take(j, "episode", "entropy_gap", e.entropy_gap);
    take(j, "episode", "contamination_decay", e.contamination_decay);
    take(j, "episode", "tokens_per_message", e.tokens_per_message);
    take(j, "episode", "entropy_base", e.entropy_base);
    take(j, "episode", "entropy_belief_coupling", e.entropy_belief_coupling);
    take(j, "episode", "entropy_shape", e.entropy_shape);
    take(j, "episode", "entropy_max", e.entropy_max);
    return e;
}

json episode_to_json(const EpisodeConfig& e) {
    return json{{"n_rounds", e.n_rounds},
                {"n_labels", e.n_labels},
                {"gold_label", e.gold_label},
                {"target_label", e.target_label},
                {"attacker_ids", e.attacker_ids},
                {"embedding_dim", e.embedding_dim},
                {"benign_prior_mass", e.benign_prior_mass},
                {"answer_direction_scale", e.answer_direction_scale},
                {"noise_sigma", e.noise_sigma},
                {"persuasion_benign", e.persuasion_benign},
                {"persuasion_attacker", e.persuasion_attacker},
                {"entropy_gap", e.entropy_gap},
                {"contamination_decay", e.contamination_decay},
                {"tokens_per_message", e.tokens_per_message},
                {"entropy_base", e.entropy_base},
                {"entropy_belief_coupling", e.entropy_belief_coupling},
                {"entropy_shape", e.entropy_shape},
                {"entropy_max", e.entropy_max}};
}

AttackConfig attack_from_json(const json& j) {
    expect_object(j, "attack");
    reject_unknown(j, "attack",
                   {"kind", "tau", "eps", "tau_wrapper", "payload_budget", "wrapper_len", "n_candidates",
                    "obvious_min_dist", "tau_mode"});
    AttackConfig a;
    take_enum(j, "attack", "kind", attack_kind_from_string, a.kind);
    take(j, "attack", "tau", a.tau);
    take(j, "attack", "eps", a.eps);
    take(j, "attack", "tau_wrapper", a.tau_wrapper);
    take(j, "attack", "payload_budget", a.payload_budget);
    take(j, "attack", "wrapper_len", a.wrapper_len);
    take(j, "attack", "n_candidates", a.n_candidates);
    take(j, "attack", "obvious_min_dist", a.obvious_min_dist);
    take_enum(j, "attack", "tau_mode", tau_mode_from_string, a.tau_mode);
    return a;
}

json attack_to_json(const AttackConfig& a) {
    return json{{"kind", to_string(a.kind)},
                {"tau", a.tau},
                {"eps", a.eps},
                {"tau_wrapper", a.tau_wrapper},
                {"payload_budget", a.payload_budget},
                {"wrapper_len", a.wrapper_len},
                {"n_candidates", a.n_candidates},
                {"obvious_min_dist", a.obvious_min_dist},
                {"tau_mode", to_string(a.tau_mode)}};
}

ConfidenceDefenseConfig confidence_defense_from_json(const json& j) {
    expect_object(j, "defense.confidence");
    reject_unknown(j, "defense.confidence",
                   {"strategy", "top_k", "g_map", "prune_delta", "downweight_alpha"});
    ConfidenceDefenseConfig c;
    take_enum(j, "defense.confidence", "strategy", confidence_strategy_from_string, c.strategy);
    take(j, "defense.confidence", "top_k", c.params.top_k);
    take_enum(j, "defense.confidence", "g_map", g_map_from_string, c.params.g_map);
    take(j, "defense.confidence", "prune_delta", c.params.prune_delta);
    take(j, "defense.confidence", "downweight_alpha", c.params.downweight_alpha);
    return c;
}

json confidence_defense_to_json(const ConfidenceDefenseConfig& c) {
    return json{{"strategy", to_string(c.strategy)},
                {"top_k", c.params.top_k},
                {"g_map", to_string(c.params.g_map)},
                {"prune_delta", c.params.prune_delta},
                {"downweight_alpha", c.params.downweight_alpha}};
}

EmbeddingDefenseConfig embedding_defense_from_json(const json& j) {
    expect_object(j, "defense.embedding");
    reject_unknown(j, "defense.embedding",
                   {"scorer", "lambda", "scorer_path", "knn_k", "knn_offset", "train_episodes",
                    "train_iterations", "train_learning_rate", "train_seed_base"});
    EmbeddingDefenseConfig e;
    take(j, "defense.embedding", "scorer", e.scorer);
    take(j, "defense.embedding", "lambda", e.lambda);
    take(j, "defense.embedding", "scorer_path", e.scorer_path);
    take(j, "defense.embedding", "knn_k", e.knn_k);
    take(j, "defense.embedding", "knn_offset", e.knn_offset);
    take(j, "defense.embedding", "train_episodes", e.train_episodes);
    take(j, "defense.embedding", "train_iterations", e.train_iterations);
    take(j, "defense.embedding", "train_learning_rate", e.train_learning_rate);
    take(j, "defense.embedding", "train_seed_base", e.train_seed_base);
    return e;
}

json embedding_defense_to_json(const EmbeddingDefenseConfig& e) {
    return json{{"scorer", e.scorer},
                {"lambda", e.lambda},
                {"scorer_path", e.scorer_path},
                {"knn_k", e.knn_k},
                {"knn_offset", e.knn_offset},
                {"train_episodes", e.train_episodes},
                {"train_iterations", e.train_iterations},
                {"train_learning_rate", e.train_learning_rate},
                {"train_seed_base", e.train_seed_base}};
}

DefenseConfig defense_from_json(const json& j) {
    expect_object(j, "defense");
    reject_unknown(j, "defense", {"name", "order", "confidence", "embedding"});
    DefenseConfig d;
    take(j, "defense", "name", d.name);
    take_enum(j, "defense", "order", defense_order_from_string, d.order);
    if (auto it = j.find("confidence"); it != j.end() && !it->is_null())
        d.confidence = confidence_defense_from_json(*it);
    if (auto it = j.find("embedding"); it != j.end() && !it->is_null())
        d.embedding = embedding_defense_from_json(*it);
    return d;
}

json defense_to_json(const DefenseConfig& d) {
    json j{{"name", d.name}, {"order", to_string(d.order)}};
    if (d.confidence) j["confidence"] = confidence_defense_to_json(*d.confidence);
    if (d.embedding) j["embedding"] = embedding_defense_to_json(*d.embedding);
    return j;
}

BackendConfig backend_from_json(const json& j) {
    expect_object(j, "backend");
    reject_unknown(j, "backend",
                   {"kind", "base_url", "model", "api_key_env", "top_n_logprobs", "max_retries",
                    "backoff_initial_s", "backoff_max_s", "temperature", "max_tokens", "prompt_dir",
                    "transcript_path"});
    BackendConfig b;
    take_enum(j, "backend", "kind", backend_kind_from_string, b.kind);
    take(j, "backend", "base_url", b.base_url);
    take(j, "backend", "model", b.model);
    take(j, "backend", "api_key_env", b.api_key_env);
    take(j, "backend", "top_n_logprobs", b.top_n_logprobs);
    take(j, "backend", "max_retries", b.max_retries);
    take(j, "backend", "backoff_initial_s", b.backoff_initial_s);
    take(j, "backend", "backoff_max_s", b.backoff_max_s);
    take(j, "backend", "temperature", b.temperature);
    take(j, "backend", "max_tokens", b.max_tokens);
    take(j, "backend", "prompt_dir", b.prompt_dir);
    take(j, "backend", "transcript_path", b.transcript_path);
    return b;
}

json backend_to_json(const BackendConfig& b) {
    return json{{"kind", to_string(b.kind)},
                {"base_url", b.base_url},
                {"model", b.model},
                {"api_key_env", b.api_key_env},
                {"top_n_logprobs", b.top_n_logprobs},
                {"max_retries", b.max_retries},
                {"backoff_initial_s", b.backoff_initial_s},
                {"backoff_max_s", b.backoff_max_s},
                {"temperature", b.temperature},
                {"max_tokens", b.max_tokens},
                {"prompt_dir", b.prompt_dir},
                {"transcript_path", b.transcript_path}};
}

SweepConfig sweep_from_json(const json& j) {
    expect_object(j, "sweep");
    reject_unknown(j, "sweep", {"topologies", "edge_probs"});
    SweepConfig s;
    take(j, "sweep", "topologies", s.topologies);
    take(j, "sweep", "edge_probs", s.edge_probs);
    return s;
}

json sweep_to_json(const SweepConfig& s) {
    return json{{"topologies", s.topologies}, {"edge_probs", s.edge_probs}};
}

}  // namespace

std::string DefenseConfig::display_name() const {
    if (!name.empty()) return name;
    std::string out;
    if (confidence) out += "conf:" + to_string(confidence->strategy);
    if (embedding) {
        if (!out.empty()) out += "+";
        out += "emb:" + embedding->scorer;
    }
    return out.empty() ? "none" : out;
}

void RunConfig::validate() const {
    if (n_seeds < 1) throw ConfigError("config: n_seeds must be at least 1");
    if (n_threads < 1) throw ConfigError("config: n_threads must be at least 1");
    if (output_dir.empty()) throw ConfigError("config: output_dir must not be empty");
    topology.validate();
    EpisodeConfig e = episode;
    e.n_agents = topology.n_agents;
    if (!attack) e.attacker_ids.clear();
    e.validate();
    if (attack) {
        attack->validate();
        if (episode.attacker_ids.empty())
            throw ConfigError("config: attack configured but attacker_ids is empty");
        if (attack->tau_mode == TauMode::margin_radius && !defense.embedding)
            throw ConfigError("config: tau_mode margin_radius needs an embedding defense");
    }
    if (defense.confidence) defense.confidence->params.validate();
    if (defense.embedding) {
        const auto& d = *defense.embedding;
        if (d.scorer != "linear" && d.scorer != "knn")
            throw ConfigError("config: defense.embedding.scorer must be \"linear\" or \"knn\"");
        if (!(d.lambda >= 0.0 && d.lambda <= 1.0))
            throw ConfigError("config: defense.embedding.lambda must lie in [0, 1]");
        if (d.knn_k < 1) throw ConfigError("config: defense.embedding.knn_k must be at least 1");
        if (d.train_episodes < 1)
            throw ConfigError("config: defense.embedding.train_episodes must be at least 1");
        if (d.train_iterations < 1)
            throw ConfigError("config: defense.embedding.train_iterations must be at least 1");
        if (!(d.train_learning_rate > 0.0))
            throw ConfigError("config: defense.embedding.train_learning_rate must be positive");
    }
    if (backend.top_n_logprobs < 1) throw ConfigError("config: backend.top_n_logprobs must be at least 1");
    if (backend.max_retries < 0) throw ConfigError("config: backend.max_retries must be non-negative");
    if (!(backend.backoff_initial_s > 0.0))
        throw ConfigError("config: backend.backoff_initial_s must be positive");
    if (backend.backoff_max_s < backend.backoff_initial_s)
        throw ConfigError("config: backend.backoff_max_s must be at least backoff_initial_s");
    if (backend.max_tokens < 1) throw ConfigError("config: backend.max_tokens must be at least 1");
    if (sweep.topologies.empty()) throw ConfigError("config: sweep.topologies must not be empty");
    bool wants_sparse = false;
    for (const auto& t : sweep.topologies) {
        if (topology_kind_from_string(t) == TopologyKind::sparse_random) wants_sparse = true;
    }
    if (wants_sparse && sweep.edge_probs.empty())
        throw ConfigError("config: sweep.edge_probs must not be empty when sweeping sparse_random");
    for (double p : sweep.edge_probs)
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("config: sweep.edge_probs entries must lie in [0, 1]");
}

std::vector<std::uint64_t> RunConfig::seeds() const {
    std::vector<std::uint64_t> out(static_cast<std::size_t>(n_seeds));
    std::iota(out.begin(), out.end(), seed);
    return out;
}

json RunConfig::to_json() const {
    json j{{"seed", seed},
           {"n_seeds", n_seeds},
           {"n_threads", n_threads},
           {"topology", topology_to_json(topology, topology_per_episode)},
           {"episode", episode_to_json(episode)},
           {"defense", defense_to_json(defense)},
           {"backend", backend_to_json(backend)},
           {"sweep", sweep_to_json(sweep)}};
    if (attack) j["attack"] = attack_to_json(*attack);
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    expect_object(j, "top level");
    reject_unknown(j, "top level",
                   {"seed", "n_seeds", "n_threads", "output_dir", "topology", "episode", "attack",
                    "defense", "backend", "sweep"});
    RunConfig cfg;
    take(j, "top level", "seed", cfg.seed);
    take(j, "top level", "n_seeds", cfg.n_seeds);
    take(j, "top level", "n_threads", cfg.n_threads);
    take(j, "top level", "output_dir", cfg.output_dir);
    if (auto it = j.find("topology"); it != j.end() && !it->is_null())
        cfg.topology = topology_from_json(*it, cfg.topology_per_episode);
    if (auto it = j.find("episode"); it != j.end() && !it->is_null()) cfg.episode = episode_from_json(*it);
    if (auto it = j.find("attack"); it != j.end() && !it->is_null()) cfg.attack = attack_from_json(*it);
    if (auto it = j.find("defense"); it != j.end() && !it->is_null()) cfg.defense = defense_from_json(*it);
    if (auto it = j.find("backend"); it != j.end() && !it->is_null()) cfg.backend = backend_from_json(*it);
    if (auto it = j.find("sweep"); it != j.end() && !it->is_null()) cfg.sweep = sweep_from_json(*it);
    return cfg;
}

nlohmann::json apply_override(nlohmann::json doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override needs key=value: " + assignment);
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;  // unquoted strings are taken literally
    }
    json* cur = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key =
            dot == std::string::npos ? path.substr(start) : path.substr(start, dot - start);
        if (key.empty()) throw ConfigError("override has an empty path segment: " + assignment);
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            break;
        }
        if (!cur->contains(key) || !(*cur)[key].is_object()) (*cur)[key] = json::object();
        cur = &(*cur)[key];
        start = dot + 1;
    }
    return doc;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file: " + path);
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("config: " + path + " is not valid JSON: " + std::string(e.what()));
        }
    }
    for (const auto& o : overrides) doc = apply_override(std::move(doc), o);
    RunConfig cfg = RunConfig::from_json(doc);
    cfg.validate();
    return cfg;
}

RunSetup materialize(const RunConfig& cfg) {
    RunSetup setup;
    setup.topology = cfg.topology;
    setup.topology_per_episode = cfg.topology_per_episode;
    setup.episode = cfg.episode;
    setup.episode.n_agents = cfg.topology.n_agents;
    if (!cfg.attack) setup.episode.attacker_ids.clear();
    setup.attack = cfg.attack;

    DefensePlan plan;
    plan.order = cfg.defense.order;
    plan.name = cfg.defense.display_name();
    if (cfg.defense.confidence)
        plan.confidence = ConfidenceDefense{cfg.defense.confidence->params, cfg.defense.confidence->strategy};
    if (cfg.defense.embedding) {
        const auto& d = *cfg.defense.embedding;
        EmbeddingDefense def;
        def.lambda = d.lambda;
        if (d.scorer == "knn") {
            def.rebuild_knn = true;
            def.knn_k = d.knn_k;
            def.knn_offset = d.knn_offset;
        } else if (!d.scorer_path.empty()) {
            std::ifstream in(d.scorer_path);
            if (!in) throw IoError("cannot open scorer file: " + d.scorer_path);
            json sj;
            try {
                sj = json::parse(in);
            } catch (const json::exception& e) {
                throw ConfigError("scorer file " + d.scorer_path + " is not valid JSON: " +
                                  std::string(e.what()));
            }
            def.scorer = scorer_from_json(sj);
        } else {
            RunSetup base = setup;  // defense-free probe runs for training data
            if (base.episode.attacker_ids.empty()) {
                base.episode.attacker_ids = cfg.episode.attacker_ids.empty()
                                                ? std::vector<AgentId>{cfg.topology.n_agents - 1}
                                                : cfg.episode.attacker_ids;
            }
            std::vector<std::uint64_t> train_seeds(static_cast<std::size_t>(d.train_episodes));
            std::iota(train_seeds.begin(), train_seeds.end(), d.train_seed_base);
            def.scorer = train_scorer_on_obvious(base, d.lambda, train_seeds,
                                                 TrainParams{d.train_iterations, d.train_learning_rate});
        }
        plan.embedding = def;
    }
    setup.defense = plan;
    return setup;
}

}  // namespace masim
