#include "masim/episode.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "masim/errors.hpp"

namespace masim {

std::string to_string(Role r) { return r == Role::benign ? "benign" : "attacker"; }

Role role_from_string(const std::string& s) {
    if (s == "benign") return Role::benign;
    if (s == "attacker") return Role::attacker;
    throw ConfigError("unknown role: " + s);
}

std::string to_string(AttackKind k) {
    switch (k) {
        case AttackKind::none: return "none";
        case AttackKind::obvious: return "obvious";
        case AttackKind::drift: return "drift";
        case AttackKind::wrapper: return "wrapper";
        case AttackKind::chaos: return "chaos";
    }
    throw DomainError("unknown attack kind");
}

AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "none") return AttackKind::none;
    if (s == "obvious") return AttackKind::obvious;
    if (s == "drift") return AttackKind::drift;
    if (s == "wrapper") return AttackKind::wrapper;
    if (s == "chaos") return AttackKind::chaos;
    throw ConfigError("unknown attack kind: " + s);
}

Label answer_of(const Belief& b) {
    if (b.logits.size() == 0) throw DomainError("answer_of: empty belief");
    if (!b.logits.allFinite()) throw DomainError("answer_of: non-finite logits");
    Label best = 0;
    for (int i = 1; i < b.logits.size(); ++i)
        if (b.logits[i] > b.logits[best]) best = i;
    return best;
}

double belief_entropy(const Belief& b) {
    if (b.logits.size() == 0) throw DomainError("belief_entropy: empty belief");
    const double m = b.logits.maxCoeff();
    Eigen::VectorXd e = (b.logits.array() - m).exp();
    const double z = e.sum();
    double h = 0.0;
    for (int i = 0; i < e.size(); ++i) {
        const double p = e[i] / z;
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

void EpisodeConfig::validate() const {
    if (n_agents < 2) throw ConfigError("episode: n_agents must be at least 2");
    if (n_rounds < 0) throw ConfigError("episode: n_rounds must be non-negative");
    if (n_labels < 2) throw ConfigError("episode: n_labels must be at least 2");
    if (gold_label < 0 || gold_label >= n_labels) throw ConfigError("episode: gold_label out of range");
    if (target_label < 0 || target_label >= n_labels) throw ConfigError("episode: target_label out of range");
    if (target_label == gold_label) throw ConfigError("episode: target_label must differ from gold_label");
    std::set<AgentId> ids(attacker_ids.begin(), attacker_ids.end());
    if (ids.size() != attacker_ids.size()) throw ConfigError("episode: duplicate attacker ids");
    for (AgentId a : attacker_ids)
        if (a < 0 || a >= n_agents) throw ConfigError("episode: attacker id out of range");
    if (static_cast<int>(ids.size()) >= n_agents)
        throw ConfigError("episode: at least one benign agent is required");
    if (embedding_dim < 2) throw ConfigError("episode: embedding_dim must be at least 2");
    if (!(benign_prior_mass > 0.0 && benign_prior_mass < 1.0))
        throw ConfigError("episode: benign_prior_mass must lie in (0, 1)");
    if (answer_direction_scale < 0.0) throw ConfigError("episode: answer_direction_scale must be non-negative");
    if (noise_sigma < 0.0) throw ConfigError("episode: noise_sigma must be non-negative");
    if (!(persuasion_benign > 0.0)) throw ConfigError("episode: persuasion_benign must be positive");
    if (persuasion_attacker < persuasion_benign)
        throw ConfigError("episode: persuasion_attacker must be at least persuasion_benign");
    if (entropy_gap < 0.0) throw ConfigError("episode: entropy_gap must be non-negative");
    if (contamination_decay < 0.0) throw ConfigError("episode: contamination_decay must be non-negative");
    if (tokens_per_message < 1) throw ConfigError("episode: tokens_per_message must be positive");
    if (entropy_base < 0.0) throw ConfigError("episode: entropy_base must be non-negative");
    if (entropy_belief_coupling < 0.0) throw ConfigError("episode: entropy_belief_coupling must be non-negative");
    if (!(entropy_shape > 0.0)) throw ConfigError("episode: entropy_shape must be positive");
    if (!(entropy_max > 0.0)) throw ConfigError("episode: entropy_max must be positive");
}

bool EpisodeConfig::is_attacker(AgentId a) const {
    return std::find(attacker_ids.begin(), attacker_ids.end(), a) != attacker_ids.end();
}

std::vector<AgentId> EpisodeConfig::benign_agents() const {
    std::vector<AgentId> out;
    for (AgentId a = 0; a < n_agents; ++a)
        if (!is_attacker(a)) out.push_back(a);
    return out;
}

std::vector<Eigen::VectorXd> EpisodeState::benign_support(int r) const {
    if (r < 0 || r >= static_cast<int>(history.size()))
        throw DomainError("benign_support: round out of range");
    std::vector<Eigen::VectorXd> out;
    for (const Message& m : history[r])
        if (!config.is_attacker(m.author)) out.push_back(m.embedding);
    return out;
}

namespace {

Eigen::VectorXd normalized_or_throw(const Eigen::VectorXd& v, const char* who) {
    const double n = v.norm();
    if (n < 1e-12) throw DomainError(std::string(who) + ": degenerate embedding norm");
    return v / n;
}

// logit vector placing mass q0 on one label, the rest uniform
Eigen::VectorXd prior_logits(int n_labels, Label on, double q0) {
    Eigen::VectorXd logits = Eigen::VectorXd::Zero(n_labels);
    logits[on] = std::log(q0 * (n_labels - 1) / (1.0 - q0));
    return logits;
}

Message draft_at(const EpisodeState& state, AgentId agent, int round, const Eigen::VectorXd& context) {
    const EpisodeConfig& cfg = state.config;
    Message m;
    m.author = agent;
    m.round = round;
    m.claim = answer_of(state.beliefs[agent]);
    RngStream noise(state.seed, static_cast<std::uint64_t>(agent), static_cast<std::uint64_t>(round),
                    Draw::draft_noise);
    Eigen::VectorXd raw = context + cfg.answer_direction_scale * state.label_dirs[m.claim] +
                          noise.gaussian_vector(cfg.embedding_dim, cfg.noise_sigma);
    m.embedding = normalized_or_throw(raw, "benign_draft");
    m.entropy_profile = draw_entropy_profile(state, agent, round, Draw::entropy);
    m.persuasion = cfg.persuasion_benign;
    return m;
}

}  // namespace

EpisodeState init_episode(const EpisodeConfig& config, const Topology& topology, std::uint64_t seed) {
    config.validate();
    if (topology.n_agents() != config.n_agents)
        throw ConfigError("init_episode: topology and episode disagree on n_agents");

    EpisodeState st{config, topology, seed, {}, {}, {}, {}, {}, 0};
    RngStream anchor_rng(seed, 0, 0, Draw::anchor);
    st.anchor = anchor_rng.unit_vector(config.embedding_dim);
    st.label_dirs.reserve(config.n_labels);
    for (Label l = 0; l < config.n_labels; ++l) {
        RngStream r(seed, static_cast<std::uint64_t>(l), 0, Draw::label_dir);
        st.label_dirs.push_back(r.unit_vector(config.embedding_dim));
    }

    st.beliefs.resize(config.n_agents);
    for (AgentId a = 0; a < config.n_agents; ++a) {
        if (config.is_attacker(a)) {
            // fixed commitment to the target; never updated
            Eigen::VectorXd logits = Eigen::VectorXd::Zero(config.n_labels);
            logits[config.target_label] = 50.0;
            st.beliefs[a] = Belief{logits};
        } else {
            st.beliefs[a] = Belief{prior_logits(config.n_labels, config.gold_label, config.benign_prior_mass)};
        }
    }

    // round 0: one anchor draft per benign agent seeds the support
    st.history.resize(1);
    st.delivered.resize(1);
    for (AgentId a : config.benign_agents()) {
        st.history[0].push_back(draft_at(st, a, 0, st.anchor));
        st.delivered[0].push_back(1);
    }
    return st;
}

Message benign_draft(const EpisodeState& state, AgentId agent, int round) {
    if (agent < 0 || agent >= state.config.n_agents) throw DomainError("benign_draft: agent out of range");
    if (state.config.is_attacker(agent)) throw DomainError("benign_draft: agent is an attacker");
    if (round < 1) throw DomainError("benign_draft: round must be at least 1");

    Eigen::VectorXd context = state.anchor;
    if (round > 1) {
        const int prev = round - 1;
        if (prev >= static_cast<int>(state.history.size()))
            throw DomainError("benign_draft: previous round not available");
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(state.config.embedding_dim);
        int got = 0;
        const auto& in = state.topology.in_neighbors(agent);
        for (std::size_t i = 0; i < state.history[prev].size(); ++i) {
            const Message& m = state.history[prev][i];
            if (!state.delivered[prev][i]) continue;
            if (std::find(in.begin(), in.end(), m.author) == in.end()) continue;
            sum += m.embedding;
            ++got;
        }
        if (got > 0) context = sum / got;
    }
    return draft_at(state, agent, round, context);
}

Belief belief_update(const Belief& before, std::vector<std::pair<Label, double>> incoming, int n_labels) {
    if (before.logits.size() != n_labels) throw DomainError("belief_update: belief size mismatch");
    for (const auto& [claim, weight] : incoming) {
        if (claim < 0 || claim >= n_labels) throw DomainError("belief_update: claim out of range");
        if (weight < 0.0) throw DomainError("belief_update: negative weight");
    }
    // canonical order makes the accumulation independent of list order
    std::sort(incoming.begin(), incoming.end());
    Eigen::VectorXd add = Eigen::VectorXd::Zero(n_labels);
    for (const auto& [claim, weight] : incoming) add[claim] += weight;
    return Belief{before.logits + add};
}

double contamination(const EpisodeState& state) {
    const auto benign = state.config.benign_agents();
    int hit = 0;
    for (AgentId a : benign)
        if (answer_of(state.beliefs[a]) == state.config.target_label) ++hit;
    return static_cast<double>(hit) / benign.size();
}

double entropy_profile_mean(const EpisodeState& state, AgentId agent) {
    const EpisodeConfig& cfg = state.config;
    double mean = cfg.entropy_base +
                  cfg.entropy_belief_coupling * belief_entropy(state.beliefs[agent]) / std::log(cfg.n_labels);
    if (cfg.is_attacker(agent))
        mean += cfg.entropy_gap * std::pow(1.0 - contamination(state), cfg.contamination_decay);
    return mean;
}

std::vector<double> draw_entropy_profile(const EpisodeState& state, AgentId agent, RngStream& rng) {
    const EpisodeConfig& cfg = state.config;
    const double mean = entropy_profile_mean(state, agent);
    std::vector<double> profile(cfg.tokens_per_message);
    for (double& h : profile) {
        const double draw = mean > 0.0 ? rng.gamma(cfg.entropy_shape, mean / cfg.entropy_shape) : 0.0;
        h = std::clamp(draw, 0.0, cfg.entropy_max);
    }
    return profile;
}

std::vector<double> draw_entropy_profile(const EpisodeState& state, AgentId agent, int round, Draw purpose) {
    RngStream rng(state.seed, static_cast<std::uint64_t>(agent), static_cast<std::uint64_t>(round), purpose);
    return draw_entropy_profile(state, agent, rng);
}

}  // namespace masim
