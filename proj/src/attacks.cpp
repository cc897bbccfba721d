#include "masim/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "masim/errors.hpp"

namespace masim {

std::string to_string(TauMode m) {
    switch (m) {
        case TauMode::fixed: return "fixed";
        case TauMode::margin_radius: return "margin_radius";
    }
    throw DomainError("unknown tau mode");
}

TauMode tau_mode_from_string(const std::string& s) {
    if (s == "fixed") return TauMode::fixed;
    if (s == "margin_radius") return TauMode::margin_radius;
    throw ConfigError("unknown tau mode: " + s);
}

void AttackConfig::validate() const {
    if (kind == AttackKind::none) throw ConfigError("attack: kind must not be none");
    if (!(tau > 0.0)) throw ConfigError("attack: tau must be positive");
    if (!(eps > 0.0)) throw ConfigError("attack: eps must be positive");
    if (!(tau_wrapper > 0.0)) throw ConfigError("attack: tau_wrapper must be positive");
    if (payload_budget < 1) throw ConfigError("attack: payload_budget must be at least 1");
    if (wrapper_len < 1) throw ConfigError("attack: wrapper_len must be at least 1");
    if (n_candidates < 1 || n_candidates > 64)
        throw ConfigError("attack: n_candidates must lie in [1, 64]");
    if (!(obvious_min_dist > 0.0)) throw ConfigError("attack: obvious_min_dist must be positive");
}

namespace {

Eigen::VectorXd normalized(const Eigen::VectorXd& v, const char* who) {
    const double n = v.norm();
    if (n < 1e-12) throw DomainError(std::string(who) + ": degenerate norm");
    return v / n;
}

const Message* previous_attacker_message(const EpisodeState& state, AgentId attacker, int round) {
    if (round < 2) return nullptr;
    const int prev = round - 1;
    if (prev >= static_cast<int>(state.history.size())) return nullptr;
    for (const Message& m : state.history[prev])
        if (m.author == attacker) return &m;
    return nullptr;
}

// support point the candidate cloud is centered on
Eigen::VectorXd base_point(const EpisodeState& state, AgentId attacker, int round, const SupportSet& support) {
    if (support.points.empty()) throw DomainError("attack: empty support");
    Eigen::VectorXd ref;
    if (const Message* prev = previous_attacker_message(state, attacker, round)) {
        ref = prev->embedding;
    } else {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(support.points[0].size());
        for (const auto& z : support.points) mean += z;
        ref = mean / static_cast<double>(support.points.size());
    }
    const Eigen::VectorXd* best = &support.points[0];
    double best_d = (support.points[0] - ref).norm();
    for (const auto& z : support.points) {
        const double d = (z - ref).norm();
        if (d < best_d) {
            best_d = d;
            best = &z;
        }
    }
    return *best;
}

Label modal_benign_answer(const EpisodeState& state) {
    std::vector<int> counts(state.config.n_labels, 0);
    for (AgentId a : state.config.benign_agents()) ++counts[answer_of(state.beliefs[a])];
    Label best = 0;
    for (Label l = 1; l < state.config.n_labels; ++l)
        if (counts[l] > counts[best]) best = l;
    return best;
}

// round-r messages agent i would see, with the candidate standing in for
// the attacker's slot; raw persuasion weights, no defense modeled
std::vector<std::pair<Label, double>> incoming_with_candidate(const EpisodeState& state, int round,
                                                              AgentId receiver, const Message& candidate) {
    std::vector<std::pair<Label, double>> incoming;
    const auto& senders = state.topology.in_neighbors(receiver);
    for (AgentId j : senders) {
        if (j == candidate.author) {
            incoming.emplace_back(candidate.claim, candidate.persuasion);
            continue;
        }
        if (round < static_cast<int>(state.history.size()))
            for (const Message& m : state.history[round])
                if (m.author == j) {
                    incoming.emplace_back(m.claim, m.persuasion);
                    break;
                }
    }
    return incoming;
}

double violation_amount(const Candidate& c, double tau, double eps, bool use_eps) {
    double v = std::max(c.dist - tau, 0.0);
    if (use_eps) v += std::max(c.drift_dist - eps, 0.0);
    return v;
}

Message fallback_choice(const std::vector<Candidate>& candidates, double tau, double eps, bool use_eps) {
    std::size_t best = 0;
    double best_v = violation_amount(candidates[0], tau, eps, use_eps);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double v = violation_amount(candidates[i], tau, eps, use_eps);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    Message m = candidates[best].message;
    m.fallback = true;
    return m;
}

}  // namespace

std::vector<Candidate> generate_candidates(const EpisodeState& state, AgentId attacker, int round,
                                           const AttackConfig& cfg, const SupportSet& support,
                                           double effective_tau) {
    if (!state.config.is_attacker(attacker)) throw DomainError("generate_candidates: agent is not an attacker");
    if (!(effective_tau > 0.0)) throw DomainError("generate_candidates: effective tau must be positive");
    const Eigen::VectorXd base = base_point(state, attacker, round, support);
    const Message* prev = previous_attacker_message(state, attacker, round);

    std::vector<Label> wrong;
    if (cfg.kind == AttackKind::chaos) {
        const Label majority = modal_benign_answer(state);
        for (Label l = 0; l < state.config.n_labels; ++l)
            if (l != majority) wrong.push_back(l);
    }

    RngStream dir_rng(state.seed, static_cast<std::uint64_t>(attacker), static_cast<std::uint64_t>(round),
                      Draw::attack_dir);
    RngStream ent_rng(state.seed, static_cast<std::uint64_t>(attacker), static_cast<std::uint64_t>(round),
                      Draw::attack_entropy);

    std::vector<Candidate> out;
    out.reserve(cfg.n_candidates);
    for (int k = 0; k < cfg.n_candidates; ++k) {
        const double delta = effective_tau * static_cast<double>(cfg.n_candidates - k) / cfg.n_candidates;
        const Eigen::VectorXd u = dir_rng.unit_vector(state.config.embedding_dim);
        Candidate c;
        c.message.author = attacker;
        c.message.round = round;
        c.message.claim = cfg.kind == AttackKind::chaos ? wrong[k % wrong.size()] : state.config.target_label;
        c.message.embedding = normalized(base + delta * u, "generate_candidates");
        c.message.entropy_profile = draw_entropy_profile(state, attacker, ent_rng);
        c.message.persuasion = state.config.persuasion_attacker;
        c.message.attack_kind = cfg.kind;
        c.dist = dist_to_support(c.message.embedding, support);
        c.drift_dist = prev ? (c.message.embedding - prev->embedding).norm() : 0.0;
        out.push_back(std::move(c));
    }
    return out;
}

int flip_count(const Candidate& candidate, const EpisodeState& state, int round) {
    const Label target = state.config.target_label;
    int flips = 0;
    for (AgentId i : state.config.benign_agents()) {
        if (!state.topology.has_edge(candidate.message.author, i)) continue;
        if (answer_of(state.beliefs[i]) == target) continue;
        const Belief after = belief_update(state.beliefs[i],
                                           incoming_with_candidate(state, round, i, candidate.message),
                                           state.config.n_labels);
        if (answer_of(after) == target) ++flips;
    }
    return flips;
}

double projected_disagreement(const Candidate& candidate, const EpisodeState& state, int round) {
    const auto benign = state.config.benign_agents();
    if (benign.size() < 2) return 0.0;
    std::vector<Label> answers;
    answers.reserve(benign.size());
    for (AgentId i : benign) {
        const Belief after = belief_update(state.beliefs[i],
                                           incoming_with_candidate(state, round, i, candidate.message),
                                           state.config.n_labels);
        answers.push_back(answer_of(after));
    }
    // ordered pairs with differing answers
    const std::size_t n = answers.size();
    std::size_t differ = 0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b && answers[a] != answers[b]) ++differ;
    return static_cast<double>(differ) / (n * (n - 1));
}

Message select_slow_drift(const std::vector<Candidate>& candidates, const EpisodeState& state, int round,
                          const AttackConfig& cfg, double effective_tau) {
    if (candidates.empty()) throw DomainError("select_slow_drift: no candidates");
    const bool use_eps = round >= 2;
    int best = -1, best_flips = -1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Candidate& c = candidates[i];
        if (c.dist > effective_tau) continue;
        if (use_eps && c.drift_dist > cfg.eps) continue;
        const int f = flip_count(c, state, round);
        if (f > best_flips) {
            best_flips = f;
            best = static_cast<int>(i);
        }
    }
    if (best < 0) return fallback_choice(candidates, effective_tau, cfg.eps, use_eps);
    return candidates[best].message;
}

Message select_chaos(const std::vector<Candidate>& candidates, const EpisodeState& state, int round,
                     const AttackConfig& cfg, double effective_tau) {
    (void)cfg;
    if (candidates.empty()) throw DomainError("select_chaos: no candidates");
    int best = -1;
    double best_obj = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Candidate& c = candidates[i];
        if (c.dist > effective_tau) continue;
        const double obj = projected_disagreement(c, state, round);
        if (obj > best_obj) {
            best_obj = obj;
            best = static_cast<int>(i);
        }
    }
    if (best < 0) return fallback_choice(candidates, effective_tau, 0.0, false);
    return candidates[best].message;
}

Message select_benign_wrapper(const EpisodeState& state, AgentId attacker, int round, const AttackConfig& cfg,
                              const SupportSet& support, double effective_tau) {
    if (!state.config.is_attacker(attacker)) throw DomainError("select_benign_wrapper: agent is not an attacker");
    const Eigen::VectorXd base = base_point(state, attacker, round, support);
    const Eigen::VectorXd& payload = state.label_dirs[state.config.target_label];
    const Message* prev = previous_attacker_message(state, attacker, round);

    RngStream dir_rng(state.seed, static_cast<std::uint64_t>(attacker), static_cast<std::uint64_t>(round),
                      Draw::wrapper_dir);
    RngStream ent_rng(state.seed, static_cast<std::uint64_t>(attacker), static_cast<std::uint64_t>(round),
                      Draw::attack_entropy);

    // wrapper embeddings near the support, payload share growing with l_B;
    // the composite is the length-weighted mean of the two parts
    struct WrapperCandidate {
        Candidate cand;
        double wrapper_dist = 0.0;
    };
    std::vector<WrapperCandidate> candidates;
    for (int k = 0; k < cfg.n_candidates; ++k) {
        const double delta = cfg.tau_wrapper * static_cast<double>(cfg.n_candidates - k) / cfg.n_candidates;
        const Eigen::VectorXd u = dir_rng.unit_vector(state.config.embedding_dim);
        const Eigen::VectorXd wrapper = normalized(base + delta * u, "select_benign_wrapper");
        const double wrapper_dist = dist_to_support(wrapper, support);
        for (int lb = 1; lb <= cfg.payload_budget; ++lb) {
            const double la = static_cast<double>(cfg.wrapper_len);
            Eigen::VectorXd comp = (la * wrapper + static_cast<double>(lb) * payload) / (la + lb);
            WrapperCandidate wc;
            wc.cand.message.author = attacker;
            wc.cand.message.round = round;
            wc.cand.message.claim = state.config.target_label;
            wc.cand.message.embedding = normalized(comp, "select_benign_wrapper");
            wc.cand.message.entropy_profile = draw_entropy_profile(state, attacker, ent_rng);
            wc.cand.message.persuasion =
                state.config.persuasion_attacker * static_cast<double>(lb) / cfg.payload_budget;
            wc.cand.message.attack_kind = AttackKind::wrapper;
            wc.cand.dist = dist_to_support(wc.cand.message.embedding, support);
            wc.cand.drift_dist = prev ? (wc.cand.message.embedding - prev->embedding).norm() : 0.0;
            wc.wrapper_dist = wrapper_dist;
            candidates.push_back(std::move(wc));
        }
    }

    int best = -1, best_flips = -1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].wrapper_dist > cfg.tau_wrapper) continue;
        if (candidates[i].cand.dist > effective_tau) continue;
        const int f = flip_count(candidates[i].cand, state, round);
        if (f > best_flips) {
            best_flips = f;
            best = static_cast<int>(i);
        }
    }
    if (best >= 0) return candidates[best].cand.message;

    std::size_t least = 0;
    double least_v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double v = std::max(candidates[i].wrapper_dist - cfg.tau_wrapper, 0.0) +
                         std::max(candidates[i].cand.dist - effective_tau, 0.0);
        if (v < least_v) {
            least_v = v;
            least = i;
        }
    }
    Message m = candidates[least].cand.message;
    m.fallback = true;
    return m;
}

Message obvious_message(const EpisodeState& state, AgentId attacker, int round, const AttackConfig& cfg,
                        const SupportSet& support) {
    if (!state.config.is_attacker(attacker)) throw DomainError("obvious_message: agent is not an attacker");
    if (support.points.empty()) throw DomainError("obvious_message: empty support");

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(support.points[0].size());
    for (const auto& z : support.points) mean += z;
    const Eigen::VectorXd c_hat = normalized(mean, "obvious_message");

    RngStream rng(state.seed, static_cast<std::uint64_t>(attacker), static_cast<std::uint64_t>(round),
                  Draw::obvious_dir);
    Eigen::VectorXd v;
    for (;;) {
        const Eigen::VectorXd u = rng.unit_vector(state.config.embedding_dim);
        Eigen::VectorXd t = u - u.dot(c_hat) * c_hat;
        if (t.norm() > 1e-9) {
            v = t / t.norm();
            break;
        }
    }

    // rotate away from the support mean until far enough from every point
    constexpr int kSteps = 64;
    Message m;
    m.author = attacker;
    m.round = round;
    m.claim = state.config.target_label;
    m.persuasion = state.config.persuasion_attacker;
    m.attack_kind = AttackKind::obvious;
    double best_dist = -1.0;
    Eigen::VectorXd best_h;
    for (int s = 1; s <= kSteps; ++s) {
        const double theta = std::numbers::pi * static_cast<double>(s) / kSteps;
        const Eigen::VectorXd h = std::cos(theta) * c_hat + std::sin(theta) * v;
        const double d = dist_to_support(h, support);
        if (d > best_dist) {
            best_dist = d;
            best_h = h;
        }
        if (d >= cfg.obvious_min_dist) {
            m.embedding = h;
            m.entropy_profile = draw_entropy_profile(state, attacker, round, Draw::attack_entropy);
            return m;
        }
    }
    m.embedding = best_h;
    m.fallback = true;  // support too spread out to reach the requested distance
    m.entropy_profile = draw_entropy_profile(state, attacker, round, Draw::attack_entropy);
    return m;
}

Message attack_message(const EpisodeState& state, AgentId attacker, int round, const AttackConfig& cfg,
                       const SupportSet& support, double effective_tau) {
    switch (cfg.kind) {
        case AttackKind::obvious:
            return obvious_message(state, attacker, round, cfg, support);
        case AttackKind::drift: {
            const auto cands = generate_candidates(state, attacker, round, cfg, support, effective_tau);
            return select_slow_drift(cands, state, round, cfg, effective_tau);
        }
        case AttackKind::wrapper:
            return select_benign_wrapper(state, attacker, round, cfg, support, effective_tau);
        case AttackKind::chaos: {
            const auto cands = generate_candidates(state, attacker, round, cfg, support, effective_tau);
            return select_chaos(cands, state, round, cfg, effective_tau);
        }
        case AttackKind::none:
            break;
    }
    throw DomainError("attack_message: bad attack kind");
}

}  // namespace masim
