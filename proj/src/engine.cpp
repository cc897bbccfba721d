#include "masim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <set>

#include "masim/errors.hpp"

namespace masim {

std::string to_string(ConfidenceStrategy s) {
    switch (s) {
        case ConfidenceStrategy::prune: return "prune";
        case ConfidenceStrategy::downweight: return "downweight";
        case ConfidenceStrategy::both: return "both";
    }
    throw DomainError("unknown confidence strategy");
}

ConfidenceStrategy confidence_strategy_from_string(const std::string& s) {
    if (s == "prune") return ConfidenceStrategy::prune;
    if (s == "downweight") return ConfidenceStrategy::downweight;
    if (s == "both") return ConfidenceStrategy::both;
    throw ConfigError("unknown confidence strategy: " + s);
}

std::string to_string(DefenseOrder o) {
    switch (o) {
        case DefenseOrder::confidence_first: return "confidence_first";
        case DefenseOrder::embedding_first: return "embedding_first";
    }
    throw DomainError("unknown defense order");
}

DefenseOrder defense_order_from_string(const std::string& s) {
    if (s == "confidence_first") return DefenseOrder::confidence_first;
    if (s == "embedding_first") return DefenseOrder::embedding_first;
    throw ConfigError("unknown defense order: " + s);
}

std::string to_string(PrunedBy p) {
    switch (p) {
        case PrunedBy::none: return "none";
        case PrunedBy::embedding: return "embedding";
        case PrunedBy::confidence: return "confidence";
    }
    throw DomainError("unknown pruned_by");
}

PrunedBy pruned_by_from_string(const std::string& s) {
    if (s == "none") return PrunedBy::none;
    if (s == "embedding") return PrunedBy::embedding;
    if (s == "confidence") return PrunedBy::confidence;
    throw ConfigError("unknown pruned_by: " + s);
}

Label majority_vote(const std::vector<Label>& answers, int n_labels) {
    if (answers.empty()) throw DomainError("majority_vote: no answers");
    std::vector<int> counts(n_labels, 0);
    for (Label a : answers) {
        if (a < 0 || a >= n_labels) throw DomainError("majority_vote: label out of range");
        ++counts[a];
    }
    Label best = 0;
    for (Label l = 1; l < n_labels; ++l)
        if (counts[l] > counts[best]) best = l;
    return best;
}

namespace {

double min_support_score(const AnyScorer& scorer, const SupportSet& support) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& z : support.points) m = std::min(m, score(scorer, z));
    return m;
}

// per-round radius for margin-driven attacks: benign margin over Lipschitz
double margin_radius(const AnyScorer& scorer, const SupportSet& support) {
    const double margin = min_support_score(scorer, support);
    const double lip = scorer_lipschitz(scorer);
    if (!(lip > 0.0)) throw DomainError("margin_radius: scorer has zero Lipschitz constant");
    return std::max(margin, 0.0) / lip;
}

AnyScorer round_scorer(const EmbeddingDefense& def, const SupportSet& support) {
    if (!def.rebuild_knn) return def.scorer;
    const int k = std::min<int>(def.knn_k, static_cast<int>(support.points.size()));
    return KnnScorer(support, std::max(k, 1), def.knn_offset);
}

}  // namespace

std::vector<RoundRecord> run_round(EpisodeState& state, int round, const DefensePlan& plan,
                                   const std::optional<AttackConfig>& attack, const std::string& run_id) {
    if (round != state.rounds_completed + 1) throw DomainError("run_round: rounds must advance one at a time");
    if (round != static_cast<int>(state.history.size())) throw DomainError("run_round: history out of sync");
    const EpisodeConfig& cfg = state.config;
    const int n = cfg.n_agents;

    SupportSet support{state.benign_support(round - 1), round - 1};

    state.history.emplace_back();
    state.delivered.emplace_back();
    auto& msgs = state.history[round];
    auto& delivered = state.delivered[round];

    for (AgentId a : cfg.benign_agents()) {
        msgs.push_back(benign_draft(state, a, round));
        delivered.push_back(1);
    }

    if (!cfg.attacker_ids.empty() && attack) {
        // effective radius for this round; margin mode reads the deployed scorer
        double effective_tau = attack->tau;
        if (attack->tau_mode == TauMode::margin_radius) {
            if (!plan.embedding)
                throw DomainError("run_round: margin_radius needs an embedding defense in the plan");
            const AnyScorer sc = round_scorer(*plan.embedding, support);
            const double r = margin_radius(sc, support);
            effective_tau = r > 0.0 ? r : 1e-6;
        }
        std::vector<AgentId> attackers = cfg.attacker_ids;
        std::sort(attackers.begin(), attackers.end());
        for (AgentId a : attackers) {
            msgs.push_back(attack_message(state, a, round, *attack, support, effective_tau));
            delivered.push_back(1);
        }
    } else {
        // attackers stay silent without an attack config
    }

    const std::size_t n_msgs = msgs.size();
    std::vector<double> confidence(n_msgs, 1.0);
    std::vector<double> emb_score(n_msgs, 0.0);
    std::vector<double> weight_mult(n_msgs, 1.0);
    std::vector<PrunedBy> pruned(n_msgs, PrunedBy::none);

    const ConfidenceConfig conf_cfg = plan.confidence ? plan.confidence->config : ConfidenceConfig{};
    for (std::size_t i = 0; i < n_msgs; ++i)
        confidence[i] = confidence_of_profile(msgs[i].entropy_profile, conf_cfg);

    auto apply_confidence = [&] {
        if (!plan.confidence) return;
        const auto strat = plan.confidence->strategy;
        if (strat == ConfidenceStrategy::prune || strat == ConfidenceStrategy::both) {
            for (int i : prune_by_confidence(confidence, conf_cfg.prune_delta)) {
                if (delivered[i]) {
                    delivered[i] = 0;
                    pruned[i] = PrunedBy::confidence;
                }
            }
        }
        if (strat == ConfidenceStrategy::downweight || strat == ConfidenceStrategy::both) {
            for (std::size_t i = 0; i < n_msgs; ++i)
                if (delivered[i]) weight_mult[i] = std::pow(confidence[i], conf_cfg.downweight_alpha);
        }
    };

    auto apply_embedding = [&] {
        std::vector<std::optional<Eigen::VectorXd>> by_agent(n);
        std::vector<char> active(n, 0);
        std::vector<int> msg_of_agent(n, -1);
        for (std::size_t i = 0; i < n_msgs; ++i) {
            by_agent[msgs[i].author] = msgs[i].embedding;
            active[msgs[i].author] = delivered[i];
            msg_of_agent[msgs[i].author] = static_cast<int>(i);
        }
        if (!plan.embedding) {
            // diagnostic only: distance to the current support, sign-flipped
            // so that larger still means more benign
            for (std::size_t i = 0; i < n_msgs; ++i)
                emb_score[i] = -dist_to_support(msgs[i].embedding, support);
            return;
        }
        const AnyScorer sc = round_scorer(*plan.embedding, support);
        const auto refined = refine_embeddings(by_agent, active, state.topology, plan.embedding->lambda);
        for (std::size_t i = 0; i < n_msgs; ++i) {
            const auto& r = refined[msgs[i].author];
            emb_score[i] = score(sc, r ? *r : msgs[i].embedding);
            if (delivered[i] && emb_score[i] < 0.0) {
                delivered[i] = 0;
                pruned[i] = PrunedBy::embedding;
            }
        }
    };

    if (plan.order == DefenseOrder::confidence_first) {
        apply_confidence();
        apply_embedding();
    } else {
        apply_embedding();
        apply_confidence();
    }

    // synchronous belief update from delivered messages
    std::vector<Belief> next = state.beliefs;
    for (AgentId i : cfg.benign_agents()) {
        std::vector<std::pair<Label, double>> incoming;
        const auto& in = state.topology.in_neighbors(i);
        for (std::size_t m = 0; m < n_msgs; ++m) {
            if (!delivered[m]) continue;
            if (!std::binary_search(in.begin(), in.end(), msgs[m].author)) continue;
            incoming.emplace_back(msgs[m].claim, msgs[m].persuasion * weight_mult[m]);
        }
        next[i] = belief_update(state.beliefs[i], std::move(incoming), cfg.n_labels);
    }
    state.beliefs = std::move(next);
    state.rounds_completed = round;

    std::vector<std::size_t> order(n_msgs);
    for (std::size_t i = 0; i < n_msgs; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return msgs[a].author < msgs[b].author; });

    std::vector<RoundRecord> records;
    records.reserve(n_msgs);
    for (std::size_t i : order) {
        RoundRecord r;
        r.run_id = run_id;
        r.round = round;
        r.agent = msgs[i].author;
        r.role = state.role_of(msgs[i].author);
        r.claim = msgs[i].claim;
        r.confidence = confidence[i];
        r.embedding_score = emb_score[i];
        r.pruned_by = pruned[i];
        r.attack_kind = msgs[i].attack_kind;
        r.fallback = msgs[i].fallback;
        r.embedding = msgs[i].embedding;
        records.push_back(std::move(r));
    }
    return records;
}

EpisodeRecord run_episode(const RunSetup& setup, std::uint64_t seed) {
    TopologySpec tspec = setup.topology;
    if (setup.topology_per_episode) tspec.seed = seed;
    const Topology topo = build_topology(tspec);

    EpisodeConfig ecfg = setup.episode;
    ecfg.n_agents = tspec.n_agents;
    if (setup.attack) setup.attack->validate();

    EpisodeState state = init_episode(ecfg, topo, seed);
    const std::string run_id = "s" + std::to_string(seed);

    EpisodeRecord rec;
    rec.seed = seed;
    rec.n_agents = ecfg.n_agents;
    rec.n_rounds = ecfg.n_rounds;
    rec.gold = ecfg.gold_label;
    rec.target = ecfg.target_label;
    rec.topology_name = display_name(tspec);
    rec.attack_name = setup.attack ? to_string(setup.attack->kind) : "none";
    rec.defense_name = setup.defense.name;

    for (int r = 1; r <= ecfg.n_rounds; ++r) {
        auto rows = run_round(state, r, setup.defense, setup.attack, run_id);
        rec.rounds.insert(rec.rounds.end(), rows.begin(), rows.end());
    }

    for (AgentId a : ecfg.benign_agents()) rec.final_answers.push_back(answer_of(state.beliefs[a]));
    rec.final_answer = majority_vote(rec.final_answers, ecfg.n_labels);
    return rec;
}

std::vector<EpisodeRecord> run_batch(const RunSetup& setup, const std::vector<std::uint64_t>& seeds,
                                     int n_threads) {
    if (seeds.empty()) throw ConfigError("run_batch: no seeds");
    std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
    if (unique.size() != seeds.size()) throw ConfigError("run_batch: duplicate seeds");
    if (n_threads < 1) throw ConfigError("run_batch: n_threads must be positive");

    std::vector<EpisodeRecord> out(seeds.size());
    if (n_threads == 1 || seeds.size() == 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) out[i] = run_episode(setup, seeds[i]);
        return out;
    }
    std::vector<std::future<void>> parts;
    const int workers = std::min<int>(n_threads, static_cast<int>(seeds.size()));
    for (int t = 0; t < workers; ++t) {
        parts.push_back(std::async(std::launch::async, [&, t] {
            for (std::size_t i = t; i < seeds.size(); i += workers) out[i] = run_episode(setup, seeds[i]);
        }));
    }
    for (auto& p : parts) p.get();
    return out;
}

LinearScorer train_scorer_on_obvious(const RunSetup& base, double lambda,
                                     const std::vector<std::uint64_t>& seeds, const TrainParams& params) {
    RunSetup setup = base;
    AttackConfig atk;
    if (base.attack && base.attack->kind == AttackKind::obvious) atk = *base.attack;
    atk.kind = AttackKind::obvious;
    atk.tau_mode = TauMode::fixed;
    setup.attack = atk;
    setup.defense = DefensePlan{};

    std::vector<Eigen::VectorXd> embeddings;
    std::vector<char> labels;
    for (std::uint64_t seed : seeds) {
        TopologySpec tspec = setup.topology;
        if (setup.topology_per_episode) tspec.seed = seed;
        const Topology topo = build_topology(tspec);
        const EpisodeRecord rec = run_episode(setup, seed);
        for (int r = 1; r <= rec.n_rounds; ++r) {
            std::vector<std::optional<Eigen::VectorXd>> by_agent(rec.n_agents);
            std::vector<char> active(rec.n_agents, 1);
            for (const RoundRecord& row : rec.rounds)
                if (row.round == r) by_agent[row.agent] = row.embedding;
            const auto refined = refine_embeddings(by_agent, active, topo, lambda);
            for (const RoundRecord& row : rec.rounds) {
                if (row.round != r || !refined[row.agent]) continue;
                embeddings.push_back(*refined[row.agent]);
                labels.push_back(row.role == Role::benign ? 1 : 0);
            }
        }
    }
    return train_linear_scorer(embeddings, labels, params);
}

}  // namespace masim
