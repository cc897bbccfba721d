#include "masim/llm_backend.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "masim/confidence.hpp"
#include "masim/errors.hpp"

namespace masim {

using nlohmann::json;

std::optional<Label> extract_answer(const std::string& text, int n_labels) {
    if (n_labels < 1) throw DomainError("extract_answer: n_labels must be positive");
    const std::string marker = "Answer:";
    const auto pos = text.rfind(marker);
    if (pos == std::string::npos) return std::nullopt;
    std::size_t i = pos + marker.size();
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size()) return std::nullopt;
    const char c = text[i];
    if (c < 'A' || c >= 'A' + n_labels) return std::nullopt;
    // reject a word that merely starts with the letter
    if (i + 1 < text.size() && std::isalnum(static_cast<unsigned char>(text[i + 1]))) return std::nullopt;
    return static_cast<Label>(c - 'A');
}

namespace {

std::vector<double> token_entropies(const std::vector<std::vector<double>>& per_token_logprobs) {
    std::vector<double> out;
    out.reserve(per_token_logprobs.size());
    for (const auto& lps : per_token_logprobs) {
        if (lps.empty()) continue;
        double m = lps.front();
        for (double lp : lps) m = std::max(m, lp);
        double z = 0.0;
        for (double lp : lps) z += std::exp(lp - m);
        double h = 0.0;
        for (double lp : lps) {
            const double p = std::exp(lp - m) / z;
            if (p > 0.0) h -= p * std::log(p);
        }
        out.push_back(h);
    }
    return out;
}

}  // namespace

double entropy_from_top_logprobs(const std::vector<std::vector<double>>& per_token_logprobs) {
    const auto hs = token_entropies(per_token_logprobs);
    if (hs.empty()) return 0.0;
    double sum = 0.0;
    for (double h : hs) sum += h;
    return sum / static_cast<double>(hs.size());
}

LlmClient::LlmClient(BackendConfig cfg) : cfg_(std::move(cfg)) {
    const std::string& url = cfg_.base_url;
    const std::string scheme = "http://";
    if (url.rfind("https://", 0) == 0)
        throw BackendError("https endpoints are not supported; front the API with a local http proxy");
    if (url.rfind(scheme, 0) != 0) throw BackendError("backend base_url must start with http://");
    const std::string rest = url.substr(scheme.size());
    const auto slash = rest.find('/');
    const std::string authority = slash == std::string::npos ? rest : rest.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    const auto colon = authority.find(':');
    if (colon == std::string::npos) {
        host_ = authority;
        port_ = 80;
    } else {
        host_ = authority.substr(0, colon);
        try {
            port_ = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw BackendError("backend base_url has an invalid port");
        }
    }
    if (host_.empty()) throw BackendError("backend base_url has an empty host");
    if (!cfg_.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
    }
}

ChatResult LlmClient::chat(const std::vector<ChatTurn>& turns) {
    json messages = json::array();
    for (const auto& t : turns) messages.push_back({{"role", t.role}, {"content", t.content}});
    const json request{{"model", cfg_.model},
                       {"messages", messages},
                       {"temperature", cfg_.temperature},
                       {"max_tokens", cfg_.max_tokens},
                       {"logprobs", true},
                       {"top_logprobs", cfg_.top_n_logprobs}};
    const std::string body = request.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            const double delay =
                std::min(cfg_.backoff_initial_s * std::pow(2.0, attempt - 1), cfg_.backoff_max_s);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client cli(host_, port_);
        cli.set_connection_timeout(10, 0);
        cli.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
        auto res = cli.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw BackendError("chat request failed with status " + std::to_string(res->status) + ": " +
                               res->body.substr(0, 200));
        json parsed;
        try {
            parsed = json::parse(res->body);
        } catch (const json::exception& e) {
            throw BackendError("chat response is not valid JSON: " + std::string(e.what()));
        }
        try {
            ChatResult out;
            out.attempts = attempt + 1;
            const auto& choice = parsed.at("choices").at(0);
            out.content = choice.at("message").at("content").get<std::string>();
            if (choice.contains("logprobs") && !choice["logprobs"].is_null()) {
                for (const auto& tok : choice["logprobs"].at("content")) {
                    std::vector<double> lps;
                    if (tok.contains("top_logprobs"))
                        for (const auto& alt : tok["top_logprobs"]) lps.push_back(alt.at("logprob").get<double>());
                    if (lps.empty() && tok.contains("logprob")) lps.push_back(tok.at("logprob").get<double>());
                    out.top_logprobs.push_back(std::move(lps));
                }
            }
            return out;
        } catch (const json::exception& e) {
            throw BackendError("chat response missing expected fields: " + std::string(e.what()));
        }
    }
    throw BackendError("chat request failed after " + std::to_string(cfg_.max_retries + 1) +
                       " attempts; last error: " + last_error);
}

namespace {

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open prompt file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

PromptSet load_prompts(const std::string& dir) {
    const std::filesystem::path base(dir);
    PromptSet p;
    p.system_benign = read_text_file(base / "system_benign.txt");
    p.system_attacker = read_text_file(base / "system_attacker.txt");
    p.round_user = read_text_file(base / "round_user.txt");
    p.question = read_text_file(base / "question.txt");
    return p;
}

std::string render_template(const std::string& tmpl, const std::map<std::string, std::string>& vars) {
    std::string out = tmpl;
    for (const auto& [key, value] : vars) {
        const std::string token = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), value);
            pos += value.size();
        }
    }
    return out;
}

EpisodeRecord run_llm_episode(const RunConfig& cfg, LlmClient& client, std::uint64_t seed) {
    TopologySpec tspec = cfg.topology;
    if (cfg.topology_per_episode) tspec.seed = seed;
    const Topology topo = build_topology(tspec);
    const int n = tspec.n_agents;

    EpisodeConfig ecfg = cfg.episode;
    ecfg.n_agents = n;
    if (!cfg.attack) ecfg.attacker_ids.clear();
    ecfg.validate();

    const PromptSet prompts = load_prompts(cfg.backend.prompt_dir);
    const ConfidenceConfig conf_cfg =
        cfg.defense.confidence ? cfg.defense.confidence->params : ConfidenceConfig{};
    const bool conf_active = cfg.defense.confidence.has_value();
    const bool conf_prune =
        conf_active && (cfg.defense.confidence->strategy == ConfidenceStrategy::prune ||
                        cfg.defense.confidence->strategy == ConfidenceStrategy::both);

    std::ofstream transcript;
    if (!cfg.backend.transcript_path.empty()) {
        transcript.open(cfg.backend.transcript_path, std::ios::binary | std::ios::app);
        if (!transcript) throw IoError("cannot open transcript file: " + cfg.backend.transcript_path);
    }

    EpisodeRecord rec;
    rec.seed = seed;
    rec.n_agents = n;
    rec.n_rounds = ecfg.n_rounds;
    rec.gold = ecfg.gold_label;
    rec.target = ecfg.target_label;
    rec.topology_name = display_name(tspec);
    rec.attack_name = cfg.attack ? to_string(cfg.attack->kind) : "none";
    rec.defense_name = cfg.defense.display_name();
    const std::string run_id = "s" + std::to_string(seed);

    std::vector<std::string> prev_delivered(n);  // rendered text, empty when withheld
    std::vector<Label> last_round_claims(n, -1);

    for (int round = 1; round <= ecfg.n_rounds; ++round) {
        std::vector<std::string> content(n);
        std::vector<double> confid(n, 1.0);
        std::vector<Label> claims(n, -1);
        std::vector<char> withheld(n, 0);

        for (AgentId a = 0; a < n; ++a) {
            std::string peers;
            for (AgentId j : topo.in_neighbors(a)) {
                if (prev_delivered[j].empty()) continue;
                peers += "agent " + std::to_string(j) + ": " + prev_delivered[j] + "\n";
            }
            if (peers.empty()) peers = "No peer messages yet.\n";
            const std::string target_option(1, static_cast<char>('A' + ecfg.target_label));
            const std::map<std::string, std::string> vars{
                {"question", prompts.question},
                {"round", std::to_string(round)},
                {"n_rounds", std::to_string(ecfg.n_rounds)},
                {"peer_messages", peers},
                {"target_option", target_option}};
            const std::string system =
                render_template(ecfg.is_attacker(a) ? prompts.system_attacker : prompts.system_benign, vars);
            const std::string user = render_template(prompts.round_user, vars);

            const ChatResult res = client.chat({{"system", system}, {"user", user}});
            content[a] = res.content;
            if (const auto ans = extract_answer(res.content, ecfg.n_labels)) claims[a] = *ans;
            const auto entropies = token_entropies(res.top_logprobs);
            confid[a] = entropies.empty() ? 1.0 : confidence_of_profile(entropies, conf_cfg);

            if (transcript) {
                // the request is logged verbatim; the API key travels only in
                // the auth header and never appears here
                transcript << json{{"type", "llm_call"},      {"seed", seed},
                                   {"agent", a},              {"round", round},
                                   {"attempts", res.attempts}, {"system", system},
                                   {"user", user},            {"response", res.content}}
                                  .dump()
                           << "\n";
            }
        }

        for (AgentId a = 0; a < n; ++a) {
            if (conf_prune && confid[a] < conf_cfg.prune_delta) withheld[a] = 1;
            if (withheld[a]) {
                prev_delivered[a].clear();
            } else if (conf_active) {
                prev_delivered[a] = pack_and_weight(content[a], confid[a], conf_cfg).rendered;
            } else {
                prev_delivered[a] = content[a];
            }

            RoundRecord row;
            row.run_id = run_id;
            row.round = round;
            row.agent = a;
            row.role = ecfg.is_attacker(a) ? Role::attacker : Role::benign;
            row.claim = claims[a];
            row.confidence = confid[a];
            row.embedding_score = 0.0;
            row.pruned_by = withheld[a] ? PrunedBy::confidence : PrunedBy::none;
            row.attack_kind = ecfg.is_attacker(a) && cfg.attack ? cfg.attack->kind : AttackKind::none;
            row.fallback = false;
            row.embedding = Eigen::VectorXd(0);
            rec.rounds.push_back(std::move(row));
        }
        last_round_claims = claims;
    }

    std::vector<Label> voting;
    for (AgentId a : ecfg.benign_agents()) {
        rec.final_answers.push_back(last_round_claims[a]);
        if (last_round_claims[a] >= 0) voting.push_back(last_round_claims[a]);
    }
    rec.final_answer = voting.empty() ? -1 : majority_vote(voting, ecfg.n_labels);
    return rec;
}

std::vector<EpisodeRecord> run_llm_batch(const RunConfig& cfg) {
    LlmClient client(cfg.backend);
    std::vector<EpisodeRecord> out;
    out.reserve(static_cast<std::size_t>(cfg.n_seeds));
    for (std::uint64_t seed : cfg.seeds()) out.push_back(run_llm_episode(cfg, client, seed));
    return out;
}

}  // namespace masim
