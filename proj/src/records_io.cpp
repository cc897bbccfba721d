#include "masim/records_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "masim/errors.hpp"
#include "masim/metrics.hpp"

namespace masim {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

std::string num(double x) { return json(x).dump(); }

bool any_attacked(const std::vector<EpisodeRecord>& episodes) {
    for (const auto& e : episodes)
        if (e.attack_name != "none") return true;
    return false;
}

json round_row(const EpisodeRecord& e, const RoundRecord& r) {
    return json{{"type", "round"},
                {"seed", e.seed},
                {"run_id", r.run_id},
                {"round", r.round},
                {"agent", r.agent},
                {"role", to_string(r.role)},
                {"claim", r.claim},
                {"confidence", r.confidence},
                {"embedding_score", r.embedding_score},
                {"pruned_by", to_string(r.pruned_by)},
                {"attack_kind", to_string(r.attack_kind)},
                {"fallback", r.fallback},
                {"embedding", std::vector<double>(r.embedding.data(), r.embedding.data() + r.embedding.size())}};
}

}  // namespace

void write_records_jsonl(std::ostream& os, const json& config_echo,
                         const std::vector<EpisodeRecord>& episodes) {
    os << json{{"type", "header"}, {"schema_version", records_schema_version}, {"config", config_echo}}
              .dump()
       << "\n";
    for (const auto& e : episodes) {
        for (const auto& r : e.rounds) os << round_row(e, r).dump() << "\n";
        os << json{{"type", "episode_summary"},
                   {"seed", e.seed},
                   {"topology", e.topology_name},
                   {"attack", e.attack_name},
                   {"defense", e.defense_name},
                   {"n_agents", e.n_agents},
                   {"n_rounds", e.n_rounds},
                   {"gold", e.gold},
                   {"target", e.target},
                   {"final_answers", e.final_answers},
                   {"final_answer", e.final_answer}}
                  .dump()
           << "\n";
    }
    json run_summary{{"type", "run_summary"},
                     {"n_episodes", episodes.size()},
                     {"accuracy", accuracy(episodes)}};
    if (any_attacked(episodes)) run_summary["attack_success_rate"] = attack_success_rate(episodes);
    os << run_summary.dump() << "\n";
}

RecordsFile read_records_jsonl(std::istream& is) {
    RecordsFile out;
    bool saw_header = false;
    std::map<std::uint64_t, EpisodeRecord> pending;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("records line " + std::to_string(lineno) + " is not valid JSON: " + e.what());
        }
        const std::string type = j.value("type", "");
        if (type == "header") {
            if (j.value("schema_version", "") != records_schema_version)
                throw IoError("records: unsupported schema version");
            out.config = j.value("config", json::object());
            saw_header = true;
        } else if (type == "round") {
            const auto seed = j.at("seed").get<std::uint64_t>();
            RoundRecord r;
            r.run_id = j.at("run_id").get<std::string>();
            r.round = j.at("round").get<int>();
            r.agent = j.at("agent").get<AgentId>();
            r.role = role_from_string(j.at("role").get<std::string>());
            r.claim = j.at("claim").get<Label>();
            r.confidence = j.at("confidence").get<double>();
            r.embedding_score = j.at("embedding_score").get<double>();
            r.pruned_by = pruned_by_from_string(j.at("pruned_by").get<std::string>());
            r.attack_kind = attack_kind_from_string(j.at("attack_kind").get<std::string>());
            r.fallback = j.at("fallback").get<bool>();
            const auto emb = j.at("embedding").get<std::vector<double>>();
            r.embedding = Eigen::Map<const Eigen::VectorXd>(emb.data(), static_cast<long>(emb.size()));
            pending[seed].rounds.push_back(std::move(r));
        } else if (type == "episode_summary") {
            const auto seed = j.at("seed").get<std::uint64_t>();
            EpisodeRecord e = std::move(pending[seed]);
            pending.erase(seed);
            e.seed = seed;
            e.topology_name = j.at("topology").get<std::string>();
            e.attack_name = j.at("attack").get<std::string>();
            e.defense_name = j.at("defense").get<std::string>();
            e.n_agents = j.at("n_agents").get<int>();
            e.n_rounds = j.at("n_rounds").get<int>();
            e.gold = j.at("gold").get<Label>();
            e.target = j.at("target").get<Label>();
            e.final_answers = j.at("final_answers").get<std::vector<Label>>();
            e.final_answer = j.at("final_answer").get<Label>();
            out.episodes.push_back(std::move(e));
        } else if (type == "run_summary") {
            // derived values; recomputed on demand
        } else {
            throw IoError("records line " + std::to_string(lineno) + ": unknown type \"" + type + "\"");
        }
    }
    if (!saw_header) throw IoError("records: missing header line");
    if (!pending.empty()) throw IoError("records: round rows without an episode_summary");
    return out;
}

std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
    std::string quoted = "\"";
    for (char c : raw) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += "\"";
    return quoted;
}

namespace {

void write_csv(const std::filesystem::path& path, const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write file: " + path.string());
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) os << ",";
            os << csv_field(row[i]);
        }
        os << "\r\n";
    }
}

}  // namespace

void write_summary_csvs(const std::filesystem::path& dir, const json& config_echo,
                        const std::vector<EpisodeRecord>& episodes) {
    if (episodes.empty()) throw DomainError("write_summary_csvs: no episodes");

    std::vector<std::vector<std::string>> summary{{"metric", "value"}};
    summary.push_back({"n_episodes", std::to_string(episodes.size())});
    summary.push_back({"accuracy", num(accuracy(episodes))});
    const bool attacked = any_attacked(episodes);
    if (attacked) summary.push_back({"attack_success_rate", num(attack_success_rate(episodes))});
    write_csv(dir / "summary.csv", summary);

    const DistanceTable table = distance_table(episodes);
    std::vector<std::vector<std::string>> dist{{"pair_class", "mean_distance"}};
    if (table.benign_malicious) dist.push_back({"benign_malicious", num(*table.benign_malicious)});
    if (table.benign_benign_same) dist.push_back({"benign_benign_same", num(*table.benign_benign_same)});
    if (table.benign_benign_diff) dist.push_back({"benign_benign_diff", num(*table.benign_benign_diff)});
    write_csv(dir / "distance_table.csv", dist);

    if (attacked) {
        const int n_rounds = episodes.front().n_rounds;
        const auto emb = auroc_by_round(episodes, n_rounds, DetectionSignal::embedding);
        const auto conf = auroc_by_round(episodes, n_rounds, DetectionSignal::confidence);
        std::vector<std::vector<std::string>> rows{{"round", "auroc_embedding", "auroc_confidence"}};
        for (int r = 0; r < n_rounds; ++r)
            rows.push_back({std::to_string(r + 1), num(emb[r]), num(conf[r])});
        write_csv(dir / "auroc_by_round.csv", rows);
    }
    (void)config_echo;
}

void write_persistence_csv(const std::filesystem::path& path, const std::vector<PersistenceRow>& rows) {
    std::vector<std::vector<std::string>> table{{"topology", "half_life", "auc_r", "asr_at_R"}};
    for (const auto& r : rows)
        table.push_back({r.topology, std::to_string(r.half_life), num(r.auc_r), num(r.asr_at_R)});
    write_csv(path, table);
}

void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& filenames) {
    json files = json::object();
    for (const auto& name : filenames) {
        const std::string bytes = read_file_bytes(dir / name);
        char digest[32];
        std::snprintf(digest, sizeof digest, "fnv1a64:%016llx",
                      static_cast<unsigned long long>(fnv1a64(bytes)));
        files[name] = digest;
    }
    const json manifest{{"schema_version", records_schema_version}, {"files", files}};
    std::ofstream os(dir / "manifest.json", std::ios::binary);
    if (!os) throw IoError("cannot write file: " + (dir / "manifest.json").string());
    os << manifest.dump(2) << "\n";
}

}  // namespace masim
