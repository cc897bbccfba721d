#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "masim/config.hpp"
#include "masim/defaults.hpp"
#include "masim/errors.hpp"
#include "masim/llm_backend.hpp"
#include "masim/metrics.hpp"
#include "masim/records_io.hpp"
#include "masim/theory.hpp"

namespace {

using masim::RunConfig;
using nlohmann::json;

json distance_table_json(const masim::DistanceTable& t) {
    json j = json::object();
    j["benign_malicious"] = t.benign_malicious ? json(*t.benign_malicious) : json(nullptr);
    j["benign_benign_same"] = t.benign_benign_same ? json(*t.benign_benign_same) : json(nullptr);
    j["benign_benign_diff"] = t.benign_benign_diff ? json(*t.benign_benign_diff) : json(nullptr);
    return j;
}

json report_json(const masim::TheoryReport& r) {
    return json{{"lipschitz", r.lipschitz}, {"margin", r.margin},
                {"radius", r.radius},       {"samples_tested", r.samples_tested},
                {"violations", r.violations}, {"passed", r.passed},
                {"note", r.note}};
}

std::vector<masim::EpisodeRecord> run_configured(const RunConfig& cfg) {
    if (cfg.backend.kind == masim::BackendKind::llm) return masim::run_llm_batch(cfg);
    return masim::run_batch(masim::materialize(cfg), cfg.seeds(), cfg.n_threads);
}

int do_run(const std::string& config_path, const std::vector<std::string>& sets,
           const std::string& out_dir) {
    RunConfig cfg = masim::load_config(config_path, sets);
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    const auto episodes = run_configured(cfg);
    const json echo = cfg.to_json();
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "records.jsonl", std::ios::binary);
        if (!os) throw masim::IoError("cannot write file: " + (dir / "records.jsonl").string());
        masim::write_records_jsonl(os, echo, episodes);
    }
    masim::write_summary_csvs(dir, echo, episodes);
    std::vector<std::string> files{"records.jsonl", "summary.csv", "distance_table.csv"};
    if (cfg.attack) files.push_back("auroc_by_round.csv");
    masim::write_manifest(dir, files);

    json out{{"records", (dir / "records.jsonl").string()},
             {"n_episodes", episodes.size()},
             {"accuracy", masim::accuracy(episodes)}};
    if (cfg.attack) out["attack_success_rate"] = masim::attack_success_rate(episodes);
    std::cout << out.dump() << "\n";
    return 0;
}

int do_sweep(const std::string& config_path, const std::vector<std::string>& sets,
             const std::string& out_dir) {
    RunConfig cfg = masim::load_config(config_path, sets);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!cfg.attack) throw masim::ConfigError("sweep needs an attack section");
    if (cfg.backend.kind == masim::BackendKind::llm)
        throw masim::ConfigError("sweep supports the synthetic backend only");

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);

    std::vector<masim::PersistenceRow> rows;
    for (const auto& name : cfg.sweep.topologies) {
        const auto kind = masim::topology_kind_from_string(name);
        std::vector<std::optional<double>> probs;
        if (kind == masim::TopologyKind::sparse_random)
            for (double p : cfg.sweep.edge_probs) probs.emplace_back(p);
        else
            probs.emplace_back(std::nullopt);

        for (const auto& p : probs) {
            RunConfig point = cfg;
            point.topology.kind = kind;
            point.topology.edge_prob = p;
            point.topology.reverse = false;
            point.topology.bidirectional = true;
            point.validate();

            const auto setup = masim::materialize(point);
            const auto episodes = masim::run_batch(setup, point.seeds(), point.n_threads);
            const int n_rounds = point.episode.n_rounds;
            const auto series =
                masim::auroc_by_round(episodes, n_rounds, masim::DetectionSignal::embedding);
            const auto hl = masim::half_life(series, masim::defaults::half_life_threshold);

            masim::PersistenceRow row;
            row.topology = masim::display_name(point.topology);
            row.half_life = hl.value_or(n_rounds + 1);  // censored: held through round R
            row.auc_r = masim::auc_r(series);
            row.asr_at_R = masim::attack_success_rate(episodes);
            rows.push_back(row);
            std::cout << json{{"topology", row.topology},
                              {"half_life", row.half_life},
                              {"auc_r", row.auc_r},
                              {"asr_at_R", row.asr_at_R}}
                             .dump()
                      << "\n";
        }
    }
    masim::write_persistence_csv(dir / "persistence.csv", rows);
    masim::write_manifest(dir, {"persistence.csv"});
    return 0;
}

int do_metrics(const std::string& records_path, const std::string& out_dir) {
    std::ifstream in(records_path, std::ios::binary);
    if (!in) throw masim::IoError("cannot open records file: " + records_path);
    const masim::RecordsFile file = masim::read_records_jsonl(in);
    if (file.episodes.empty()) throw masim::IoError("records file has no episodes");

    std::filesystem::path dir =
        out_dir.empty() ? std::filesystem::path(records_path).parent_path() : std::filesystem::path(out_dir);
    if (dir.empty()) dir = ".";
    std::filesystem::create_directories(dir);
    masim::write_summary_csvs(dir, file.config, file.episodes);

    json out{{"n_episodes", file.episodes.size()},
             {"accuracy", masim::accuracy(file.episodes)},
             {"distance_table", distance_table_json(masim::distance_table(file.episodes))}};
    bool attacked = false;
    for (const auto& e : file.episodes)
        if (e.attack_name != "none") attacked = true;
    if (attacked) {
        const int n_rounds = file.episodes.front().n_rounds;
        out["attack_success_rate"] = masim::attack_success_rate(file.episodes);
        for (const auto signal : {masim::DetectionSignal::embedding, masim::DetectionSignal::confidence}) {
            const auto series = masim::auroc_by_round(file.episodes, n_rounds, signal);
            const auto hl = masim::half_life(series, masim::defaults::half_life_threshold);
            json block{{"auroc_by_round", series},
                       {"half_life", hl ? json(*hl) : json(nullptr)},
                       {"auc_r", masim::auc_r(series)}};
            out[to_string(signal)] = block;
        }
    }
    std::cout << out.dump() << "\n";
    return 0;
}

int do_verify(const std::string& config_path, const std::vector<std::string>& sets, long samples,
              std::uint64_t seed) {
    RunConfig cfg = masim::load_config(config_path, sets);
    if (!cfg.defense.embedding)
        throw masim::ConfigError("verify-theory needs a defense.embedding section");
    const auto setup = masim::materialize(cfg);

    // benign-only probe episode supplies the support set
    masim::RunSetup probe = setup;
    probe.defense = masim::DefensePlan{};
    probe.attack.reset();
    probe.episode.attacker_ids.clear();
    const auto rec = masim::run_episode(probe, cfg.seed);

    masim::SupportSet support;
    support.round = rec.n_rounds;
    for (const auto& row : rec.rounds)
        if (row.role == masim::Role::benign) support.points.push_back(row.embedding);

    masim::AnyScorer scorer = setup.defense.embedding->scorer;
    if (setup.defense.embedding->rebuild_knn) {
        const int k =
            std::min<int>(setup.defense.embedding->knn_k, static_cast<int>(support.points.size()));
        scorer = masim::KnnScorer(support, std::max(k, 1), setup.defense.embedding->knn_offset);
    }

    const auto lemma = masim::check_lemma_bound(scorer, support, seed, samples);
    const auto inclusion = masim::check_acceptance_inclusion(scorer, support, seed + 1, samples);
    const bool passed = lemma.passed && inclusion.passed;
    std::cout << json{{"lemma", report_json(lemma)},
                      {"inclusion", report_json(inclusion)},
                      {"passed", passed}}
                     .dump()
              << "\n";
    return passed ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agent debate simulator: near-benign attacks vs lightweight defenses"};
    app.require_subcommand(1);

    std::string config_path, out_dir, records_path;
    std::vector<std::string> sets;
    long samples = 10000;
    std::uint64_t vseed = 424242;

    auto* run_cmd = app.add_subcommand("run", "simulate episodes and write records plus summaries");
    run_cmd->add_option("--config", config_path, "JSON config file");
    run_cmd->add_option("--set", sets, "override a config key, e.g. attack.kind=chaos");
    run_cmd->add_option("--out", out_dir, "output directory (overrides config output_dir)");

    auto* sweep_cmd = app.add_subcommand("sweep", "run every configured topology and tabulate persistence");
    sweep_cmd->add_option("--config", config_path, "JSON config file");
    sweep_cmd->add_option("--set", sets, "override a config key");
    sweep_cmd->add_option("--out", out_dir, "output directory (overrides config output_dir)");

    auto* metrics_cmd = app.add_subcommand("metrics", "recompute summaries from a records file");
    metrics_cmd->add_option("--records", records_path, "records.jsonl path")->required();
    metrics_cmd->add_option("--out", out_dir, "directory for the CSVs (default: beside the records)");

    auto* verify_cmd = app.add_subcommand("verify-theory", "sample-check the pruning guarantees");
    verify_cmd->add_option("--config", config_path, "JSON config file");
    verify_cmd->add_option("--set", sets, "override a config key");
    verify_cmd->add_option("--samples", samples, "samples per check");
    verify_cmd->add_option("--seed", vseed, "sampling seed");

    int rc = 0;
    run_cmd->callback([&] { rc = do_run(config_path, sets, out_dir); });
    sweep_cmd->callback([&] { rc = do_sweep(config_path, sets, out_dir); });
    metrics_cmd->callback([&] { rc = do_metrics(records_path, out_dir); });
    verify_cmd->callback([&] { rc = do_verify(config_path, sets, samples, vseed); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const masim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return rc;
}
