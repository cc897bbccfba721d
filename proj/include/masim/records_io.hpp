#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "masim/records.hpp"

namespace masim {

inline constexpr const char* records_schema_version = "1.0.0";

// FNV-1a, 64 bit. Used for the output manifest so reruns can be compared
// byte for byte without pulling in a crypto dependency.
std::uint64_t fnv1a64(std::string_view bytes);

std::string read_file_bytes(const std::filesystem::path& path);

// One JSON object per line: a header with the config echo, then per-episode
// round rows followed by an episode_summary, and a closing run_summary.
void write_records_jsonl(std::ostream& os, const nlohmann::json& config_echo,
                         const std::vector<EpisodeRecord>& episodes);

struct RecordsFile {
    nlohmann::json config;
    std::vector<EpisodeRecord> episodes;
};

RecordsFile read_records_jsonl(std::istream& is);

// RFC 4180 quoting; the writers terminate lines with CRLF.
std::string csv_field(const std::string& raw);

// summary.csv and distance_table.csv always; auroc_by_round.csv when the
// run had an attacker to score against.
void write_summary_csvs(const std::filesystem::path& dir, const nlohmann::json& config_echo,
                        const std::vector<EpisodeRecord>& episodes);

struct PersistenceRow {
    std::string topology;
    int half_life = 0;  // censored series report n_rounds + 1
    double auc_r = 0.0;
    double asr_at_R = 0.0;
};

void write_persistence_csv(const std::filesystem::path& path, const std::vector<PersistenceRow>& rows);

// manifest.json: digest per named file in dir, so a rerun can be diffed
// against this one without opening the data files.
void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& filenames);

}  // namespace masim
