#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "masim/config.hpp"

namespace masim {

// Last "Answer: X" in the text, mapped to a label index (A = 0). Returns
// nullopt when no parseable answer line exists.
std::optional<Label> extract_answer(const std::string& text, int n_labels);

// Mean per-token entropy, each token's distribution renormalized over the
// reported top alternatives. Empty input gives 0.
double entropy_from_top_logprobs(const std::vector<std::vector<double>>& per_token_logprobs);

struct ChatTurn {
    std::string role;
    std::string content;
};

struct ChatResult {
    std::string content;
    std::vector<std::vector<double>> top_logprobs;  // one list per emitted token
    int attempts = 1;
};

// Minimal chat-completions client. Retries transport errors, 429 and 5xx
// with exponential backoff; other statuses fail immediately.
class LlmClient {
  public:
    explicit LlmClient(BackendConfig cfg);
    ChatResult chat(const std::vector<ChatTurn>& turns);

    const BackendConfig& config() const { return cfg_; }

  private:
    BackendConfig cfg_;
    std::string host_;
    int port_ = 80;
    std::string path_;
    std::string api_key_;
};

struct PromptSet {
    std::string system_benign;
    std::string system_attacker;
    std::string round_user;  // placeholders: {question} {round} {n_rounds} {peer_messages}
    std::string question;
};

PromptSet load_prompts(const std::string& dir);
std::string render_template(const std::string& tmpl, const std::map<std::string, std::string>& vars);

// Debate loop against a live endpoint. Embedding defenses need embeddings
// the API does not provide, so only the confidence defense applies here.
// Agents whose reply has no answer line abstain; claim is recorded as -1
// and abstainers are left out of the final vote. If every benign agent
// abstains in the last round the final answer is -1.
EpisodeRecord run_llm_episode(const RunConfig& cfg, LlmClient& client, std::uint64_t seed);

std::vector<EpisodeRecord> run_llm_batch(const RunConfig& cfg);

}  // namespace masim
