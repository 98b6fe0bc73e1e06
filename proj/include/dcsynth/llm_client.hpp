#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcsynth/generation.hpp"
#include "json.hpp"

namespace dcsynth {

inline constexpr const char* kDefaultTokenEnv = "DCSYNTH_LLM_TOKEN";

struct LlmEndpointConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8080/v1
  std::string model;
  double temperature = 0.7;
  std::optional<double> top_p;
  int samples = 5;
  double timeout_s = 120.0;
  int max_retries = 3;
  double backoff_s = 0.5;  // doubled per retry
  int max_concurrency = 4;
  std::string token_env = kDefaultTokenEnv;

  void validate() const;
};

LlmEndpointConfig llm_config_from_json(const nlohmann::json& j);

// Chat-completions client. The bearer token is read from `token_env` at
// construction; a missing token throws Error(Auth).
class ChatClient {
 public:
  explicit ChatClient(LlmEndpointConfig config);

  // One completion. Connection failures, 429 and 5xx are retried with
  // exponential backoff; then Error(EndpointUnreachable). 401/403 throw
  // Error(Auth).
  std::string complete(const std::string& prompt) const;

  // `n` independent completions, at most max_concurrency in flight.
  std::vector<std::string> complete_batch(const std::string& prompt, int n) const;

  const LlmEndpointConfig& config() const { return config_; }

 private:
  LlmEndpointConfig config_;
  std::string token_;
};

// N design samples; each response goes through parse_candidate.
std::vector<Candidate> llm_generate(const DesignQuery& query, const ChatClient& client);

}  // namespace dcsynth
