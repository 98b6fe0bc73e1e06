#include "dcsynth/llm_client.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "dcsynth/error.hpp"
#include "httplib.h"

namespace dcsynth {

using nlohmann::json;

void LlmEndpointConfig::validate() const {
  if (base_url.empty()) throw Error(ErrorKind::Config, "llm: base_url is required");
  if (model.empty()) throw Error(ErrorKind::Config, "llm: model is required");
  if (samples < 1) throw Error(ErrorKind::Config, "llm: samples must be >= 1");
  if (!(temperature >= 0.0)) throw Error(ErrorKind::Config, "llm: temperature must be >= 0");
  if (top_p && !(*top_p > 0.0 && *top_p <= 1.0)) throw Error(ErrorKind::Config, "llm: top_p must be in (0, 1]");
  if (max_retries < 0) throw Error(ErrorKind::Config, "llm: max_retries must be >= 0");
  if (max_concurrency < 1) throw Error(ErrorKind::Config, "llm: max_concurrency must be >= 1");
  if (!(timeout_s > 0.0)) throw Error(ErrorKind::Config, "llm: timeout_s must be > 0");
  if (token_env.empty()) throw Error(ErrorKind::Config, "llm: token_env must name an environment variable");
}

LlmEndpointConfig llm_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "llm config must be a JSON object");
  LlmEndpointConfig c;
  try {
    c.base_url = j.value("base_url", c.base_url);
    c.model = j.value("model", c.model);
    c.temperature = j.value("temperature", c.temperature);
    if (j.contains("top_p") && !j.at("top_p").is_null()) c.top_p = j.at("top_p").get<double>();
    c.samples = j.value("samples", c.samples);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.backoff_s = j.value("backoff_s", c.backoff_s);
    c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
    c.token_env = j.value("token_env", c.token_env);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("llm config: ") + e.what());
  }
  c.validate();
  return c;
}

ChatClient::ChatClient(LlmEndpointConfig config) : config_(std::move(config)) {
  config_.validate();
  const char* token = std::getenv(config_.token_env.c_str());
  if (token == nullptr || *token == '\0') {
    throw Error(ErrorKind::Auth, "llm: environment variable " + config_.token_env + " is not set");
  }
  token_ = token;
}

namespace {

// "http://host:port/v1" -> {"http://host:port", "/v1"}
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', start);
  if (slash == std::string::npos) return {url, ""};
  std::string path = url.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, slash), path};
}

}  // namespace

std::string ChatClient::complete(const std::string& prompt) const {
  const auto [host, prefix] = split_url(config_.base_url);
  json body = {{"model", config_.model},
               {"temperature", config_.temperature},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
  if (config_.top_p) body["top_p"] = *config_.top_p;
  const std::string payload = body.dump();
  const auto timeout = std::chrono::duration<double>(config_.timeout_s);

  std::string last_error;
  double wait = config_.backoff_s;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
      wait *= 2.0;
    }
    httplib::Client cli(host);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers headers = {{"Authorization", "Bearer " + token_}};
    auto res = cli.Post(prefix + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw Error(ErrorKind::Auth, "llm: endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorKind::EndpointUnreachable,
                  "llm: unexpected HTTP " + std::to_string(res->status) + " from " + config_.base_url);
    }
    try {
      const json doc = json::parse(res->body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Parse, std::string("llm: malformed chat-completions response: ") + e.what());
    }
  }
  throw Error(ErrorKind::EndpointUnreachable, "llm: " + config_.base_url + " unreachable after " +
                                                  std::to_string(config_.max_retries + 1) +
                                                  " attempts (" + last_error + ")");
}

std::vector<std::string> ChatClient::complete_batch(const std::string& prompt, int n) const {
  std::vector<std::string> out(static_cast<std::size_t>(std::max(n, 0)));
  std::vector<std::exception_ptr> errors(out.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < out.size(); i = next++) {
      try {
        out[i] = complete(prompt);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min(config_.max_concurrency, std::max(n, 1));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<Candidate> llm_generate(const DesignQuery& query, const ChatClient& client) {
  const std::string prompt = build_design_prompt(query);
  const auto texts = client.complete_batch(prompt, client.config().samples);
  std::vector<Candidate> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    Candidate c = parse_candidate(text);
    c.provenance.kind = GeneratorKind::Llm;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace dcsynth
