#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dcsynth/error.hpp"
#include "dcsynth/llm_client.hpp"
#include "doctest.h"
#include "stub_server.hpp"
#include "test_support.hpp"

using namespace dcsynth;

namespace {

std::string response_text() {
  std::ifstream in(testing::fixture("response_16r_2acu.txt"));
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

LlmEndpointConfig config_for(const testing::StubServer& s) {
  LlmEndpointConfig c;
  c.base_url = s.base_url();
  c.model = "stub";
  c.max_retries = 2;
  c.backoff_s = 0.01;
  c.timeout_s = 5.0;
  c.token_env = "DCSYNTH_TEST_TOKEN";
  return c;
}

DesignQuery query() {
  return {assets_context(testing::library_a()), "external", "requirements", {}};
}

struct TokenGuard {
  TokenGuard() { ::setenv("DCSYNTH_TEST_TOKEN", "secret-token", 1); }
  ~TokenGuard() { ::unsetenv("DCSYNTH_TEST_TOKEN"); }
};

}  // namespace

TEST_CASE("five samples against the recorded-response stub") {
  TokenGuard token;
  const std::string text = response_text();
  testing::StubServer server([&](int) { return testing::StubServer::Reply{200, text}; });
  const ChatClient client(config_for(server));
  const auto batch = llm_generate(query(), client);
  REQUIRE(batch.size() == 5);
  for (const auto& c : batch) {
    CHECK(c.parse_ok);
    CHECK(c.provenance.kind == GeneratorKind::Llm);
    CHECK(c.provenance.raw_text == text);
    CHECK(*c.topology == testing::topology_a());
  }
  CHECK(server.requests() == 5);
  for (const auto& p : server.prompts()) CHECK(p == build_design_prompt(query()));
  for (const auto& h : server.auth_headers()) CHECK(h == "Bearer secret-token");
}

TEST_CASE("one garbage sample: four parse, one fails") {
  TokenGuard token;
  const std::string text = response_text();
  testing::StubServer server([&](int i) { return testing::StubServer::Reply{200, i == 2 ? "garbage" : text}; });
  const auto batch = llm_generate(query(), ChatClient(config_for(server)));
  REQUIRE(batch.size() == 5);
  int ok = 0;
  for (const auto& c : batch) ok += c.parse_ok;
  CHECK(ok == 4);
}

TEST_CASE("transient 5xx is retried") {
  TokenGuard token;
  testing::StubServer server([](int i) { return testing::StubServer::Reply{i == 0 ? 503 : 200, "hello"}; });
  CHECK(ChatClient(config_for(server)).complete("p") == "hello");
  CHECK(server.requests() == 2);
}

TEST_CASE("persistent failure: unreachable after the retries") {
  TokenGuard token;
  testing::StubServer server([](int) { return testing::StubServer::Reply{500, ""}; });
  try {
    ChatClient(config_for(server)).complete("p");
    FAIL("expected endpoint error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EndpointUnreachable);
  }
  CHECK(server.requests() == 3);

  LlmEndpointConfig down = config_for(server);
  down.base_url = "http://127.0.0.1:1/v1";
  try {
    ChatClient(down).complete("p");
    FAIL("expected endpoint error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EndpointUnreachable);
  }
}

TEST_CASE("401 is an auth error, not retried") {
  TokenGuard token;
  testing::StubServer server([](int) { return testing::StubServer::Reply{401, ""}; });
  try {
    ChatClient(config_for(server)).complete("p");
    FAIL("expected auth error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Auth);
  }
  CHECK(server.requests() == 1);
}

TEST_CASE("missing token") {
  ::unsetenv("DCSYNTH_TEST_TOKEN");
  LlmEndpointConfig c;
  c.base_url = "http://127.0.0.1:1/v1";
  c.model = "stub";
  c.token_env = "DCSYNTH_TEST_TOKEN";
  try {
    ChatClient client(c);
    FAIL("expected auth error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Auth);
    CHECK(std::string(e.what()).find("DCSYNTH_TEST_TOKEN") != std::string::npos);
  }
}

TEST_CASE("endpoint config") {
  const auto c = llm_config_from_json({{"base_url", "http://x/v1"}, {"model", "m"}, {"samples", 3}});
  CHECK(c.samples == 3);
  CHECK(c.token_env == kDefaultTokenEnv);
  CHECK_THROWS_AS(llm_config_from_json({{"model", "m"}}).validate(), Error);
  CHECK_THROWS_AS(llm_config_from_json(nlohmann::json::array()), Error);
}
