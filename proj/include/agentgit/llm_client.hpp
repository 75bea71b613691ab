#pragma once

#include <memory>
#include <string>
#include <vector>

#include "agentgit/executor.hpp"
#include "agentgit/fixtures.hpp"
#include "agentgit/http_transport.hpp"

namespace agentgit {

struct LlmEndpointConfig {
  std::string base_url = "https://api.openai.com";
  std::string chat_path = "/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  double temperature = 0.0;
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_ms = 30000;
  int max_retries = 2;
};

struct ChatCompletion {
  std::string text;
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
};

// Chat-completion call. Replay mode serves the recorded response for
// the request digest and never opens a connection; record mode
// persists the response. Transient transport errors and 429/5xx are
// retried with exponential backoff up to max_retries. The API key is
// read from the environment variable named in config and never stored
// in fixtures.
ChatCompletion llm_chat(const LlmEndpointConfig& config, const std::vector<Json>& messages,
                        FixtureStore* fixtures, HttpTransport* transport);

// Executor wrapping llm_chat. Option params select the prompt
// template (see PromptTemplate::from_params) and bind placeholders
// from the state:
//   vars: {placeholder: key-path into the state}
//   model / temperature: optional per-option overrides
// The completion is written to artifacts.<step-name> and appended to
// messages.
class LlmChatExecutor : public Executor {
 public:
  LlmChatExecutor(LlmEndpointConfig config, std::shared_ptr<FixtureStore> fixtures,
                  std::shared_ptr<HttpTransport> transport)
      : config_(std::move(config)),
        fixtures_(std::move(fixtures)),
        transport_(std::move(transport)) {}

  std::string id() const override { return "llm-chat"; }

  // Pure given fixtures; live calls are only as deterministic as the
  // provider, so replay mode is what replay verification relies on.
  bool deterministic() const override {
    return fixtures_ != nullptr && fixtures_->mode() == FixtureMode::Replay;
  }

  StepOutcome execute(const Json& state, const StepSpec& step,
                      const OptionSpec& option) override;

 private:
  LlmEndpointConfig config_;
  std::shared_ptr<FixtureStore> fixtures_;
  std::shared_ptr<HttpTransport> transport_;
};

}  // namespace agentgit
