#include "agentgit/llm_client.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "agentgit/diff.hpp"
#include "agentgit/prompt.hpp"

namespace agentgit {

namespace {

Json build_request(const LlmEndpointConfig& config, const std::vector<Json>& messages) {
  Json request = Json::object();
  request["model"] = config.model;
  request["messages"] = messages;
  request["temperature"] = config.temperature;
  return request;
}

ChatCompletion parse_completion(const Json& response) {
  ChatCompletion out;
  const Json& choices = response.at("choices");
  if (!choices.is_array() || choices.empty()) {
    throw ExecutorError("chat response has no choices");
  }
  out.text = choices.at(0).at("message").at("content").get<std::string>();
  if (response.contains("usage") && response.at("usage").is_object()) {
    const Json& usage = response.at("usage");
    out.tokens_in = usage.value("prompt_tokens", 0);
    out.tokens_out = usage.value("completion_tokens", 0);
  }
  return out;
}

bool retryable_status(int status) {
  return status == 429 || status == 408 || status >= 500;
}

}  // namespace

ChatCompletion llm_chat(const LlmEndpointConfig& config, const std::vector<Json>& messages,
                        FixtureStore* fixtures, HttpTransport* transport) {
  Json request = build_request(config, messages);

  if (fixtures != nullptr && fixtures->mode() == FixtureMode::Replay) {
    return parse_completion(fixtures->require("llm-chat", request));
  }

  if (transport == nullptr) {
    throw ExecutorError("llm-chat has no transport and is not in replay mode");
  }

  std::map<std::string, std::string> headers;
  if (!config.api_key_env.empty()) {
    const char* key = std::getenv(config.api_key_env.c_str());
    if (key != nullptr && key[0] != '\0') {
      headers["Authorization"] = std::string("Bearer ") + key;
    }
  }

  std::string body = canonical_serialize(request);
  int attempt = 0;
  for (;;) {
    try {
      HttpResponseData response =
          transport->post_json(config.base_url, config.chat_path, body, headers,
                               config.timeout_ms);
      if (response.status == 200) {
        Json payload = parse_json(response.body, "chat response");
        ChatCompletion completion = parse_completion(payload);
        if (fixtures != nullptr && fixtures->mode() == FixtureMode::Record) {
          fixtures->record("llm-chat", request, payload);
        }
        return completion;
      }
      if (!retryable_status(response.status) || attempt >= config.max_retries) {
        throw ExecutorError("chat request failed with HTTP " +
                            std::to_string(response.status) + ": " + response.body);
      }
    } catch (const TransportError& e) {
      if (attempt >= config.max_retries) throw;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
    ++attempt;
  }
}

StepOutcome LlmChatExecutor::execute(const Json& state, const StepSpec& step,
                                     const OptionSpec& option) {
  PromptTemplate tmpl = PromptTemplate::from_params(option.params, option.name);

  std::map<std::string, std::string> vars;
  if (option.params.contains("vars")) {
    for (const auto& [placeholder, key_path] : option.params.at("vars").items()) {
      const Json* value = get_key_path(state, key_path.get<std::string>());
      if (value == nullptr) {
        return StepOutcome::failed("state has no value at key-path '" +
                                   key_path.get<std::string>() + "'");
      }
      vars[placeholder] =
          value->is_string() ? value->get<std::string>() : canonical_serialize(*value);
    }
  }

  LlmEndpointConfig config = config_;
  if (option.params.contains("model")) config.model = option.params.at("model");
  if (option.params.contains("temperature")) config.temperature = option.params.at("temperature");

  std::vector<Json> messages = render_prompt(tmpl, vars);
  auto started = std::chrono::steady_clock::now();
  ChatCompletion completion;
  try {
    completion = llm_chat(config, messages, fixtures_.get(), transport_.get());
  } catch (const Error& e) {
    return StepOutcome::failed(e.what());
  }
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);

  StepOutcome outcome;
  outcome.delta["artifacts." + step.name] = completion.text;
  Json message = Json::object();
  message["role"] = "assistant";
  message["content"] = completion.text;
  outcome.message = message;
  outcome.tokens_in = completion.tokens_in;
  outcome.tokens_out = completion.tokens_out;
  // elapsed time only in live mode so fixture-backed runs stay byte-stable
  outcome.wall_ms = deterministic() ? 0 : elapsed.count();
  return outcome;
}

}  // namespace agentgit
