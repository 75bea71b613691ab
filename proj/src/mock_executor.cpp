#include "agentgit/mock_executor.hpp"

#include "agentgit/sha256.hpp"

namespace agentgit {

StepOutcome MockExecutor::execute(const Json& state, const StepSpec& step,
                                  const OptionSpec& option) {
  const Json& params = option.params;
  std::string label = params.value("option_label", option.name);
  std::int64_t base_tokens = params.value("base_tokens", 10);
  bool flat_tokens = params.value("flat_tokens", false);

  if (params.value("fail", false)) {
    int fail_times = params.value("fail_times", 0);
    bool fail_now = true;
    if (fail_times > 0) {
      std::lock_guard<std::mutex> lock(mutex_);
      int& count = failure_counts_[step.name + "\x1f" + option.name];
      fail_now = count < fail_times;
      if (fail_now) ++count;
    }
    if (fail_now) {
      return StepOutcome::failed("mock failure for option '" + label + "'");
    }
  }

  std::string canonical = canonical_serialize(state);
  std::string input_hash = Sha256::hex_digest(canonical);
  std::string output = Sha256::hex_digest(input_hash + label);

  StepOutcome outcome;
  outcome.delta["artifacts." + step.name] = output;
  Json call = Json::object();
  call["tool"] = "mock";
  call["input_digest"] = input_hash;
  call["output_digest"] = output;
  call["status"] = "ok";
  outcome.tool_call = call;
  outcome.tokens_in =
      flat_tokens ? base_tokens
                  : base_tokens + static_cast<std::int64_t>(canonical.size()) / 100;
  outcome.tokens_out = base_tokens;
  outcome.wall_ms = 0;
  return outcome;
}

void MockExecutor::reset_failure_counters() {
  std::lock_guard<std::mutex> lock(mutex_);
  failure_counts_.clear();
}

}  // namespace agentgit
