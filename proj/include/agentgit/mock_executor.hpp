#pragma once

#include <map>
#include <mutex>

#include "agentgit/executor.hpp"

namespace agentgit {

// Deterministic stand-in for LLM/tool steps, used by sweeps and
// verification. Output value is the hex digest of
// (state_hash ++ option_label).
//
// params:
//   option_label  string, defaults to the option name
//   base_tokens   int >= 0 (default 10)
//   fail          bool; fail the first fail_times invocations of this
//                 (step, option); fail_times 0 means always fail
//   fail_times    int
//   flat_tokens   bool; drop the state-size token term so every
//                 invocation costs exactly base_tokens in and out
//                 (constant-cost configuration)
//
// Default token accounting: tokens_in = base_tokens + |canonical
// state| / 100 (integer division), tokens_out = base_tokens.
class MockExecutor : public Executor {
 public:
  std::string id() const override { return "mock"; }
  bool deterministic() const override { return true; }

  StepOutcome execute(const Json& state, const StepSpec& step,
                      const OptionSpec& option) override;

  // Scripted-failure counters, keyed by step/option.
  void reset_failure_counters();

 private:
  std::mutex mutex_;
  std::map<std::string, int> failure_counts_;
};

}  // namespace agentgit
