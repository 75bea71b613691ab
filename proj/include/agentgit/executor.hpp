#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentgit/canonical.hpp"
#include "agentgit/workflow.hpp"

namespace agentgit {

// Result of one executor invocation. Failed outcomes carry no delta.
struct StepOutcome {
  enum class Status { Ok, Failed };

  Status status = Status::Ok;
  std::string error;

  // key-path -> value sets, applied to the state by the engine
  std::map<std::string, Json> delta;
  // appended to the reserved messages / tool_calls sections
  std::optional<Json> message;
  std::optional<Json> tool_call;

  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
  std::int64_t wall_ms = 0;

  bool ok() const { return status == Status::Ok; }

  static StepOutcome failed(std::string reason) {
    StepOutcome o;
    o.status = Status::Failed;
    o.error = std::move(reason);
    return o;
  }
};

class Executor {
 public:
  virtual ~Executor() = default;

  virtual std::string id() const = 0;

  // Deterministic executors are pure functions of (state, params,
  // config); replay verification skips the others.
  virtual bool deterministic() const = 0;

  virtual StepOutcome execute(const Json& state, const StepSpec& step,
                              const OptionSpec& option) = 0;
};

// Maps executor ids to implementations; shared by engine and sweeps.
class ExecutorRegistry {
 public:
  void add(std::shared_ptr<Executor> executor);
  bool has(const std::string& id) const;
  Executor& get(const std::string& id) const;  // throws ExecutorError
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, std::shared_ptr<Executor>> executors_;
};

}  // namespace agentgit
