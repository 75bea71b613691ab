#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "agentgit/executor.hpp"
#include "agentgit/store.hpp"
#include "agentgit/workflow.hpp"

namespace agentgit {

struct RecoveryPolicy {
  enum class Mode { None, NextOption, RetryThenNext };

  Mode mode = Mode::None;
  int max_retries = 0;  // per option, RetryThenNext only

  static RecoveryPolicy from_string(const std::string& mode, int max_retries = 0);
};

// What to do after a failed attempt: retry the same option, move to
// the next untried option (ascending), or give up. exhausted holds
// options whose attempt budget is spent.
struct RecoveryDecision {
  enum class Action { Retry, TryOption, Abort };
  Action action = Action::Abort;
  int option = -1;
};

RecoveryDecision recover(int option_count, const RecoveryPolicy& policy,
                         const std::set<int>& exhausted, int attempts_on_current,
                         int current_option);

struct JournalRecord {
  std::int64_t ts = 0;
  std::string run_id;
  std::string step;
  std::string option;
  std::string status;  // ok | failed
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
  std::int64_t wall_ms = 0;

  Json to_json() const;
  static JournalRecord from_json(const Json& j);
};

// Append-only line-delimited journal of every executor invocation,
// including failed attempts (which never become checkpoints).
class RunJournal {
 public:
  RunJournal() = default;
  explicit RunJournal(std::filesystem::path path) : path_(std::move(path)) {}

  bool enabled() const { return !path_.empty(); }
  const std::filesystem::path& path() const { return path_; }
  void append(const JournalRecord& record);

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

std::vector<JournalRecord> read_journal(const std::filesystem::path& path);

struct RunResult {
  bool ok = false;
  std::string root_checkpoint;
  std::string final_checkpoint;  // leaf on success, last good checkpoint on failure
  int steps_executed = 0;        // executor invocations, failed attempts included
  StepAccounting totals;
  std::vector<std::string> committed;  // one checkpoint per executed step
  std::string failed_step;
  std::string error;
};

struct ReplayLayer {
  enum class Status { Ok, StateMismatch, CorruptObject, Unverifiable };
  std::int64_t step_index = 0;
  std::string checkpoint;
  Status status = Status::Ok;
  std::string detail;
};

struct ReplayReport {
  bool ok = true;
  std::vector<ReplayLayer> layers;
};

// Executes workflows against a store: auto-commit after every step,
// resume from any checkpoint, auto-recovery by rolling back to the
// parent checkpoint and trying another option. A single run is
// sequential; concurrent runs on distinct branches may share the
// store.
class Engine {
 public:
  Engine(Store& store, const ExecutorRegistry& registry, RunJournal* journal = nullptr,
         std::string run_id = "run", std::optional<std::int64_t> fixed_ts = std::nullopt)
      : store_(store),
        registry_(registry),
        journal_(journal),
        run_id_(std::move(run_id)),
        fixed_ts_(fixed_ts) {}

  static StepOutcome execute_step(const Json& state, const StepSpec& step,
                                  const OptionSpec& option,
                                  const ExecutorRegistry& registry);

  // Merges an ok outcome into the state: key-path sets plus appends to
  // messages / tool_calls.
  static Json apply_outcome(const Json& state, const StepOutcome& outcome);

  // Executes the remaining steps from start (or from a fresh root
  // commit of spec.initial) on the given branch, one choice per
  // remaining step.
  RunResult run_path(const WorkflowSpec& spec, const std::vector<int>& choices,
                     const std::optional<std::string>& start,
                     const RecoveryPolicy& policy, const std::string& branch);

  // Re-executes the recorded option sequence behind leaf from the root
  // and verifies every stored layer: recomputed state hash and stored
  // blob integrity.
  ReplayReport replay(const std::string& leaf, const WorkflowSpec& spec);

 private:
  std::int64_t journal_ts() const;

  Store& store_;
  const ExecutorRegistry& registry_;
  RunJournal* journal_;
  std::string run_id_;
  std::optional<std::int64_t> fixed_ts_;
};

}  // namespace agentgit
