#include "agentgit/engine.hpp"

#include <chrono>
#include <fstream>

#include "agentgit/diff.hpp"

namespace agentgit {

RecoveryPolicy RecoveryPolicy::from_string(const std::string& mode, int max_retries) {
  RecoveryPolicy policy;
  if (mode == "none") {
    policy.mode = Mode::None;
  } else if (mode == "next-option") {
    policy.mode = Mode::NextOption;
  } else if (mode == "retry-then-next") {
    policy.mode = Mode::RetryThenNext;
  } else {
    throw ValidationError("unknown recovery mode '" + mode + "'");
  }
  if (policy.mode == Mode::None && max_retries != 0) {
    throw ValidationError("max_retries must be 0 when recovery mode is none");
  }
  policy.max_retries = max_retries;
  return policy;
}

RecoveryDecision recover(int option_count, const RecoveryPolicy& policy,
                         const std::set<int>& exhausted, int attempts_on_current,
                         int current_option) {
  if (policy.mode == RecoveryPolicy::Mode::None) {
    return {RecoveryDecision::Action::Abort, -1};
  }
  int budget = policy.mode == RecoveryPolicy::Mode::RetryThenNext
                   ? 1 + policy.max_retries
                   : 1;
  if (attempts_on_current < budget) {
    return {RecoveryDecision::Action::Retry, current_option};
  }
  for (int k = 0; k < option_count; ++k) {
    if (k == current_option || exhausted.count(k)) continue;
    return {RecoveryDecision::Action::TryOption, k};
  }
  return {RecoveryDecision::Action::Abort, -1};
}

Json JournalRecord::to_json() const {
  Json j = Json::object();
  j["ts"] = ts;
  j["run_id"] = run_id;
  j["step"] = step;
  j["option"] = option;
  j["status"] = status;
  j["tokens_in"] = tokens_in;
  j["tokens_out"] = tokens_out;
  j["wall_ms"] = wall_ms;
  return j;
}

JournalRecord JournalRecord::from_json(const Json& j) {
  JournalRecord r;
  r.ts = j.at("ts").get<std::int64_t>();
  r.run_id = j.at("run_id").get<std::string>();
  r.step = j.at("step").get<std::string>();
  r.option = j.at("option").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.tokens_in = j.at("tokens_in").get<std::int64_t>();
  r.tokens_out = j.at("tokens_out").get<std::int64_t>();
  r.wall_ms = j.at("wall_ms").get<std::int64_t>();
  return r;
}

void RunJournal::append(const JournalRecord& record) {
  if (!enabled()) return;
  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot append to journal " + path_.string());
  out << canonical_serialize(record.to_json()) << "\n";
}

std::vector<JournalRecord> read_journal(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read journal " + path.string());
  std::vector<JournalRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(JournalRecord::from_json(parse_json(line, "journal")));
    } catch (const std::exception& e) {
      throw ValidationError("journal " + path.string() + " line " +
                            std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

StepOutcome Engine::execute_step(const Json& state, const StepSpec& step,
                                 const OptionSpec& option,
                                 const ExecutorRegistry& registry) {
  try {
    return registry.get(option.executor).execute(state, step, option);
  } catch (const Error& e) {
    throw ExecutorError("step '" + step.name + "' option '" + option.name +
                        "': " + e.what());
  }
}

Json Engine::apply_outcome(const Json& state, const StepOutcome& outcome) {
  Json next = state;
  for (const auto& [path, value] : outcome.delta) {
    set_key_path(next, path, value);
  }
  if (outcome.message.has_value()) {
    if (!next.contains("messages") || !next["messages"].is_array()) {
      next["messages"] = Json::array();
    }
    next["messages"].push_back(*outcome.message);
  }
  if (outcome.tool_call.has_value()) {
    if (!next.contains("tool_calls") || !next["tool_calls"].is_array()) {
      next["tool_calls"] = Json::array();
    }
    next["tool_calls"].push_back(*outcome.tool_call);
  }
  return next;
}

std::int64_t Engine::journal_ts() const {
  if (fixed_ts_.has_value()) return *fixed_ts_;
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

RunResult Engine::run_path(const WorkflowSpec& spec, const std::vector<int>& choices,
                           const std::optional<std::string>& start,
                           const RecoveryPolicy& policy, const std::string& branch) {
  RunResult result;

  Json state;
  std::string current_id;
  int start_index = 0;
  if (start.has_value()) {
    Checkpoint cp = store_.load_checkpoint(*start);
    start_index = static_cast<int>(cp.step_index);
    state = store_.checkout(*start);
    current_id = *start;
    if (!store_.branch_head(branch).has_value()) {
      store_.create_branch(branch, *start);
    }
  } else {
    state = spec.initial;
    current_id = store_.commit(std::nullopt, state, branch, "root");
  }
  result.root_checkpoint = start.has_value() ? "" : current_id;

  int remaining = spec.n() - start_index;
  if (static_cast<int>(choices.size()) != remaining) {
    throw ValidationError("expected " + std::to_string(remaining) + " choices from step " +
                          std::to_string(start_index + 1) + ", got " +
                          std::to_string(choices.size()));
  }

  for (int k = 0; k < remaining; ++k) {
    int step_index = start_index + k;
    const StepSpec& step = spec.steps[static_cast<std::size_t>(step_index)];
    int option_count = static_cast<int>(step.options.size());
    int chosen = choices[static_cast<std::size_t>(k)];
    if (chosen < 0 || chosen >= option_count) {
      throw ValidationError("option " + std::to_string(chosen) + " out of range at step " +
                            std::to_string(step_index + 1));
    }

    int current_option = chosen;
    int attempts_on_current = 0;
    std::set<int> exhausted;
    bool committed = false;
    std::string last_error;

    while (!committed) {
      const OptionSpec& option = step.options[static_cast<std::size_t>(current_option)];
      StepOutcome outcome = execute_step(state, step, option, registry_);
      ++result.steps_executed;
      ++attempts_on_current;
      result.totals.tokens_in += outcome.tokens_in;
      result.totals.tokens_out += outcome.tokens_out;
      result.totals.wall_ms += outcome.wall_ms;
      if (journal_ != nullptr) {
        journal_->append({journal_ts(), run_id_, step.name, option.name,
                          outcome.ok() ? "ok" : "failed", outcome.tokens_in,
                          outcome.tokens_out, outcome.wall_ms});
      }

      if (outcome.ok()) {
        state = apply_outcome(state, outcome);
        StepAccounting acc{outcome.tokens_in, outcome.tokens_out, outcome.wall_ms};
        current_id = store_.commit(current_id, state, branch,
                                   "step " + step.name + " via " + option.name,
                                   current_option, acc);
        result.committed.push_back(current_id);
        committed = true;
        break;
      }

      last_error = outcome.error;
      RecoveryDecision decision =
          recover(option_count, policy, exhausted, attempts_on_current, current_option);
      switch (decision.action) {
        case RecoveryDecision::Action::Retry:
          break;  // same option, same parent state
        case RecoveryDecision::Action::TryOption:
          exhausted.insert(current_option);
          current_option = decision.option;
          attempts_on_current = 0;
          break;
        case RecoveryDecision::Action::Abort:
          result.ok = false;
          result.failed_step = step.name;
          result.final_checkpoint = current_id;
          result.error = "step '" + step.name + "' failed after " +
                         std::to_string(attempts_on_current) + " attempt(s) on option '" +
                         option.name + "': " + last_error;
          return result;
      }
    }
  }

  result.ok = true;
  result.final_checkpoint = current_id;
  return result;
}

ReplayReport Engine::replay(const std::string& leaf, const WorkflowSpec& spec) {
  ReplayReport report;
  std::vector<std::string> chain = store_.ancestry(leaf);

  Json state;
  try {
    state = store_.checkout(chain.front());
    report.layers.push_back({0, chain.front(), ReplayLayer::Status::Ok, ""});
  } catch (const CorruptObjectError& e) {
    report.ok = false;
    report.layers.push_back({0, chain.front(), ReplayLayer::Status::CorruptObject, e.what()});
    return report;
  }

  for (std::size_t i = 1; i < chain.size(); ++i) {
    Checkpoint cp = store_.load_checkpoint(chain[i]);
    ReplayLayer layer;
    layer.step_index = cp.step_index;
    layer.checkpoint = cp.id;

    if (cp.step_index < 1 || cp.step_index > spec.n()) {
      throw ValidationError("checkpoint " + cp.id + " is at layer " +
                            std::to_string(cp.step_index) +
                            ", outside the workflow's " + std::to_string(spec.n()) +
                            " steps");
    }
    const StepSpec& step = spec.steps[static_cast<std::size_t>(cp.step_index - 1)];

    if (!cp.option_taken.has_value() ||
        *cp.option_taken >= static_cast<int>(step.options.size())) {
      layer.status = ReplayLayer::Status::Unverifiable;
      layer.detail = "no recorded option for this layer";
      report.ok = false;
      report.layers.push_back(layer);
      return report;
    }
    const OptionSpec& option = step.options[static_cast<std::size_t>(*cp.option_taken)];
    Executor& executor = registry_.get(option.executor);
    if (!executor.deterministic()) {
      layer.status = ReplayLayer::Status::Unverifiable;
      layer.detail = "executor '" + option.executor + "' is not deterministic here";
      report.ok = false;
      report.layers.push_back(layer);
      return report;
    }

    StepOutcome outcome = executor.execute(state, step, option);
    if (!outcome.ok()) {
      layer.status = ReplayLayer::Status::StateMismatch;
      layer.detail = "re-execution failed: " + outcome.error;
      report.ok = false;
      report.layers.push_back(layer);
      return report;
    }
    state = apply_outcome(state, outcome);
    std::string computed = state_hash(state);
    if (computed != cp.state_hash) {
      layer.status = ReplayLayer::Status::StateMismatch;
      layer.detail = "recomputed state hash " + computed + " != recorded " + cp.state_hash;
      report.ok = false;
      report.layers.push_back(layer);
      return report;
    }

    try {
      store_.checkout(cp.id);
      layer.status = ReplayLayer::Status::Ok;
    } catch (const CorruptObjectError& e) {
      layer.status = ReplayLayer::Status::CorruptObject;
      layer.detail = e.what();
      report.ok = false;
    }
    report.layers.push_back(layer);
  }
  return report;
}

}  // namespace agentgit
