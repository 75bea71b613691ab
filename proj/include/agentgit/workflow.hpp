#pragma once

#include <string>
#include <vector>

#include "agentgit/canonical.hpp"

namespace agentgit {

class ExecutorRegistry;

struct OptionSpec {
  std::string name;
  std::string executor;  // registered executor id
  Json params = Json::object();
};

struct StepSpec {
  std::string name;
  std::vector<OptionSpec> options;  // x_i = options.size()
};

// Declarative multi-step workflow; n = steps.size(), the i-th step has
// steps[i].options.size() selectable options.
struct WorkflowSpec {
  std::string name;
  Json initial = Json::object();
  std::vector<StepSpec> steps;

  int n() const { return static_cast<int>(steps.size()); }
  std::vector<int> option_counts() const;
};

// Parses and validates the workflow file format:
//   {name, initial: StateDoc, steps: [{name, options: [{name, executor, params}]}]}
// With a registry, unknown executor ids are rejected at load.
WorkflowSpec load_workflow(const std::string& bytes,
                           const ExecutorRegistry* registry = nullptr,
                           const std::string& origin = "workflow");

WorkflowSpec load_workflow_file(const std::string& path,
                                const ExecutorRegistry* registry = nullptr);

}  // namespace agentgit
