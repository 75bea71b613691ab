#include "agentgit/workflow.hpp"

#include <fstream>
#include <set>

#include "agentgit/executor.hpp"

namespace agentgit {

std::vector<int> WorkflowSpec::option_counts() const {
  std::vector<int> x;
  x.reserve(steps.size());
  for (const auto& step : steps) {
    x.push_back(static_cast<int>(step.options.size()));
  }
  return x;
}

WorkflowSpec load_workflow(const std::string& bytes, const ExecutorRegistry* registry,
                           const std::string& origin) {
  Json doc = parse_json(bytes, origin);
  if (!doc.is_object()) {
    throw ValidationError(origin + ": workflow must be a JSON object");
  }

  WorkflowSpec spec;
  spec.name = doc.value("name", std::string("workflow"));
  spec.initial = doc.value("initial", Json::object());
  if (!spec.initial.is_object()) {
    throw ValidationError(origin + ": initial state must be an object");
  }

  if (!doc.contains("steps") || !doc.at("steps").is_array() || doc.at("steps").empty()) {
    throw ValidationError(origin + ": workflow needs a non-empty steps array");
  }

  for (const auto& step_json : doc.at("steps")) {
    StepSpec step;
    step.name = step_json.value("name", std::string());
    if (step.name.empty()) {
      throw ValidationError(origin + ": step " + std::to_string(spec.steps.size() + 1) +
                            " has no name");
    }
    if (!step_json.contains("options") || !step_json.at("options").is_array() ||
        step_json.at("options").empty()) {
      throw ValidationError(origin + ": step '" + step.name +
                            "' has an empty options list");
    }
    std::set<std::string> names;
    for (const auto& option_json : step_json.at("options")) {
      OptionSpec option;
      option.name = option_json.value("name", std::string());
      option.executor = option_json.value("executor", std::string());
      option.params = option_json.value("params", Json::object());
      if (option.name.empty() || option.executor.empty()) {
        throw ValidationError(origin + ": step '" + step.name +
                              "' has an option without name or executor");
      }
      if (!names.insert(option.name).second) {
        throw ValidationError(origin + ": step '" + step.name +
                              "' has duplicate option name '" + option.name + "'");
      }
      if (registry != nullptr && !registry->has(option.executor)) {
        throw ValidationError(origin + ": step '" + step.name + "' option '" +
                              option.name + "' names unknown executor '" +
                              option.executor + "'");
      }
      step.options.push_back(std::move(option));
    }
    spec.steps.push_back(std::move(step));
  }
  return spec;
}

WorkflowSpec load_workflow_file(const std::string& path, const ExecutorRegistry* registry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw NotFoundError("cannot open workflow file " + path);
  }
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return load_workflow(bytes, registry, path);
}

}  // namespace agentgit
