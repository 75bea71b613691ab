#include "agentgit/executor.hpp"

namespace agentgit {

void ExecutorRegistry::add(std::shared_ptr<Executor> executor) {
  std::string id = executor->id();
  executors_[id] = std::move(executor);
}

bool ExecutorRegistry::has(const std::string& id) const {
  return executors_.count(id) > 0;
}

Executor& ExecutorRegistry::get(const std::string& id) const {
  auto it = executors_.find(id);
  if (it == executors_.end()) {
    throw ExecutorError("unknown executor '" + id + "'");
  }
  return *it->second;
}

std::vector<std::string> ExecutorRegistry::ids() const {
  std::vector<std::string> out;
  out.reserve(executors_.size());
  for (const auto& [id, executor] : executors_) out.push_back(id);
  return out;
}

}  // namespace agentgit
