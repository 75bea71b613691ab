#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "agentgit/canonical.hpp"

namespace agentgit {

enum class FixtureMode { Off, Record, Replay };

FixtureMode fixture_mode_from_string(const std::string& s);

// Recorded external-service responses keyed by the digest of
// (executor id + canonical request). Files live at
// <path>/<executor>/<digest>.json as {request, response}. Replay mode
// never touches the network; a missing entry raises FixtureMissError.
// Reads are lock-free (files are immutable once written); writes are
// serialized and atomic.
class FixtureStore {
 public:
  FixtureStore(std::filesystem::path path, FixtureMode mode)
      : path_(std::move(path)), mode_(mode) {}

  FixtureMode mode() const { return mode_; }

  static std::string request_key(const std::string& executor_id, const Json& request);

  std::optional<Json> lookup(const std::string& executor_id, const Json& request) const;

  // Replay-mode lookup that must succeed.
  Json require(const std::string& executor_id, const Json& request) const;

  void record(const std::string& executor_id, const Json& request, const Json& response);

 private:
  std::filesystem::path entry_path(const std::string& executor_id,
                                   const std::string& key) const;

  std::filesystem::path path_;
  FixtureMode mode_;
  std::mutex write_mutex_;
};

}  // namespace agentgit
