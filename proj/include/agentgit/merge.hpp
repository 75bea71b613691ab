#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agentgit/diff.hpp"

namespace agentgit {

enum class MergeStrategy { FailOnConflict, PreferOurs, PreferTheirs };

MergeStrategy merge_strategy_from_string(const std::string& s);
std::string to_string(MergeStrategy s);

// One key-path changed differently on both sides. nullopt = key absent
// on that side.
struct MergeConflict {
  std::string path;
  std::optional<Json> base;
  std::optional<Json> ours;
  std::optional<Json> theirs;
};

struct MergeOutcome {
  std::optional<Json> merged;           // set iff conflicts resolved or none
  std::vector<MergeConflict> conflicts; // nonempty iff merged is unset
  std::string commit_id;                // filled by Store::merge on success

  bool ok() const { return merged.has_value(); }
  Json conflicts_to_json() const;
};

// Three-way merge at key-path granularity. Keys changed on one side
// only take that side; identical changes take the shared value;
// divergent changes are conflicts, resolved per strategy or returned
// as the conflict list under FailOnConflict.
MergeOutcome merge_states(const Json& base, const Json& ours, const Json& theirs,
                          MergeStrategy strategy);

}  // namespace agentgit
