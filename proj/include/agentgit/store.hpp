#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agentgit/canonical.hpp"
#include "agentgit/merge.hpp"

namespace agentgit {

struct StepAccounting {
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
  std::int64_t wall_ms = 0;

  Json to_json() const;
  static StepAccounting from_json(const Json& j);
};

// Immutable node of the version tree. id is the SHA-256 of the
// canonical record excluding id.
struct Checkpoint {
  std::string id;
  std::string parent;  // empty = root (step_index 0)
  std::string state_hash;
  std::int64_t step_index = 0;
  std::optional<int> option_taken;
  std::string branch;
  std::int64_t created_at = 0;  // ms since epoch; 0 under fixed timestamps
  std::string message;
  std::optional<StepAccounting> accounting;

  bool is_root() const { return parent.empty(); }

  Json to_record() const;  // canonical record, id excluded
  static Checkpoint from_record(std::string id, const Json& record);
};

struct BranchRef {
  std::string name;
  std::string head;
};

bool valid_branch_name(const std::string& name);

// Persistent content-addressed checkpoint tree.
//
// Layout under root:
//   objects/st/<2-char prefix>/<digest>   canonical StateDoc bytes
//   objects/cp/<2-char prefix>/<digest>   canonical checkpoint records
//   refs/branches/<name>                  64-hex head id + newline
//   HEAD                                  branch name
//   store.meta                            {"version":1}
//
// Checkpoints are never deleted or mutated. Object writes are
// write-once (temp file + atomic rename); commits to one branch are
// serialized through a lock file and head comparison, losers get a
// retryable ConflictError. Instances hold no shared mutable state, so
// one Store may be used from several threads.
class Store {
 public:
  // Creates the layout (idempotent on an existing store).
  static Store init(const std::filesystem::path& root);
  // Opens an existing store; throws NotFoundError otherwise.
  static Store open(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }

  // When set, commits use this created_at instead of the wall clock,
  // which makes checkpoint ids reproducible.
  void set_fixed_timestamp(std::optional<std::int64_t> ts) { fixed_timestamp_ = ts; }

  // Stores the state blob (deduplicated), writes the checkpoint record
  // and advances the branch head. parent must be the current head of
  // branch; a root commit (no parent) creates the branch.
  std::string commit(const std::optional<std::string>& parent, const Json& state,
                     const std::string& branch, const std::string& message,
                     std::optional<int> option_taken = std::nullopt,
                     std::optional<StepAccounting> accounting = std::nullopt);

  // Returns the exact StateDoc committed at id; verifies the blob
  // against its content address. The store is not modified.
  Json checkout(const std::string& id) const;

  Checkpoint load_checkpoint(const std::string& id) const;
  bool has_checkpoint(const std::string& id) const;

  BranchRef create_branch(const std::string& name, const std::string& from);
  std::optional<std::string> branch_head(const std::string& name) const;
  std::vector<BranchRef> branches() const;
  std::string head_branch() const;

  // Checkpoint ids from the root to id inclusive.
  std::vector<std::string> ancestry(const std::string& id) const;

  std::string lowest_common_ancestor(const std::string& a, const std::string& b) const;

  Diff diff(const std::string& base, const std::string& target) const;

  // Three-way merge against the lowest common ancestor. On success
  // commits a new checkpoint on ours' branch (parent = ours, theirs
  // recorded in the message) and fills commit_id.
  MergeOutcome merge(const std::string& ours, const std::string& theirs,
                     MergeStrategy strategy);

  // Full scan of objects/cp. Unordered.
  std::vector<Checkpoint> all_checkpoints() const;

  std::size_t checkpoint_count() const;
  std::size_t state_object_count() const;

 private:
  explicit Store(std::filesystem::path root) : root_(std::move(root)) {}

  std::filesystem::path object_path(const char* kind, const std::string& digest) const;
  std::filesystem::path branch_path(const std::string& name) const;
  std::string write_object(const char* kind, const std::string& bytes);
  std::string read_object(const char* kind, const std::string& digest) const;
  std::int64_t now_ms() const;

  std::filesystem::path root_;
  std::optional<std::int64_t> fixed_timestamp_;
};

}  // namespace agentgit
