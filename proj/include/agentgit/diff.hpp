#pragma once

#include <map>
#include <string>
#include <utility>

#include "agentgit/canonical.hpp"

namespace agentgit {

// Leaf values of the flattened form: scalars, arrays (atomic — no
// element-wise diffing) and empty objects. Paths are dot-joined object
// keys; a key containing '.' is indistinguishable from nesting, so
// state documents are expected to use dot-free key segments.
using FlatDoc = std::map<std::string, Json>;

FlatDoc flatten(const Json& doc);

// Rebuilds a document from a flat map. When a path is both a leaf and
// a prefix of deeper paths, the deeper paths win (maps created as
// needed). Flat maps produced by flatten() never hit that case.
Json unflatten(const FlatDoc& flat);

struct Diff {
  FlatDoc added;
  FlatDoc removed;
  std::map<std::string, std::pair<Json, Json>> changed;  // path -> (old, new)

  bool empty() const { return added.empty() && removed.empty() && changed.empty(); }

  Json to_json() const;
  static Diff from_json(const Json& j);
};

// Key-path granular difference; apply_diff(base, diff_docs(base, target))
// reproduces target exactly.
Diff diff_docs(const Json& base, const Json& target);

Json apply_diff(const Json& base, const Diff& diff);

// Sets one dot-joined key-path in place, creating intermediate objects.
void set_key_path(Json& doc, const std::string& path, const Json& value);

// Reads one dot-joined key-path; returns nullptr when absent.
const Json* get_key_path(const Json& doc, const std::string& path);

}  // namespace agentgit
