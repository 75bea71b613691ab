#include "agentgit/merge.hpp"

#include <set>

namespace agentgit {

namespace {

std::optional<Json> lookup(const FlatDoc& doc, const std::string& path) {
  auto it = doc.find(path);
  if (it == doc.end()) return std::nullopt;
  return it->second;
}

bool same(const std::optional<Json>& a, const std::optional<Json>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a.has_value()) return true;
  return canonical_equal(*a, *b);
}

}  // namespace

MergeStrategy merge_strategy_from_string(const std::string& s) {
  if (s == "fail-on-conflict") return MergeStrategy::FailOnConflict;
  if (s == "prefer-ours") return MergeStrategy::PreferOurs;
  if (s == "prefer-theirs") return MergeStrategy::PreferTheirs;
  throw ValidationError("unknown merge strategy '" + s + "'");
}

std::string to_string(MergeStrategy s) {
  switch (s) {
    case MergeStrategy::FailOnConflict: return "fail-on-conflict";
    case MergeStrategy::PreferOurs: return "prefer-ours";
    case MergeStrategy::PreferTheirs: return "prefer-theirs";
  }
  return "?";
}

MergeOutcome merge_states(const Json& base, const Json& ours, const Json& theirs,
                          MergeStrategy strategy) {
  FlatDoc fb = flatten(base);
  FlatDoc fo = flatten(ours);
  FlatDoc ft = flatten(theirs);

  std::set<std::string> paths;
  for (const auto& [p, v] : fb) paths.insert(p);
  for (const auto& [p, v] : fo) paths.insert(p);
  for (const auto& [p, v] : ft) paths.insert(p);

  MergeOutcome outcome;
  FlatDoc result;
  for (const auto& path : paths) {
    auto b = lookup(fb, path);
    auto o = lookup(fo, path);
    auto t = lookup(ft, path);

    std::optional<Json> resolved;
    bool ours_changed = !same(o, b);
    bool theirs_changed = !same(t, b);
    if (!ours_changed && !theirs_changed) {
      resolved = b;
    } else if (ours_changed && !theirs_changed) {
      resolved = o;
    } else if (theirs_changed && !ours_changed) {
      resolved = t;
    } else if (same(o, t)) {
      resolved = o;
    } else {
      switch (strategy) {
        case MergeStrategy::FailOnConflict:
          outcome.conflicts.push_back({path, b, o, t});
          continue;
        case MergeStrategy::PreferOurs:
          resolved = o;
          break;
        case MergeStrategy::PreferTheirs:
          resolved = t;
          break;
      }
    }
    if (resolved.has_value()) result[path] = *resolved;
  }

  if (outcome.conflicts.empty()) {
    outcome.merged = unflatten(result);
  }
  return outcome;
}

Json MergeOutcome::conflicts_to_json() const {
  Json arr = Json::array();
  for (const auto& c : conflicts) {
    Json item = Json::object();
    item["path"] = c.path;
    item["base"] = c.base.has_value() ? *c.base : Json(nullptr);
    item["ours"] = c.ours.has_value() ? *c.ours : Json(nullptr);
    item["theirs"] = c.theirs.has_value() ? *c.theirs : Json(nullptr);
    item["base_present"] = c.base.has_value();
    item["ours_present"] = c.ours.has_value();
    item["theirs_present"] = c.theirs.has_value();
    arr.push_back(std::move(item));
  }
  return arr;
}

}  // namespace agentgit
