#include "agentgit/diff.hpp"

#include <vector>

namespace agentgit {

namespace {

void flatten_into(const Json& value, const std::string& path, FlatDoc& out) {
  if (value.is_object() && !value.empty()) {
    for (const auto& [key, child] : value.items()) {
      flatten_into(child, path.empty() ? key : path + "." + key, out);
    }
  } else {
    out[path] = value;
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> segments;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = path.find('.', start);
    if (dot == std::string::npos) {
      segments.push_back(path.substr(start));
      break;
    }
    segments.push_back(path.substr(start, dot - start));
    start = dot + 1;
  }
  return segments;
}

}  // namespace

FlatDoc flatten(const Json& doc) {
  FlatDoc out;
  if (doc.is_object() && doc.empty()) return out;
  flatten_into(doc, "", out);
  return out;
}

void set_key_path(Json& doc, const std::string& path, const Json& value) {
  Json* node = &doc;
  auto segments = split_path(path);
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    Json& child = (*node)[segments[i]];
    if (!child.is_object()) child = Json::object();
    node = &child;
  }
  (*node)[segments.back()] = value;
}

const Json* get_key_path(const Json& doc, const std::string& path) {
  const Json* node = &doc;
  for (const auto& segment : split_path(path)) {
    if (!node->is_object()) return nullptr;
    auto it = node->find(segment);
    if (it == node->end()) return nullptr;
    node = &*it;
  }
  return node;
}

Json unflatten(const FlatDoc& flat) {
  Json doc = Json::object();
  for (const auto& [path, value] : flat) {
    set_key_path(doc, path, value);
  }
  return doc;
}

Diff diff_docs(const Json& base, const Json& target) {
  FlatDoc b = flatten(base);
  FlatDoc t = flatten(target);
  Diff d;
  for (const auto& [path, value] : b) {
    auto it = t.find(path);
    if (it == t.end()) {
      d.removed[path] = value;
    } else if (!canonical_equal(value, it->second)) {
      d.changed[path] = {value, it->second};
    }
  }
  for (const auto& [path, value] : t) {
    if (b.find(path) == b.end()) {
      d.added[path] = value;
    }
  }
  return d;
}

Json apply_diff(const Json& base, const Diff& diff) {
  FlatDoc flat = flatten(base);
  for (const auto& [path, value] : diff.removed) {
    (void)value;
    flat.erase(path);
  }
  for (const auto& [path, change] : diff.changed) {
    flat[path] = change.second;
  }
  for (const auto& [path, value] : diff.added) {
    flat[path] = value;
  }
  return unflatten(flat);
}

Json Diff::to_json() const {
  Json j = Json::object();
  j["added"] = Json::object();
  for (const auto& [path, value] : added) j["added"][path] = value;
  j["removed"] = Json::object();
  for (const auto& [path, value] : removed) j["removed"][path] = value;
  j["changed"] = Json::object();
  for (const auto& [path, change] : changed) {
    j["changed"][path] = Json::array({change.first, change.second});
  }
  return j;
}

Diff Diff::from_json(const Json& j) {
  Diff d;
  for (const auto& [path, value] : j.at("added").items()) d.added[path] = value;
  for (const auto& [path, value] : j.at("removed").items()) d.removed[path] = value;
  for (const auto& [path, value] : j.at("changed").items()) {
    d.changed[path] = {value.at(0), value.at(1)};
  }
  return d;
}

}  // namespace agentgit
