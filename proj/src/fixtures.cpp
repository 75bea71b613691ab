#include "agentgit/fixtures.hpp"

#include <fstream>

#include "agentgit/sha256.hpp"

namespace agentgit {

namespace fs = std::filesystem;

FixtureMode fixture_mode_from_string(const std::string& s) {
  if (s == "off") return FixtureMode::Off;
  if (s == "record") return FixtureMode::Record;
  if (s == "replay") return FixtureMode::Replay;
  throw ValidationError("unknown fixture mode '" + s + "'");
}

std::string FixtureStore::request_key(const std::string& executor_id, const Json& request) {
  return Sha256::hex_digest(executor_id + "\n" + canonical_serialize(request));
}

fs::path FixtureStore::entry_path(const std::string& executor_id,
                                  const std::string& key) const {
  return path_ / executor_id / (key + ".json");
}

std::optional<Json> FixtureStore::lookup(const std::string& executor_id,
                                         const Json& request) const {
  std::string key = request_key(executor_id, request);
  fs::path path = entry_path(executor_id, key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  Json entry = parse_json(bytes, path.string());
  return entry.at("response");
}

Json FixtureStore::require(const std::string& executor_id, const Json& request) const {
  auto response = lookup(executor_id, request);
  if (!response.has_value()) {
    throw FixtureMissError("fixture miss: " + request_key(executor_id, request));
  }
  return *response;
}

void FixtureStore::record(const std::string& executor_id, const Json& request,
                          const Json& response) {
  std::string key = request_key(executor_id, request);
  fs::path path = entry_path(executor_id, key);

  Json entry = Json::object();
  entry["request"] = request;
  entry["response"] = response;
  std::string bytes = canonical_serialize(entry) + "\n";

  std::lock_guard<std::mutex> lock(write_mutex_);
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write fixture " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  fs::rename(tmp, path);
}

}  // namespace agentgit
