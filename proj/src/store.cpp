#include "agentgit/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <system_error>
#include <thread>

#include "agentgit/sha256.hpp"

namespace agentgit {

namespace fs = std::filesystem;

namespace {

constexpr int kStoreFormatVersion = 1;

bool is_hex_digest(const std::string& s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

// temp file + atomic rename; partially written files are never visible
void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) & 0xffff);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("rename failed for " + path.string() + ": " + ec.message());
  }
}

// O_CREAT|O_EXCL lock file guarding one branch head; released on scope exit
class BranchLock {
 public:
  BranchLock(const fs::path& branch_file, std::chrono::milliseconds timeout) {
    lock_path_ = branch_file;
    lock_path_ += ".lock";
    fs::create_directories(branch_file.parent_path());
    auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
      if (fd >= 0) {
        ::close(fd);
        held_ = true;
        return;
      }
      if (errno != EEXIST) {
        throw Error("cannot create lock " + lock_path_.string());
      }
      if (std::chrono::steady_clock::now() >= deadline) {
        throw ConflictError("branch lock timeout on " + lock_path_.string());
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }

  ~BranchLock() {
    if (held_) {
      std::error_code ec;
      fs::remove(lock_path_, ec);
    }
  }

  BranchLock(const BranchLock&) = delete;
  BranchLock& operator=(const BranchLock&) = delete;

 private:
  fs::path lock_path_;
  bool held_ = false;
};

}  // namespace

Json StepAccounting::to_json() const {
  Json j = Json::object();
  j["tokens_in"] = tokens_in;
  j["tokens_out"] = tokens_out;
  j["wall_ms"] = wall_ms;
  return j;
}

StepAccounting StepAccounting::from_json(const Json& j) {
  StepAccounting acc;
  acc.tokens_in = j.at("tokens_in").get<std::int64_t>();
  acc.tokens_out = j.at("tokens_out").get<std::int64_t>();
  acc.wall_ms = j.at("wall_ms").get<std::int64_t>();
  return acc;
}

Json Checkpoint::to_record() const {
  Json j = Json::object();
  j["parent"] = parent.empty() ? Json(nullptr) : Json(parent);
  j["state_hash"] = state_hash;
  j["step_index"] = step_index;
  j["option_taken"] = option_taken.has_value() ? Json(*option_taken) : Json(nullptr);
  j["branch"] = branch;
  j["created_at"] = created_at;
  j["message"] = message;
  j["accounting"] = accounting.has_value() ? accounting->to_json() : Json(nullptr);
  return j;
}

Checkpoint Checkpoint::from_record(std::string id, const Json& record) {
  Checkpoint cp;
  cp.id = std::move(id);
  if (!record.at("parent").is_null()) cp.parent = record.at("parent").get<std::string>();
  cp.state_hash = record.at("state_hash").get<std::string>();
  cp.step_index = record.at("step_index").get<std::int64_t>();
  if (!record.at("option_taken").is_null()) cp.option_taken = record.at("option_taken").get<int>();
  cp.branch = record.at("branch").get<std::string>();
  cp.created_at = record.at("created_at").get<std::int64_t>();
  cp.message = record.at("message").get<std::string>();
  if (!record.at("accounting").is_null()) {
    cp.accounting = StepAccounting::from_json(record.at("accounting"));
  }
  return cp;
}

bool valid_branch_name(const std::string& name) {
  if (name.empty() || name.front() == '-') return false;
  for (char c : name) {
    bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
              (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '/' || c == '-';
    if (!ok) return false;
  }
  // path-mapped, so forbid empty / "." / ".." segments
  std::size_t start = 0;
  while (start <= name.size()) {
    std::size_t slash = name.find('/', start);
    std::string seg = name.substr(start, slash == std::string::npos ? std::string::npos
                                                                    : slash - start);
    if (seg.empty() || seg == "." || seg == "..") return false;
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return true;
}

Store Store::init(const fs::path& root) {
  if (fs::exists(root) && !fs::is_directory(root)) {
    throw ValidationError("not a store root: " + root.string() + " is not a directory");
  }
  fs::path meta = root / "store.meta";
  if (fs::exists(meta)) {
    return open(root);  // idempotent re-init
  }
  if (fs::exists(root) && !fs::is_empty(root)) {
    throw ValidationError("not a store root: " + root.string() +
                          " exists and is not an initialized store");
  }
  fs::create_directories(root / "objects" / "st");
  fs::create_directories(root / "objects" / "cp");
  fs::create_directories(root / "refs" / "branches");
  Json m = Json::object();
  m["version"] = kStoreFormatVersion;
  write_file_atomic(meta, canonical_serialize(m) + "\n");
  write_file_atomic(root / "HEAD", "main\n");
  return Store(root);
}

Store Store::open(const fs::path& root) {
  fs::path meta = root / "store.meta";
  if (!fs::exists(meta)) {
    throw NotFoundError("not a store: " + root.string());
  }
  Json m = parse_json(read_file(meta), meta.string());
  if (m.at("version").get<int>() != kStoreFormatVersion) {
    throw ValidationError("unsupported store format version in " + meta.string());
  }
  return Store(root);
}

fs::path Store::object_path(const char* kind, const std::string& digest) const {
  return root_ / "objects" / kind / digest.substr(0, 2) / digest;
}

fs::path Store::branch_path(const std::string& name) const {
  return root_ / "refs" / "branches" / name;
}

std::string Store::write_object(const char* kind, const std::string& bytes) {
  std::string digest = Sha256::hex_digest(bytes);
  fs::path path = object_path(kind, digest);
  if (!fs::exists(path)) {
    write_file_atomic(path, bytes);
  }
  return digest;
}

std::string Store::read_object(const char* kind, const std::string& digest) const {
  fs::path path = object_path(kind, digest);
  if (!fs::exists(path)) {
    throw NotFoundError(std::string("unknown ") +
                        (std::string(kind) == "st" ? "state object" : "checkpoint") +
                        " " + digest);
  }
  return read_file(path);
}

std::int64_t Store::now_ms() const {
  if (fixed_timestamp_.has_value()) return *fixed_timestamp_;
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string Store::commit(const std::optional<std::string>& parent, const Json& state,
                          const std::string& branch, const std::string& message,
                          std::optional<int> option_taken,
                          std::optional<StepAccounting> accounting) {
  if (!valid_branch_name(branch)) {
    throw ValidationError("invalid branch name '" + branch + "'");
  }

  Checkpoint cp;
  if (parent.has_value()) {
    Checkpoint parent_cp = load_checkpoint(*parent);  // throws on unknown parent
    cp.parent = *parent;
    cp.step_index = parent_cp.step_index + 1;
  }
  cp.branch = branch;
  cp.message = message;
  cp.option_taken = option_taken;
  cp.accounting = std::move(accounting);
  cp.created_at = now_ms();

  std::string state_bytes = canonical_serialize(state);
  cp.state_hash = Sha256::hex_digest(state_bytes);

  std::string record_bytes = canonical_serialize(cp.to_record());
  cp.id = Sha256::hex_digest(record_bytes);

  // the head check and the object writes happen under the branch lock,
  // so a lost race writes nothing
  fs::path bpath = branch_path(branch);
  BranchLock lock(bpath, std::chrono::seconds(5));
  if (fs::exists(bpath)) {
    std::string head = read_file(bpath);
    while (!head.empty() && (head.back() == '\n' || head.back() == '\r')) head.pop_back();
    if (!parent.has_value() || head != *parent) {
      throw ConflictError("branch '" + branch + "' head is " + head +
                          ", expected " + (parent ? *parent : std::string("<none>")) +
                          " (serialization conflict)");
    }
  } else if (parent.has_value()) {
    throw NotFoundError("unknown branch '" + branch +
                        "' (create it from a checkpoint first)");
  }

  fs::path blob_path = object_path("st", cp.state_hash);
  if (!fs::exists(blob_path)) {
    write_file_atomic(blob_path, state_bytes);
  }
  fs::path record_path = object_path("cp", cp.id);
  if (!fs::exists(record_path)) {
    write_file_atomic(record_path, record_bytes);
  }
  write_file_atomic(bpath, cp.id + "\n");
  return cp.id;
}

Json Store::checkout(const std::string& id) const {
  Checkpoint cp = load_checkpoint(id);
  std::string bytes;
  try {
    bytes = read_object("st", cp.state_hash);
  } catch (const NotFoundError&) {
    // the checkpoint exists, so a missing blob is store damage
    throw CorruptObjectError("state object " + cp.state_hash + " of checkpoint " + id +
                             " is missing");
  }
  if (Sha256::hex_digest(bytes) != cp.state_hash) {
    throw CorruptObjectError("state object " + cp.state_hash +
                             " does not match its content address");
  }
  return parse_json(bytes, "state object " + cp.state_hash);
}

Checkpoint Store::load_checkpoint(const std::string& id) const {
  if (!is_hex_digest(id)) {
    throw NotFoundError("unknown checkpoint " + id);
  }
  std::string bytes = read_object("cp", id);
  if (Sha256::hex_digest(bytes) != id) {
    throw CorruptObjectError("checkpoint record " + id +
                             " does not match its content address");
  }
  return Checkpoint::from_record(id, parse_json(bytes, "checkpoint " + id));
}

bool Store::has_checkpoint(const std::string& id) const {
  return is_hex_digest(id) && fs::exists(object_path("cp", id));
}

BranchRef Store::create_branch(const std::string& name, const std::string& from) {
  if (!valid_branch_name(name)) {
    throw ValidationError("invalid branch name '" + name + "'");
  }
  if (!has_checkpoint(from)) {
    throw NotFoundError("unknown checkpoint " + from);
  }
  fs::path path = branch_path(name);
  fs::create_directories(path.parent_path());
  int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw ValidationError("branch '" + name + "' already exists");
    }
    throw Error("cannot create branch '" + name + "': " +
                std::error_code(errno, std::generic_category()).message());
  }
  std::string line = from + "\n";
  ssize_t written = ::write(fd, line.data(), line.size());
  ::close(fd);
  if (written != static_cast<ssize_t>(line.size())) {
    throw Error("short write creating branch '" + name + "'");
  }
  return BranchRef{name, from};
}

std::optional<std::string> Store::branch_head(const std::string& name) const {
  fs::path path = branch_path(name);
  if (!fs::exists(path)) return std::nullopt;
  std::string head = read_file(path);
  while (!head.empty() && (head.back() == '\n' || head.back() == '\r')) head.pop_back();
  return head;
}

std::vector<BranchRef> Store::branches() const {
  std::vector<BranchRef> out;
  fs::path base = root_ / "refs" / "branches";
  if (!fs::exists(base)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(base)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() == ".lock") continue;
    std::string name = fs::relative(entry.path(), base).generic_string();
    std::string head = read_file(entry.path());
    while (!head.empty() && (head.back() == '\n' || head.back() == '\r')) head.pop_back();
    out.push_back({name, head});
  }
  std::sort(out.begin(), out.end(),
            [](const BranchRef& a, const BranchRef& b) { return a.name < b.name; });
  return out;
}

std::string Store::head_branch() const {
  std::string head = read_file(root_ / "HEAD");
  while (!head.empty() && (head.back() == '\n' || head.back() == '\r')) head.pop_back();
  return head;
}

std::vector<std::string> Store::ancestry(const std::string& id) const {
  std::vector<std::string> chain;
  std::string current = id;
  while (!current.empty()) {
    Checkpoint cp = load_checkpoint(current);
    chain.push_back(current);
    current = cp.parent;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::string Store::lowest_common_ancestor(const std::string& a, const std::string& b) const {
  std::vector<std::string> pa = ancestry(a);
  std::vector<std::string> pb = ancestry(b);
  std::size_t n = std::min(pa.size(), pb.size());
  std::string lca;
  for (std::size_t i = 0; i < n && pa[i] == pb[i]; ++i) {
    lca = pa[i];
  }
  if (lca.empty()) {
    throw NotFoundError("no common ancestor of " + a + " and " + b);
  }
  return lca;
}

Diff Store::diff(const std::string& base, const std::string& target) const {
  return diff_docs(checkout(base), checkout(target));
}

MergeOutcome Store::merge(const std::string& ours, const std::string& theirs,
                          MergeStrategy strategy) {
  Checkpoint ours_cp = load_checkpoint(ours);
  (void)load_checkpoint(theirs);
  std::string lca = lowest_common_ancestor(ours, theirs);

  MergeOutcome outcome =
      merge_states(checkout(lca), checkout(ours), checkout(theirs), strategy);
  if (!outcome.ok()) {
    return outcome;
  }
  std::string message =
      "merge of " + theirs + " via " + to_string(strategy);
  outcome.commit_id =
      commit(ours, *outcome.merged, ours_cp.branch, message);
  return outcome;
}

std::vector<Checkpoint> Store::all_checkpoints() const {
  std::vector<Checkpoint> out;
  fs::path base = root_ / "objects" / "cp";
  if (!fs::exists(base)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(base)) {
    if (!entry.is_regular_file()) continue;
    std::string id = entry.path().filename().string();
    if (!is_hex_digest(id)) continue;
    out.push_back(load_checkpoint(id));
  }
  return out;
}

std::size_t Store::checkpoint_count() const {
  std::size_t count = 0;
  fs::path base = root_ / "objects" / "cp";
  if (!fs::exists(base)) return 0;
  for (const auto& entry : fs::recursive_directory_iterator(base)) {
    if (entry.is_regular_file() && is_hex_digest(entry.path().filename().string())) ++count;
  }
  return count;
}

std::size_t Store::state_object_count() const {
  std::size_t count = 0;
  fs::path base = root_ / "objects" / "st";
  if (!fs::exists(base)) return 0;
  for (const auto& entry : fs::recursive_directory_iterator(base)) {
    if (entry.is_regular_file() && is_hex_digest(entry.path().filename().string())) ++count;
  }
  return count;
}

}  // namespace agentgit
