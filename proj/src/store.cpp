#include "sumrecom/store.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "sumrecom/error.hpp"

namespace sumrecom {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::int64_t wall_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

SessionStore::SessionStore(fs::path data_dir) : dir_(std::move(data_dir)) {
  if (dir_.empty()) return;
  std::error_code ec;
  fs::create_directories(dir_ / "sessions", ec);
  if (ec) fail(ErrorCode::kIo, "cannot create data directory " + dir_.string());
  const auto index = dir_ / "index.json";
  if (!fs::exists(index)) return;
  std::ifstream in(index);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kIo, "corrupt session index: " + std::string(e.what()));
  }
  counter_ = j.value("counter", 0);
  for (const auto& id : j.value("sessions", std::vector<std::string>{})) {
    const auto events = read_log(log_path(id));
    rewrite_log(log_path(id), events);
    auto entry = std::make_unique<Entry>();
    entry->session = std::make_unique<Session>(Session::replay(events));
    entry->session->set_clock(wall_clock_ms);
    attach_sink(*entry->session);
    sessions_.emplace(id, std::move(entry));
  }
}

fs::path SessionStore::log_path(const std::string& id) const {
  return dir_ / "sessions" / (id + ".jsonl");
}

std::vector<Event> SessionStore::read_log(const fs::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::kIo, "cannot open session log " + file.string());
  std::vector<Event> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      events.push_back(event_from_json(json::parse(line)));
    } catch (const json::exception&) {
      // A torn final line from a crash mid-write is dropped.
      break;
    }
  }
  return events;
}

void SessionStore::rewrite_log(const fs::path& file, const std::vector<Event>& events) {
  // Drops any torn tail so later appends start on a fresh line.
  const auto tmp = fs::path(file.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& e : events) out << to_json(e).dump() << '\n';
    if (!out) fail(ErrorCode::kIo, "cannot rewrite " + file.string());
  }
  fs::rename(tmp, file);
}

void SessionStore::attach_sink(Session& session) {
  if (dir_.empty()) return;
  session.set_sink([path = log_path(session.id())](const Event& e) {
    std::ofstream out(path, std::ios::app);
    out << to_json(e).dump() << '\n';
    out.flush();
    if (!out) fail(ErrorCode::kIo, "cannot append to " + path.string());
  });
}

void SessionStore::write_index() const {
  if (dir_.empty()) return;
  json j{{"counter", counter_}, {"sessions", json::array()}};
  for (const auto& [id, entry] : sessions_) j["sessions"].push_back(id);
  const auto tmp = dir_ / "index.json.tmp";
  {
    std::ofstream out(tmp);
    out << j.dump(2) << '\n';
    if (!out) fail(ErrorCode::kIo, "cannot write session index");
  }
  fs::rename(tmp, dir_ / "index.json");
}

std::string SessionStore::create(ClusterInput input, std::optional<EmbeddingTable> embeddings,
                                 RunConfig config) {
  std::lock_guard<std::mutex> lock(mu_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06d", counter_ + 1);
  const std::string id = buf;
  auto session = Session::create(id, std::move(input), std::move(embeddings), std::move(config),
                                 wall_clock_ms);
  ++counter_;
  if (!dir_.empty()) {
    std::ofstream out(log_path(id), std::ios::trunc);
    for (const auto& e : session.events()) out << to_json(e).dump() << '\n';
    if (!out) fail(ErrorCode::kIo, "cannot write session log for " + id);
  }
  auto entry = std::make_unique<Entry>();
  entry->session = std::make_unique<Session>(std::move(session));
  attach_sink(*entry->session);
  sessions_.emplace(id, std::move(entry));
  write_index();
  return id;
}

SessionStore::Entry& SessionStore::find(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::kNotFound, "unknown session '" + id + "'");
  return *it->second;
}

std::vector<std::string> SessionStore::ids() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, entry] : sessions_) out.push_back(id);
  return out;
}

}  // namespace sumrecom
