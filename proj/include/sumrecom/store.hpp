#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sumrecom/session.hpp"

namespace sumrecom {

/// Owns live sessions and their append-only logs. With an empty data
/// directory, sessions live in memory only.
///
/// Mutations of one session are serialized by a per-session mutex; distinct
/// sessions proceed independently.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path data_dir = {});

  std::string create(ClusterInput input, std::optional<EmbeddingTable> embeddings,
                     RunConfig config);

  /// Runs `fn` with exclusive access to the session; not-found error when the
  /// id is unknown.
  template <typename Fn>
  auto with(const std::string& id, Fn&& fn) {
    Entry& entry = find(id);
    std::lock_guard<std::mutex> lock(entry.mu);
    return fn(*entry.session);
  }

  std::vector<std::string> ids() const;
  const std::filesystem::path& data_dir() const { return dir_; }

  static std::vector<Event> read_log(const std::filesystem::path& file);
  std::filesystem::path log_path(const std::string& id) const;

 private:
  struct Entry {
    std::mutex mu;
    std::unique_ptr<Session> session;
  };

  Entry& find(const std::string& id);
  void attach_sink(Session& session);
  static void rewrite_log(const std::filesystem::path& file, const std::vector<Event>& events);
  void write_index() const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
  int counter_ = 0;
};

}  // namespace sumrecom
