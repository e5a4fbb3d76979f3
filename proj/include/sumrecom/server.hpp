#pragma once

#include <memory>
#include <string>

#include "sumrecom/error.hpp"
#include "sumrecom/store.hpp"

namespace httplib {
class Server;
}

namespace sumrecom {

/// HTTP+JSON front end over a SessionStore. Errors are returned as
/// {"code": ..., "message": ...} with a matching HTTP status.
class ApiServer {
 public:
  explicit ApiServer(SessionStore& store);
  ~ApiServer();

  /// Blocks until stop() is called.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  void routes();

  SessionStore& store_;
  std::unique_ptr<httplib::Server> http_;
};

int http_status(ErrorCode code);

}  // namespace sumrecom
