#pragma once

#include <memory>
#include <string>

#include "mfssa/core/error.hpp"
#include "mfssa/core/session.hpp"

namespace mfssa {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds any free port
  std::string static_dir;  // served at / when non-empty
  double tolerance = kDefaultRankTolerance;
};

// HTTP status for an engine error class.
int http_status(ErrorCode code);

// REST server over in-memory analysis sessions:
//   POST /api/session                       dataset (or {"dataset", "lag", "normalize", "tolerance", "variant"}) -> 201 {"id"}
//   POST /api/session/import                session export -> 201 {"id"}
//   GET  /api/session/{id}/decomposition    ?lag=L
//   GET  /api/session/{id}/plotdata
//   PUT  /api/session/{id}/grouping         {"groups": "1;2,3" | [[1],[2,3]], "labels": [...], "residual": bool}
//   GET  /api/session/{id}/reconstruction/{n|label|residual}
//   GET  /api/session/{id}/wcorrelation
//   GET  /api/session/{id}/export
//   DELETE /api/session/{id}
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds the socket and returns the port; throws io_error on failure.
  int bind();
  // Serves until stop(); bind() must have succeeded.
  void listen();
  void stop();

  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mfssa
