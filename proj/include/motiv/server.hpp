#pragma once

#include <memory>
#include <string>

#include "motiv/api.hpp"

namespace motiv::server {

struct Options {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin = "*";
};

/// HTTP front end of an api::Service. The service must outlive the server.
class Server {
 public:
  Server(const api::Service& service, Options options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the socket; returns the bound port. Throws std::runtime_error.
  int bind();
  /// Serves until stop(); call bind() first.
  void listen();
  /// Blocks until listen() accepts connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace motiv::server
