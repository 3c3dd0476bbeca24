#include "motiv/server.hpp"

#include <stdexcept>

#include "httplib.h"

namespace motiv::server {

struct Server::Impl {
  const api::Service& service;
  Options options;
  httplib::Server http;
  int port = 0;

  Impl(const api::Service& s, Options o) : service(s), options(std::move(o)) {}

  void add_cors(httplib::Response& res) const {
    if (options.cors_origin.empty()) return;
    res.set_header("Access-Control-Allow-Origin", options.cors_origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  }

  void dispatch(const httplib::Request& req, httplib::Response& res) const {
    api::Query query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const api::Response r = service.handle(req.method, req.path, query, req.body);
    res.status = r.status;
    add_cors(res);
    res.set_content(r.body, "application/json; charset=utf-8");
  }
};

Server::Server(const api::Service& service, Options options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) { impl_->dispatch(req, res); };
  impl_->http.Get(".*", handler);
  impl_->http.Post(".*", handler);
  impl_->http.Options(".*", [this](const httplib::Request&, httplib::Response& res) {
    impl_->add_cors(res);
    res.status = 204;
  });
}

Server::~Server() { stop(); }

int Server::bind() {
  if (impl_->options.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(impl_->options.host);
  } else if (impl_->http.bind_to_port(impl_->options.host, impl_->options.port)) {
    impl_->port = impl_->options.port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port <= 0) {
    throw std::runtime_error("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
  return impl_->port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

void Server::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

}  // namespace motiv::server
