#ifndef DOUBLETHINK_SERVICE_HPP
#define DOUBLETHINK_SERVICE_HPP

#include <map>
#include <memory>
#include <string>

#include "doublethink/errors.hpp"
#include "doublethink/json_io.hpp"
#include "doublethink/session.hpp"

namespace doublethink {

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Routes requests against a session store. Independent of the HTTP layer so
/// it can be exercised directly.
///
///   POST /sessions                      {"csv": "...", "config": {...}}
///   POST /sessions/import               archive bytes
///   GET  /sessions
///   GET  /sessions/{id}
///   POST /sessions/{id}/test            {"tested": [...], "rho", "tau", "alpha"}
///   GET  /sessions/{id}/groups?rho=
///   GET  /sessions/{id}/minimal-groups?rho=&tau=&max_size=
///   GET  /sessions/{id}/estimates
///   GET  /sessions/{id}/export
///
/// Errors are {"error": code, "detail": message}.
class Service {
 public:
  Response handle(const Request& request);
  SessionStore& store() { return store_; }

 private:
  SessionStore store_;
};

/// Reads the "config" object of a session creation request: mu, h, tau,
/// outcome, intercept, variance ("profile" or "known:<sigma2>"), nuisance,
/// sub_analysis_nu, excluded, max_variables. Missing keys keep defaults.
SessionConfig session_config_from_json(const Json& config);

/// HTTP status for a library error code.
int http_status(ErrorCode code);

/// HTTP front end for a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to `port`, or to a free port when port is 0; returns the port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace doublethink

#endif  // DOUBLETHINK_SERVICE_HPP
