#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "nd/activation_store.hpp"
#include "nd/distribution.hpp"
#include "nd/error.hpp"

namespace httplib {
class Server;
}

namespace nd::api {

/// Query parameters; the same multimap type cpp-httplib hands out.
using Params = std::multimap<std::string, std::string>;

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// HTTP status for an engine error code.
int http_status(ErrorCode code);

/// `{"code": ..., "message": ..., "status": ...}` with the mapped status.
Response error_response(ErrorCode code, std::string_view message);

struct Dataset {
  ActivationStore store;
  std::filesystem::path root;  // dump directory, for thumbnails
};

/// Stateless query facade over one loaded dataset. Every request works on a
/// snapshot of the dataset pointer, so a reload never mixes two datasets
/// within a response.
class Service {
 public:
  explicit Service(DistributionConfig config = {}) : config_(config) {}

  /// Ingests a dump and swaps it in atomically. Throws on ingest errors,
  /// leaving the current dataset untouched.
  void load(const std::filesystem::path& dump_directory);
  void reset(std::shared_ptr<const Dataset> dataset);

  std::shared_ptr<const Dataset> dataset() const;
  const DistributionConfig& config() const noexcept { return config_; }

  /// Routes a GET request. `path` is already URL-decoded.
  Response handle(std::string_view path, const Params& params) const;

 private:
  Response route(const Dataset& dataset, std::string_view path, const Params& params) const;

  DistributionConfig config_;
  mutable std::mutex mutex_;
  std::shared_ptr<const Dataset> dataset_;
};

/// Binds a Service to cpp-httplib. CORS is open; `ui_directory`, when given,
/// is served at "/".
class HttpServer {
 public:
  HttpServer(const Service& service, std::optional<std::filesystem::path> ui_directory = std::nullopt);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// False when the address cannot be bound (e.g. port in use). Port 0 picks
  /// a free port; see port().
  bool bind(const std::string& host, int port);
  int port() const noexcept { return port_; }

  /// Blocks until stop() is called.
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  std::unique_ptr<httplib::Server> server_;
  int port_ = -1;
};

}  // namespace nd::api
