#include "nd/api.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <vector>

#include <httplib.h>

#include "nd/divergence.hpp"
#include "nd/json_io.hpp"
#include "nd/query.hpp"
#include "nd/selectors.hpp"

namespace nd::api {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    const auto slash = path.find('/');
    const auto part = path.substr(0, slash);
    if (!part.empty()) parts.push_back(part);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return parts;
}

std::optional<std::string> single_param(const Params& params, const std::string& name) {
  const auto [first, last] = params.equal_range(name);
  if (first == last) return std::nullopt;
  if (std::next(first) != last) {
    throw Error(ErrorCode::MalformedSpec, "query parameter '" + name + "' given more than once");
  }
  return first->second;
}

std::string required_param(const Params& params, const std::string& name) {
  auto value = single_param(params, name);
  if (!value) throw Error(ErrorCode::MalformedSpec, "missing query parameter '" + name + "'");
  return *value;
}

Response ok(const json& value) { return {200, "application/json", json_io::body(value)}; }

std::string content_type_for(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".bmp") return "image/bmp";
  if (ext == ".webp") return "image/webp";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

Response manifest_endpoint(const Dataset& dataset) { return ok(json_io::manifest(dataset.store)); }

Response distribution_endpoint(const Dataset& dataset, LayerId layer, const Params& params,
                               const DistributionConfig& config) {
  const auto& store = dataset.store;
  const auto [first, last] = params.equal_range("subset");
  if (first == last) throw Error(ErrorCode::MalformedSpec, "missing query parameter 'subset'");

  const auto grids = compute_grids(store, layer, config);
  std::vector<std::pair<std::string, LayerDistribution>> subsets;
  for (auto it = first; it != last; ++it) {
    const auto subset = selectors::parse_subset(store, it->second);
    subsets.emplace_back(it->second, distribution(store, layer, subset, grids));
  }
  return ok(json_io::layer_distributions(store, layer, subsets));
}

Response order_endpoint(const Dataset& dataset, LayerId layer, const Params& params) {
  const auto& store = dataset.store;
  const std::string key_text = required_param(params, "key");
  const auto direction = selectors::parse_direction(single_param(params, "dir").value_or("desc"));
  const SortSpec spec{selectors::parse_sort_key(store, key_text), direction};
  return ok(json_io::neuron_order(store, layer, key_text, direction, sort_neurons(store, layer, spec)));
}

Response divergence_endpoint(const Dataset& dataset, const Params& params, const DistributionConfig& config) {
  const auto& store = dataset.store;
  const auto instance = selectors::parse_instance(store, required_param(params, "instance"));
  const auto cls = store.class_id(required_param(params, "class"));
  DivergenceParams divergence = default_divergence_params(store);
  if (auto layers = single_param(params, "layers")) divergence.layers = selectors::parse_layers(store, *layers);
  divergence.distribution = config;
  return ok(json_io::divergence_report(store, score_instance(store, instance, cls, divergence)));
}

Response thumbnail_endpoint(const Dataset& dataset, std::string_view id_text) {
  const auto& meta = dataset.store.instance(selectors::parse_instance(dataset.store, id_text));
  if (!meta.thumbnail) {
    throw Error(ErrorCode::NotFound, "instance " + std::to_string(meta.id.value) + " has no thumbnail");
  }
  const fs::path path = dataset.root / *meta.thumbnail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "thumbnail file missing for instance " + std::to_string(meta.id.value));
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return {200, content_type_for(path), std::move(bytes)};
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownLayer:
    case ErrorCode::UnknownClass:
    case ErrorCode::UnknownInstance:
    case ErrorCode::EmptyClass:
    case ErrorCode::NotFound:
    case ErrorCode::MissingFile:
      return 404;
    case ErrorCode::MalformedSpec:
    case ErrorCode::EmptySubset:
    case ErrorCode::EmptySet:
    case ErrorCode::EmptyLayerList:
    case ErrorCode::DuplicateLayer:
    case ErrorCode::DuplicateId:
    case ErrorCode::LayerWidthMismatch:
    case ErrorCode::BadProbability:
    case ErrorCode::BadThreshold:
    case ErrorCode::BadBinCount:
      return 400;
    case ErrorCode::NoDataset:
      return 503;
    case ErrorCode::HeaderMismatch:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::MalformedManifest:
    case ErrorCode::IoError:
      return 500;
  }
  return 500;
}

Response error_response(ErrorCode code, std::string_view message) {
  const int status = http_status(code);
  const json body = {{"code", std::string(to_string(code))}, {"message", std::string(message)}, {"status", status}};
  return {status, "application/json", json_io::body(body)};
}

void Service::load(const fs::path& dump_directory) {
  auto dataset = std::make_shared<const Dataset>(Dataset{ActivationStore::ingest(dump_directory), dump_directory});
  reset(std::move(dataset));
}

void Service::reset(std::shared_ptr<const Dataset> dataset) {
  std::lock_guard lock(mutex_);
  dataset_ = std::move(dataset);
}

std::shared_ptr<const Dataset> Service::dataset() const {
  std::lock_guard lock(mutex_);
  return dataset_;
}

Response Service::handle(std::string_view path, const Params& params) const {
  const auto snapshot = dataset();
  try {
    if (!snapshot) throw Error(ErrorCode::NoDataset, "no dataset loaded");
    return route(*snapshot, path, params);
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const std::exception& e) {
    const json body = {{"code", "Internal"}, {"message", e.what()}, {"status", 500}};
    return {500, "application/json", json_io::body(body)};
  }
}

Response Service::route(const Dataset& dataset, std::string_view path, const Params& params) const {
  const auto parts = split_path(path);
  if (parts.size() >= 2 && parts[0] == "api") {
    if (parts.size() == 2 && parts[1] == "manifest") return manifest_endpoint(dataset);
    if (parts.size() == 2 && parts[1] == "divergence") return divergence_endpoint(dataset, params, config_);
    if (parts.size() == 3 && parts[1] == "thumbnails") return thumbnail_endpoint(dataset, parts[2]);
    if (parts.size() == 4 && parts[1] == "layers") {
      const LayerId layer = dataset.store.layer_id(parts[2]);
      if (parts[3] == "distribution") return distribution_endpoint(dataset, layer, params, config_);
      if (parts[3] == "order") return order_endpoint(dataset, layer, params);
    }
  }
  throw Error(ErrorCode::NotFound, "no endpoint at " + std::string(path));
}

HttpServer::HttpServer(const Service& service, std::optional<fs::path> ui_directory)
    : server_(std::make_unique<httplib::Server>()) {
  // httplib defaults to SO_REUSEPORT, which would let a second server share
  // the port instead of failing to bind.
  server_->set_socket_options([](int sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
  server_->Get("/api/.*", [&service](const httplib::Request& req, httplib::Response& res) {
    const Response response = service.handle(req.path, req.params);
    res.status = response.status;
    res.set_content(response.body, response.content_type);
  });
  server_->Options("/api/.*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  if (ui_directory && fs::is_directory(*ui_directory)) server_->set_mount_point("/", ui_directory->string());
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    return port_ > 0;
  }
  if (!server_->bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

bool HttpServer::listen() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace nd::api
