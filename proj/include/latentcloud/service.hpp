#pragma once

// JSON-over-HTTP exploration API under /api/v1.
//
//   GET  /api/v1/info
//   GET  /api/v1/items
//   GET  /api/v1/items/{id}
//   POST /api/v1/decode       {"latent": [k numbers]}
//   POST /api/v1/edit         {"base_id" | "base_latent", "sliders": [8],
//                              "knobs": [8], "offset": int}
//   POST /api/v1/interpolate  {"ids": [n], "weights": [n]}
//
// Errors are {"error": {"code": ..., "message": ...}} with a 4xx/5xx status.

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "latentcloud/autoencoder.hpp"
#include "latentcloud/data.hpp"
#include "latentcloud/latent.hpp"

namespace httplib {
class Server;
}

namespace latentcloud {

// Everything a request can read. Immutable once built.
struct Catalog {
  AEModel model;
  DatasetManifest manifest;
  std::vector<LatentVector> latents;  // one per manifest entry
  LatentStats stats;

  std::size_t index_of(std::string_view id) const;  // npos if unknown
};

std::shared_ptr<const Catalog> make_catalog(AEModel model, DatasetManifest manifest);

struct ApiResponse {
  int status = 200;
  std::string body;
};

class Api {
 public:
  Api() = default;
  explicit Api(std::shared_ptr<const Catalog> catalog) : catalog_(std::move(catalog)) {}

  // Replaces the whole catalog; in-flight requests keep the one they started with.
  void set_catalog(std::shared_ptr<const Catalog> catalog);
  std::shared_ptr<const Catalog> catalog() const;

  ApiResponse info() const;
  ApiResponse items() const;
  ApiResponse item(std::string_view id) const;
  ApiResponse decode(std::string_view body) const;
  ApiResponse edit(std::string_view body) const;
  ApiResponse interpolate(std::string_view body) const;

  // Routes by method and path; used by the HTTP server and in-process tests.
  ApiResponse handle(std::string_view method, std::string_view path, std::string_view body) const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const Catalog> catalog_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin = "*";
  std::filesystem::path static_dir;  // served at / when set
  std::size_t threads = 16;
};

class Server {
 public:
  Server(Api& api, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds the socket; returns the bound port. Throws IoError on failure.
  int bind();
  // Serves until stop() is called. Requires a successful bind().
  void listen();
  void stop();
  bool running() const;

 private:
  Api& api_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

// Parses "host:port" (port may be 0).
std::pair<std::string, int> parse_bind_address(std::string_view address);

}  // namespace latentcloud
