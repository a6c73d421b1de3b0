#include "latentcloud/service.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include <httplib.h>
#include <json.hpp>

#include "latentcloud/error.hpp"

namespace latentcloud {

using nlohmann::json;

namespace {

constexpr std::size_t kNpos = std::numeric_limits<std::size_t>::max();

// Rejected request; carries the HTTP status.
struct RequestError {
  int status;
  std::string code;
  std::string message;
};

ApiResponse ok(const json& j) { return {200, j.dump()}; }

ApiResponse error_response(int status, std::string_view code, std::string_view message) {
  json j = {{"error", {{"code", code}, {"message", message}}}};
  return {status, j.dump()};
}

json points_json(const PointCloud& cloud) {
  json pts = json::array();
  for (const Vec3& p : cloud) pts.push_back({p[0], p[1], p[2]});
  return pts;
}

json parse_body(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw RequestError{400, "bad_json", "request body must be a JSON object"};
  }
  return j;
}

std::vector<double> number_array(const json& j, const char* field) {
  if (!j.contains(field)) {
    throw RequestError{400, "missing_field", std::string("missing field '") + field + "'"};
  }
  const json& a = j.at(field);
  if (!a.is_array()) {
    throw RequestError{400, "bad_field", std::string("'") + field + "' must be an array"};
  }
  std::vector<double> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) {
      throw RequestError{400, "non_finite",
                         std::string(field) + "[" + std::to_string(i) + "] is not a finite number"};
    }
    const double v = a[i].get<double>();
    if (!std::isfinite(v)) {
      throw RequestError{400, "non_finite",
                         std::string(field) + "[" + std::to_string(i) + "] is not a finite number"};
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> latent_field(const Catalog& c, const json& j, const char* field) {
  std::vector<double> z = number_array(j, field);
  if (z.size() != c.model.config.latent_size) {
    throw RequestError{400, "bad_length",
                       std::string("'") + field + "' must have length " +
                           std::to_string(c.model.config.latent_size) + ", got " +
                           std::to_string(z.size())};
  }
  return z;
}

std::size_t require_item(const Catalog& c, std::string_view id) {
  const std::size_t idx = c.index_of(id);
  if (idx == kNpos) throw RequestError{404, "unknown_id", "unknown item '" + std::string(id) + "'"};
  return idx;
}

template <typename Fn>
ApiResponse guarded(const std::shared_ptr<const Catalog>& catalog, Fn&& fn) {
  if (!catalog) return error_response(503, "model_not_loaded", "no model is loaded yet");
  try {
    return fn(*catalog);
  } catch (const RequestError& e) {
    return error_response(e.status, e.code, e.message);
  } catch (const DegenerateWeightsError& e) {
    return error_response(400, "degenerate_weights", e.what());
  } catch (const DimensionError& e) {
    return error_response(400, "bad_dimension", e.what());
  } catch (const ConfigError& e) {
    return error_response(400, "bad_value", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

}  // namespace

std::size_t Catalog::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    if (manifest.entries[i].id == id) return i;
  }
  return kNpos;
}

std::shared_ptr<const Catalog> make_catalog(AEModel model, DatasetManifest manifest) {
  if (manifest.point_count != model.config.input_points) {
    throw DimensionError("model expects " + std::to_string(model.config.input_points) +
                         "-point clouds, dataset has " + std::to_string(manifest.point_count));
  }
  auto c = std::make_shared<Catalog>();
  c->model = std::move(model);
  c->manifest = std::move(manifest);
  for (const PointCloud& cloud : load_model_inputs(c->manifest)) {
    c->latents.push_back(encode(c->model, cloud));
  }
  c->stats = latent_stats(c->latents);
  return c;
}

void Api::set_catalog(std::shared_ptr<const Catalog> catalog) {
  std::lock_guard lock(mutex_);
  catalog_ = std::move(catalog);
}

std::shared_ptr<const Catalog> Api::catalog() const {
  std::lock_guard lock(mutex_);
  return catalog_;
}

ApiResponse Api::info() const {
  return guarded(catalog(), [](const Catalog& c) {
    const AEConfig& cfg = c.model.config;
    json families = json::array();
    json family_counts = json::object();
    for (ShapeFamily f : c.manifest.families) families.push_back(std::string(family_name(f)));
    for (const auto& e : c.manifest.entries) {
      auto& slot = family_counts[std::string(family_name(e.family))];
      slot = slot.is_null() ? 1 : slot.get<int>() + 1;
    }
    return ok({
        {"model",
         {{"input_points", cfg.input_points},
          {"latent_size", cfg.latent_size},
          {"output_points", cfg.output_points},
          {"encoder_widths", cfg.encoder_widths},
          {"decoder_widths", cfg.decoder_widths},
          {"epochs_trained", c.model.metadata.epochs_trained}}},
        {"dataset",
         {{"count", c.manifest.entries.size()},
          {"point_count", c.manifest.point_count},
          {"families", families},
          {"family_counts", family_counts}}},
        {"stats", {{"min", c.stats.min}, {"max", c.stats.max}, {"count", c.stats.count}}},
        {"controls",
         {{"count", kControlCount}, {"slider_limit", kSliderLimit}, {"knob_limit", kKnobLimit}}},
    });
  });
}

ApiResponse Api::items() const {
  return guarded(catalog(), [](const Catalog& c) {
    json list = json::array();
    for (const auto& e : c.manifest.entries) {
      list.push_back({{"id", e.id}, {"family", std::string(family_name(e.family))}});
    }
    return ok({{"items", list}});
  });
}

ApiResponse Api::item(std::string_view id) const {
  return guarded(catalog(), [id](const Catalog& c) {
    const std::size_t idx = require_item(c, id);
    const auto& e = c.manifest.entries[idx];
    return ok({{"id", e.id},
               {"family", std::string(family_name(e.family))},
               {"latent", c.latents[idx]},
               {"points", points_json(latentcloud::decode(c.model, c.latents[idx]))}});
  });
}

ApiResponse Api::decode(std::string_view body) const {
  return guarded(catalog(), [body](const Catalog& c) {
    const json req = parse_body(body);
    const auto z = latent_field(c, req, "latent");
    return ok({{"points", points_json(latentcloud::decode(c.model, z))}});
  });
}

ApiResponse Api::edit(std::string_view body) const {
  return guarded(catalog(), [body](const Catalog& c) {
    const json req = parse_body(body);
    std::vector<double> base;
    if (req.contains("base_id")) {
      if (!req["base_id"].is_string()) {
        throw RequestError{400, "bad_field", "'base_id' must be a string"};
      }
      base = c.latents[require_item(c, req["base_id"].get<std::string>())];
    } else if (req.contains("base_latent")) {
      base = latent_field(c, req, "base_latent");
    } else {
      throw RequestError{400, "missing_field", "one of 'base_id' or 'base_latent' is required"};
    }
    const auto sliders = number_array(req, "sliders");
    std::vector<double> knobs(kControlCount, 0.0);
    if (req.contains("knobs")) knobs = number_array(req, "knobs");
    std::size_t offset = 0;
    if (req.contains("offset")) {
      if (!req["offset"].is_number_integer() || req["offset"].get<long long>() < 0) {
        throw RequestError{400, "bad_field", "'offset' must be a non-negative integer"};
      }
      offset = req["offset"].get<std::size_t>();
    }
    const LatentVector t = slider_to_t(c.stats, sliders, knobs, offset);
    const LatentVector x = feature_edit(base, t);
    return ok({{"latent", x}, {"points", points_json(latentcloud::decode(c.model, x))}});
  });
}

ApiResponse Api::interpolate(std::string_view body) const {
  return guarded(catalog(), [body](const Catalog& c) {
    const json req = parse_body(body);
    if (!req.contains("ids") || !req["ids"].is_array()) {
      throw RequestError{400, "missing_field", "'ids' must be an array of item ids"};
    }
    std::vector<LatentVector> rows;
    for (const auto& id : req["ids"]) {
      if (!id.is_string()) throw RequestError{400, "bad_field", "'ids' must hold strings"};
      rows.push_back(c.latents[require_item(c, id.get<std::string>())]);
    }
    const auto weights = number_array(req, "weights");
    const LatentVector h = latentcloud::interpolate(rows, weights);
    return ok({{"latent", h}, {"points", points_json(latentcloud::decode(c.model, h))}});
  });
}

ApiResponse Api::handle(std::string_view method, std::string_view path,
                        std::string_view body) const {
  constexpr std::string_view prefix = "/api/v1/";
  if (path.substr(0, prefix.size()) != prefix) {
    return error_response(404, "not_found", "no such endpoint");
  }
  const std::string_view rest = path.substr(prefix.size());
  if (method == "GET") {
    if (rest == "info") return info();
    if (rest == "items") return items();
    if (rest.substr(0, 6) == "items/" && rest.size() > 6) return item(rest.substr(6));
  } else if (method == "POST") {
    if (rest == "decode") return decode(body);
    if (rest == "edit") return edit(body);
    if (rest == "interpolate") return interpolate(body);
  }
  return error_response(404, "not_found", "no such endpoint");
}

std::pair<std::string, int> parse_bind_address(std::string_view address) {
  const auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw ConfigError("bind address must look like host:port, got '" + std::string(address) + "'");
  }
  const std::string_view port_text = address.substr(colon + 1);
  int port = -1;
  const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    throw ConfigError("invalid port in bind address '" + std::string(address) + "'");
  }
  return {std::string(address.substr(0, colon)), port};
}

Server::Server(Api& api, ServerOptions options)
    : api_(api), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  const std::size_t threads = options_.threads;
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  // no SO_REUSEPORT
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  server_->set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server_->Get("/api/v1/info",
               [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, api_.info()); });
  server_->Get("/api/v1/items",
               [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, api_.items()); });
  server_->Get(R"(/api/v1/items/([^/]+))",
               [this, reply](const httplib::Request& req, httplib::Response& res) {
                 reply(res, api_.item(req.matches[1].str()));
               });
  server_->Post("/api/v1/decode", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api_.decode(req.body));
  });
  server_->Post("/api/v1/edit", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api_.edit(req.body));
  });
  server_->Post("/api/v1/interpolate",
                [this, reply](const httplib::Request& req, httplib::Response& res) {
                  reply(res, api_.interpolate(req.body));
                });
  server_->Options(R"(/api/v1/.*)",
                   [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  if (!options_.static_dir.empty()) server_->set_mount_point("/", options_.static_dir.string());
}

Server::~Server() { stop(); }

int Server::bind() {
  int port = options_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(options_.host);
  } else if (!server_->bind_to_port(options_.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw IoError("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  return port;
}

void Server::listen() { server_->listen_after_bind(); }

void Server::stop() {
  if (server_) server_->stop();
}

bool Server::running() const { return server_ && server_->is_running(); }

}  // namespace latentcloud
