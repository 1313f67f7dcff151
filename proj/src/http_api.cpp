#include "ctrkit/http_api.hpp"

#include <charconv>
#include <sstream>

#include <httplib.h>

#include "ctrkit/errors.hpp"
#include "json_io.hpp"

namespace ctrkit {

using jsonio::json;

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view kind, std::string_view reason) {
  reply(res, status, json{{"error", kind}, {"reason", reason}});
}

// Maps library errors onto HTTP statuses.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const NotFoundError& e) {
      reply_error(res, 404, "not_found", e.what());
    } catch (const DomainError& e) {
      reply_error(res, 422, "domain_error", e.what());
    } catch (const ParseError& e) {
      reply_error(res, 400, "parse_error", e.what());
    } catch (const ValidationError& e) {
      reply_error(res, 400, "validation_error", e.what());
    } catch (const json::exception& e) {
      reply_error(res, 400, "bad_request", e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, "internal", e.what());
    }
  };
}

std::optional<std::string> param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

std::string required(const httplib::Request& req, const char* name) {
  auto value = param(req, name);
  if (!value || value->empty()) throw ValidationError(std::string("missing parameter '") + name + "'");
  return *value;
}

std::optional<std::int64_t> int_param(const httplib::Request& req, const char* name) {
  auto text = param(req, name);
  if (!text) return std::nullopt;
  std::int64_t value = 0;
  auto [end, ec] = std::from_chars(text->data(), text->data() + text->size(), value);
  if (text->empty() || ec != std::errc() || end != text->data() + text->size()) {
    throw ValidationError(std::string("parameter '") + name + "' must be an integer");
  }
  return value;
}

std::size_t count_param(const httplib::Request& req, const char* name, std::size_t fallback) {
  auto value = int_param(req, name);
  if (!value) return fallback;
  if (*value < 0) throw ValidationError(std::string("parameter '") + name + "' must be >= 0");
  return static_cast<std::size_t>(*value);
}

std::optional<Granularity> granularity_param(const httplib::Request& req) {
  auto text = param(req, "granularity");
  if (!text) return std::nullopt;
  auto g = parse_granularity(*text);
  if (!g) throw ValidationError("granularity must be day, week or month");
  return g;
}

Timestamp time_param(const std::string& text, const char* name) {
  auto ts = parse_rfc3339(text);
  if (!ts) throw ValidationError(std::string("parameter '") + name + "' is not an RFC-3339 time");
  return *ts;
}

json body_object(const httplib::Request& req) {
  json body = json::parse(req.body);
  if (!body.is_object()) throw ValidationError("request body must be a JSON object");
  return body;
}

}  // namespace

struct ApiServer::Impl {
  explicit Impl(Engine& e) : engine(e) { routes(); }

  void routes();

  Engine& engine;
  httplib::Server server;
  bool bound = false;
};

void ApiServer::Impl::routes() {
  server.Get("/v1/keyness", guarded([this](const httplib::Request& req, httplib::Response& res) {
    KeynessQuery query;
    query.period = required(req, "period");
    query.granularity = granularity_param(req).value_or(Granularity::kMonth);
    query.n = count_param(req, "n", query.n);
    query.min_freq = int_param(req, "min_freq");
    auto results = engine.keyness(query);
    reply(res, 200, json{{"period", query.period}, {"results", jsonio::encode_all(results)}});
  }));

  server.Get("/v1/tfidf", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto kind = parse_term_kind(param(req, "kind").value_or("noun"));
    if (!kind) throw ValidationError("kind must be noun, entity or any");
    auto scope = parse_document_scope(param(req, "docs").value_or("user"));
    if (!scope) throw ValidationError("docs must be user, prompts or all");
    auto results = engine.tfidf(*kind, count_param(req, "n", 30), *scope);
    reply(res, 200, json{{"kind", to_string(*kind)}, {"results", jsonio::encode_all(results)}});
  }));

  server.Get("/v1/graph", guarded([this](const httplib::Request& req, httplib::Response& res) {
    GraphQuery query;
    query.seed = param(req, "seed");
    query.min_weight = int_param(req, "min_weight");
    query.depth = count_param(req, "depth", query.depth);
    auto from = param(req, "from");
    auto to = param(req, "to");
    if (from.has_value() != to.has_value()) throw ValidationError("give both 'from' and 'to'");
    if (from) query.window = TimeWindow{time_param(*from, "from"), time_param(*to, "to")};
    reply(res, 200, jsonio::encode(engine.graph(query)));
  }));

  server.Get(R"(/v1/series/([^/]+))", guarded([this](const httplib::Request& req,
                                                      httplib::Response& res) {
    auto view = engine.series(req.matches[1].str(), granularity_param(req));
    reply(res, 200, json{{"series", jsonio::encode(view.series)},
                         {"excursions", jsonio::encode_all(view.excursions)}});
  }));

  server.Get("/v1/excursions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto found = engine.excursions(param(req, "term"), granularity_param(req));
    reply(res, 200, json{{"excursions", jsonio::encode_all(found)}});
  }));

  server.Get("/v1/watchlist", guarded([this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, json::parse(engine.watchlist().to_json()));
  }));

  server.Post("/v1/watchlist", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json body = body_object(req);
    std::string term = body.at("term").get<std::string>();
    std::optional<Granularity> granularity;
    if (body.contains("granularity")) {
      granularity = parse_granularity(body["granularity"].get<std::string>());
      if (!granularity) throw ValidationError("granularity must be day, week or month");
    }
    std::string action = body.value("action", "add");
    if (action != "add" && action != "deactivate") {
      throw ValidationError("action must be add or deactivate");
    }
    auto list = engine.update_watchlist(
        action == "add" ? WatchlistAction::kAdd : WatchlistAction::kDeactivate, term, granularity,
        body.value("actor", ""));
    reply(res, 200, json::parse(list.to_json()));
  }));

  server.Post("/v1/ingest", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::istringstream in(req.body);
    reply(res, 200, jsonio::encode(engine.ingest(in)));
  }));

  server.Get("/v1/audit/tally", guarded([this](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, jsonio::encode(engine.audit_tally(required(req, "bot"))));
  }));

  server.Get("/v1/audit/pairs", guarded([this](const httplib::Request&, httplib::Response& res) {
    json pairs = json::array();
    for (const auto& pair : engine.audit_pairs()) {
      json labels = json::array();
      for (const auto& label : pair.labels) {
        labels.push_back({{"label", to_string(label.value)}, {"origin", to_string(label.origin)}});
      }
      json effective = json::array();
      for (auto value : effective_labels(pair.labels)) effective.push_back(to_string(value));
      pairs.push_back({{"prompt_id", pair.prompt.id},
                       {"response_id", pair.response.id},
                       {"bot", pair.bot_name},
                       {"prompt", pair.prompt.text},
                       {"response", pair.response.text},
                       {"labels", labels},
                       {"effective", effective}});
    }
    reply(res, 200, json{{"pairs", pairs}});
  }));

  server.Post("/v1/audit/labels", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json body = body_object(req);
    std::vector<AuditLabelValue> labels;
    for (const auto& entry : body.at("labels")) {
      auto value = parse_audit_label(entry.get<std::string>());
      if (!value) throw ValidationError("unknown audit label " + entry.dump());
      labels.push_back(*value);
    }
    auto revision = engine.set_manual_labels(body.at("prompt_id").get<std::string>(),
                                             body.at("response_id").get<std::string>(), labels);
    reply(res, 200, json{{"revision", revision}});
  }));
}

ApiServer::ApiServer(Engine& engine) : impl_(std::make_unique<Impl>(engine)) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const BindAddress& address) {
  int port = address.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(address.host);
    if (port < 0) throw IoError("cannot bind " + address.host);
  } else if (!impl_->server.bind_to_port(address.host, port)) {
    throw IoError("cannot bind " + address.host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return port;
}

void ApiServer::listen() {
  if (!impl_->bound) throw Error("listen() before bind()");
  impl_->server.listen_after_bind();
}

void ApiServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool ApiServer::running() const { return impl_->server.is_running(); }

}  // namespace ctrkit
