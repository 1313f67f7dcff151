#pragma once

#include <memory>
#include <string>

#include "ctrkit/config.hpp"
#include "ctrkit/engine.hpp"

namespace ctrkit {

/// HTTP front end over an Engine. All routes live under /v1/ and speak JSON.
///
///   GET  /v1/keyness?period=2022-03&n=3[&min_freq=5][&granularity=month]
///   GET  /v1/tfidf?kind=noun|entity|any&n=30[&docs=user|prompts|all]
///   GET  /v1/graph[?seed=T][&min_weight=50][&depth=1][&from=..&to=..]
///   GET  /v1/series/{term}[?granularity=month]
///   GET  /v1/excursions[?term=T][&granularity=month]
///   GET  /v1/watchlist
///   GET  /v1/audit/tally?bot=NAME
///   GET  /v1/audit/pairs       stored pairs with recorded and effective labels
///   POST /v1/ingest          body: JSONL records
///   POST /v1/watchlist       {term, granularity?, action?: add|deactivate, actor?}
///   POST /v1/audit/labels    {prompt_id, response_id, labels:[...]}
///
/// Malformed requests get 400, unknown items 404, domain errors 422; every
/// error body is {"error": kind, "reason": text}.
class ApiServer {
 public:
  explicit ApiServer(Engine& engine);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the bound
  /// port. Throws IoError on bind failure.
  int bind(const BindAddress& address);
  /// Serves until stop() is called. Requires a prior bind().
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ctrkit
