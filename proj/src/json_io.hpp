#pragma once

// JSON encodings shared by the engine cache, the HTTP API and the CLI.

#include <json.hpp>

#include "ctrkit/audit.hpp"
#include "ctrkit/cooccur.hpp"
#include "ctrkit/signatures.hpp"
#include "ctrkit/store.hpp"
#include "ctrkit/tracking.hpp"

namespace ctrkit::jsonio {

using nlohmann::json;

json encode(const KeynessResult& r);
KeynessResult decode_keyness(const json& j);

json encode(const TfidfResult& r);
TfidfResult decode_tfidf(const json& j);

json encode(const CooccurrenceGraph& graph);
CooccurrenceGraph decode_graph(const json& j);

/// Infinite ratios become null.
json encode(const Excursion& e);
json encode(const TermSeries& series);
json encode(const TallyReport& report);
json encode(const IngestSummary& summary);
json encode(const WatchlistEntry& entry);

template <typename T>
json encode_all(const std::vector<T>& items) {
  json out = json::array();
  for (const auto& item : items) out.push_back(encode(item));
  return out;
}

}  // namespace ctrkit::jsonio
