#include "json_io.hpp"

#include "ctrkit/errors.hpp"

namespace ctrkit::jsonio {

json encode(const KeynessResult& r) {
  return {{"term", r.term},         {"log_ratio", r.log_ratio},     {"f_target", r.f_target},
          {"n_target", r.n_target}, {"f_reference", r.f_reference}, {"n_reference", r.n_reference},
          {"smoothed", r.smoothed}};
}

KeynessResult decode_keyness(const json& j) {
  KeynessResult r;
  r.term = j.at("term").get<std::string>();
  r.log_ratio = j.at("log_ratio").get<double>();
  r.f_target = j.at("f_target").get<std::int64_t>();
  r.n_target = j.at("n_target").get<std::int64_t>();
  r.f_reference = j.at("f_reference").get<std::int64_t>();
  r.n_reference = j.at("n_reference").get<std::int64_t>();
  r.smoothed = j.at("smoothed").get<bool>();
  return r;
}

json encode(const TfidfResult& r) {
  return {{"term", r.term},
          {"score", r.score},
          {"df", r.df},
          {"tf_total", r.tf_total},
          {"kind", to_string(r.term_kind)}};
}

TfidfResult decode_tfidf(const json& j) {
  TfidfResult r;
  r.term = j.at("term").get<std::string>();
  r.score = j.at("score").get<double>();
  r.df = j.at("df").get<std::int64_t>();
  r.tf_total = j.at("tf_total").get<std::int64_t>();
  r.term_kind = parse_term_kind(j.at("kind").get<std::string>()).value_or(TermKindFilter::kAny);
  return r;
}

json encode(const CooccurrenceGraph& graph) { return json::parse(graph_to_json(graph)); }

CooccurrenceGraph decode_graph(const json& j) {
  CooccurrenceGraph graph;
  for (const auto& node : j.at("nodes")) {
    graph.add_node(node.at("id").get<std::string>(), node.at("prevalence").get<std::int64_t>());
  }
  for (const auto& edge : j.at("edges")) {
    graph.add_edge(edge.at("a").get<std::string>(), edge.at("b").get<std::string>(),
                   edge.at("w").get<std::int64_t>());
  }
  if (j.contains("seed") && !j["seed"].is_null()) graph.seed_term = j["seed"].get<std::string>();
  if (j.contains("window") && !j["window"].is_null()) {
    auto start = parse_rfc3339(j["window"].at("start").get<std::string>());
    auto end = parse_rfc3339(j["window"].at("end").get<std::string>());
    if (!start || !end) throw ValidationError("bad graph window");
    graph.window = TimeWindow{*start, *end};
  }
  return graph;
}

json encode(const Excursion& e) { return json::parse(excursion_to_json(e)); }

json encode(const TermSeries& series) {
  json points = json::array();
  for (const auto& [bucket, count] : series.points) {
    points.push_back({{"bucket", bucket_label(bucket)}, {"count", count}});
  }
  return {{"term", series.term},
          {"granularity", to_string(series.granularity)},
          {"points", points}};
}

json encode(const TallyReport& report) {
  json counts = json::object();
  for (auto label : kAllAuditLabels) counts[std::string(to_string(label))] = report.count(label);
  return {{"bot", report.bot_name},
          {"denominator", report.denominator},
          {"counts", counts},
          {"sample", report.sample_description}};
}

json encode(const IngestSummary& summary) {
  return {{"accepted", summary.accepted},
          {"duplicates", summary.duplicates},
          {"rejected", summary.rejected},
          {"errors", summary.errors}};
}

json encode(const WatchlistEntry& entry) {
  return {{"term", entry.term},
          {"granularity", to_string(entry.granularity)},
          {"added_by", entry.added_by},
          {"added_at", format_rfc3339(entry.added_at)},
          {"active", entry.active}};
}

}  // namespace ctrkit::jsonio
