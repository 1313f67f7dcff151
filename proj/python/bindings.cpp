#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ctrkit/audit.hpp"
#include "ctrkit/cooccur.hpp"
#include "ctrkit/engine.hpp"
#include "ctrkit/errors.hpp"
#include "ctrkit/preprocess.hpp"
#include "ctrkit/signatures.hpp"
#include "ctrkit/tracking.hpp"
#include "json_io.hpp"

namespace py = pybind11;
using namespace ctrkit;

namespace {

FrequencyTable table_from(const std::map<std::string, std::int64_t>& counts) {
  FrequencyTable table;
  for (const auto& [term, count] : counts) table.add(term, count);
  return table;
}

TermKindFilter kind_from(const std::string& name) {
  auto kind = parse_term_kind(name);
  if (!kind) throw ValidationError("kind must be noun, entity or any");
  return *kind;
}

Granularity granularity_from(const std::string& name) {
  auto g = parse_granularity(name);
  if (!g) throw ValidationError("granularity must be day, week or month");
  return *g;
}

// Series of consecutive months starting 2000-01, enough to run the detector
// on a plain list of counts.
TermSeries series_from_counts(const std::vector<std::int64_t>& counts) {
  TermSeries series;
  series.term = "series";
  TimeBucket bucket = bucket_of(*parse_rfc3339("2000-01-01T00:00:00Z"), Granularity::kMonth);
  for (auto count : counts) {
    series.points.emplace_back(bucket, count);
    bucket = next_bucket(bucket);
  }
  return series;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ctrkit native core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NotFoundError>(m, "NotFoundError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<Token>(m, "Token")
      .def_readonly("surface", &Token::surface)
      .def_readonly("lemma", &Token::lemma)
      .def_property_readonly("kind", [](const Token& t) { return std::string(to_string(t.kind)); })
      .def_readonly("position", &Token::position)
      .def("__repr__", [](const Token& t) {
        return "Token(" + t.lemma + ", " + std::string(to_string(t.kind)) + ")";
      });

  m.def("extract_hashtags", &extract_hashtags, py::arg("text"));
  m.def(
      "analyze", [](const std::string& text) { return Pipeline().analyze(text); }, py::arg("text"),
      "Tokenize, drop stopwords, lemmatize and tag with the default English pipeline.");
  m.def("pseudonymize", &pseudonymize, py::arg("username"), py::arg("salt"));

  py::class_<KeynessResult>(m, "KeynessResult")
      .def_readonly("term", &KeynessResult::term)
      .def_readonly("log_ratio", &KeynessResult::log_ratio)
      .def_readonly("f_target", &KeynessResult::f_target)
      .def_readonly("f_reference", &KeynessResult::f_reference)
      .def_readonly("smoothed", &KeynessResult::smoothed);
  m.def("log_ratio_value", &log_ratio_value, py::arg("f_target"), py::arg("n_target"),
        py::arg("f_reference"), py::arg("n_reference"));
  m.def(
      "keyness",
      [](const std::map<std::string, std::int64_t>& target,
         const std::map<std::string, std::int64_t>& reference, std::size_t n,
         std::int64_t min_freq) {
        return top_n_keyness(table_from(target), table_from(reference), n, min_freq);
      },
      py::arg("target"), py::arg("reference"), py::arg("n") = 3, py::arg("min_freq") = kDefaultMinFreq);

  py::class_<TfidfResult>(m, "TfidfResult")
      .def_readonly("term", &TfidfResult::term)
      .def_readonly("score", &TfidfResult::score)
      .def_readonly("df", &TfidfResult::df)
      .def_readonly("tf_total", &TfidfResult::tf_total);
  m.def(
      "tfidf",
      [](const std::vector<std::string>& texts, const std::string& kind, std::size_t n) {
        Pipeline pipeline;
        std::vector<std::vector<Token>> docs;
        for (const auto& text : texts) docs.push_back(pipeline.analyze(text));
        return tfidf_rank(docs, kind_from(kind), n);
      },
      py::arg("texts"), py::arg("kind") = "noun", py::arg("n") = 30);

  py::class_<CooccurrenceGraph>(m, "Graph")
      .def_property_readonly("nodes", &CooccurrenceGraph::nodes)
      .def_property_readonly("edges",
                             [](const CooccurrenceGraph& g) {
                               std::vector<std::tuple<std::string, std::string, std::int64_t>> out;
                               for (const auto& [e, w] : g.edges()) out.emplace_back(e.first, e.second, w);
                               return out;
                             })
      .def("weight", &CooccurrenceGraph::weight)
      .def("prevalence", &CooccurrenceGraph::prevalence)
      .def("prune", [](const CooccurrenceGraph& g, std::int64_t w) { return prune(g, w); },
           py::arg("min_weight") = kDefaultMinWeight)
      .def("neighborhood",
           [](const CooccurrenceGraph& g, const std::string& seed, std::size_t depth) {
             return neighborhood(g, seed, depth);
           },
           py::arg("seed"), py::arg("depth") = 1)
      .def("to_json", &graph_to_json)
      .def("to_dot", &graph_to_dot);
  m.def(
      "build_graph",
      [](const std::vector<std::vector<std::string>>& item_sets) {
        return build_graph_from_items(item_sets);
      },
      py::arg("item_sets"));

  m.def(
      "detect_excursions",
      [](const std::vector<std::int64_t>& counts, double multiple, double sigma,
         std::size_t warmup, std::int64_t floor, std::size_t window) {
        ExcursionParams params{multiple, sigma, warmup, floor, window};
        auto series = series_from_counts(counts);
        py::list out;
        for (const auto& e : detect_excursions(series, params)) {
          std::size_t index = 0;
          while (series.points[index].first != e.bucket) ++index;
          py::dict item;
          item["index"] = index;
          item["count"] = e.count;
          item["baseline"] = e.baseline_mean;
          item["ratio"] = e.ratio;
          item["rule"] = std::string(to_string(e.rule_fired));
          out.append(item);
        }
        return out;
      },
      py::arg("counts"), py::arg("multiple") = 3.0, py::arg("sigma") = 3.0, py::arg("warmup") = 3,
      py::arg("floor") = 5, py::arg("window") = 0);

  m.def(
      "classify",
      [](const std::string& response, const std::set<std::string>& topic_terms) {
        std::set<std::string> out;
        for (auto label : heuristic_classify(response, PatternTable::defaults(), topic_terms)) {
          out.emplace(to_string(label));
        }
        return out;
      },
      py::arg("response"), py::arg("topic_terms") = std::set<std::string>{});
  m.def(
      "tally_file",
      [](const std::string& path, const std::string& bot) {
        auto records = load_labeled_pairs(path);
        return jsonio::encode(tally(pairs_from_records(records), bot)).dump();
      },
      py::arg("path"), py::arg("bot"));

  // Engine methods return JSON text; the Python wrapper decodes it.
  py::class_<Engine, std::unique_ptr<Engine>>(m, "_Engine")
      .def(py::init([](const std::string& data_dir, const std::string& salt) {
             Config config;
             config.data_dir = data_dir;
             config.salt = salt;
             return Engine::open(config);
           }),
           py::arg("data_dir"), py::arg("salt") = "ctrkit")
      .def("ingest_file",
           [](Engine& e, const std::string& path) {
             py::gil_scoped_release release;
             return jsonio::encode(e.ingest_file(path)).dump();
           })
      .def("ingest_text",
           [](Engine& e, const std::string& text) {
             std::istringstream in(text);
             py::gil_scoped_release release;
             return jsonio::encode(e.ingest(in)).dump();
           })
      .def("keyness",
           [](Engine& e, const std::string& period, std::size_t n, const std::string& granularity) {
             KeynessQuery query;
             query.period = period;
             query.n = n;
             query.granularity = granularity_from(granularity);
             py::gil_scoped_release release;
             return jsonio::encode_all(e.keyness(query)).dump();
           })
      .def("tfidf",
           [](Engine& e, const std::string& kind, std::size_t n) {
             auto k = kind_from(kind);
             py::gil_scoped_release release;
             return jsonio::encode_all(e.tfidf(k, n)).dump();
           })
      .def("graph",
           [](Engine& e, std::optional<std::string> seed, std::optional<std::int64_t> min_weight,
              std::size_t depth) {
             GraphQuery query{seed, min_weight, depth, std::nullopt};
             py::gil_scoped_release release;
             return jsonio::encode(e.graph(query)).dump();
           })
      .def("series",
           [](Engine& e, const std::string& term, const std::string& granularity) {
             auto g = granularity_from(granularity);
             py::gil_scoped_release release;
             auto view = e.series(term, g);
             return jsonio::json{{"series", jsonio::encode(view.series)},
                                 {"excursions", jsonio::encode_all(view.excursions)}}
                 .dump();
           })
      .def("watch",
           [](Engine& e, const std::string& term, const std::string& actor) {
             return e.update_watchlist(WatchlistAction::kAdd, term, std::nullopt, actor).to_json();
           })
      .def("watchlist", [](const Engine& e) { return e.watchlist().to_json(); })
      .def("audit_classify", &Engine::audit_classify)
      .def("audit_tally",
           [](Engine& e, const std::string& bot) { return jsonio::encode(e.audit_tally(bot)).dump(); })
      .def("post_count", &Engine::post_count);
}
