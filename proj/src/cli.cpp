#include "ctrkit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ctrkit/engine.hpp"
#include "ctrkit/errors.hpp"
#include "ctrkit/http_api.hpp"
#include "json_io.hpp"

namespace ctrkit {

namespace {

struct GlobalOptions {
  std::string data_dir;
  std::string config_path;
  std::string salt;
};

Config resolve_config(const GlobalOptions& global) {
  Config config = global.config_path.empty() ? Config{} : Config::load(global.config_path);
  config.apply_environment();
  if (!global.data_dir.empty()) config.data_dir = global.data_dir;
  if (!global.salt.empty()) config.salt = global.salt;
  config.validate();
  return config;
}

// "term<TAB>count" per line; '#' starts a comment.
FrequencyTable load_reference_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read reference table " + path);
  FrequencyTable table("reference:" + path);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    std::int64_t count = -1;
    if (tab != std::string::npos) {
      auto [end, ec] = std::from_chars(line.data() + tab + 1, line.data() + line.size(), count);
      if (ec != std::errc() || end != line.data() + line.size()) count = -1;
    }
    if (tab == 0 || tab == std::string::npos || count < 0) {
      throw ValidationError(line_number, "expected term<TAB>count");
    }
    table.add(line.substr(0, tab), count);
  }
  return table;
}

std::string format_number(double value) {
  if (!std::isfinite(value)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  return buf;
}

void print_excursion_table(std::ostream& out, const std::vector<Excursion>& found) {
  out << std::left << std::setw(24) << "TERM" << std::setw(12) << "BUCKET" << std::right
      << std::setw(8) << "COUNT" << std::setw(12) << "BASELINE" << std::setw(10) << "RATIO"
      << "  RULE\n";
  for (const auto& e : found) {
    out << std::left << std::setw(24) << e.term << std::setw(12) << bucket_label(e.bucket)
        << std::right << std::setw(8) << e.count << std::setw(12) << format_number(e.baseline_mean)
        << std::setw(10) << format_number(e.ratio) << "  " << to_string(e.rule_fired) << '\n';
  }
}

std::vector<AuditLabelValue> parse_label_list(const std::string& text) {
  std::vector<AuditLabelValue> labels;
  std::stringstream in(text);
  std::string name;
  while (std::getline(in, name, ',')) {
    auto value = parse_audit_label(name);
    if (!value) throw CLI::ValidationError("--labels", "unknown audit label '" + name + "'");
    labels.push_back(*value);
  }
  return labels;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Corpus monitoring toolkit: ingest, signatures, graphs, tracking, audits", "ctrkit"};
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_option("--data-dir", global.data_dir, "Store directory (overrides config and env)");
  app.add_option("--config", global.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--salt", global.salt, "Salt for author pseudonyms");

  const std::vector<std::string> granularities = {"day", "week", "month"};
  std::function<void(Engine&)> action;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Append JSONL posts to the store");
  std::string ingest_path;
  ingest->add_option("path", ingest_path, "JSONL file")->required();
  ingest->callback([&] {
    action = [&](Engine& engine) {
      auto summary = engine.ingest_file(ingest_path);
      out << "accepted " << summary.accepted << "\nduplicates " << summary.duplicates
          << "\nrejected " << summary.rejected << '\n';
      for (const auto& e : summary.errors) err << "rejected: " << e << '\n';
    };
  });

  // keyness
  auto* keyness = app.add_subcommand("keyness", "Top Log Ratio terms of one period");
  KeynessQuery kquery;
  std::string granularity_name = "month";
  std::string reference = "rest";
  std::int64_t min_freq = -1;
  keyness->add_option("--period", kquery.period, "Bucket label, e.g. 2022-03")->required();
  keyness->add_option("--n", kquery.n, "Number of terms")->capture_default_str();
  keyness->add_option("--granularity", granularity_name)
      ->check(CLI::IsMember(granularities))
      ->capture_default_str();
  keyness->add_option("--min-freq", min_freq, "Minimum target frequency (config default)");
  keyness->add_option("--reference", reference, "'rest' or a term<TAB>count file")
      ->capture_default_str();
  keyness->callback([&] {
    kquery.granularity = *parse_granularity(granularity_name);
    if (!parse_bucket_label(kquery.period, kquery.granularity)) {
      throw CLI::ValidationError("--period", "not a " + granularity_name + " label");
    }
    if (min_freq >= 0) kquery.min_freq = min_freq;
    action = [&](Engine& engine) {
      if (reference != "rest") kquery.reference = load_reference_table(reference);
      out << keyness_to_csv(engine.keyness(kquery));
    };
  });

  // tfidf
  auto* tfidf = app.add_subcommand("tfidf", "Top TF-IDF nouns or entities");
  std::string kind_name = "noun";
  std::string docs_name = "user";
  std::size_t tfidf_n = 30;
  tfidf->add_option("--kind", kind_name)
      ->check(CLI::IsMember({"noun", "entity", "any"}))
      ->capture_default_str();
  tfidf->add_option("--n", tfidf_n)->capture_default_str();
  tfidf->add_option("--docs", docs_name, "Documents: user, prompts or all")
      ->check(CLI::IsMember({"user", "prompts", "all"}))
      ->capture_default_str();
  tfidf->callback([&] {
    action = [&](Engine& engine) {
      out << tfidf_to_csv(
          engine.tfidf(*parse_term_kind(kind_name), tfidf_n, *parse_document_scope(docs_name)));
    };
  });

  // graph
  auto* graph = app.add_subcommand("graph", "Hashtag co-occurrence graph");
  std::string seed;
  std::int64_t min_weight = -1;
  std::size_t depth = 1;
  std::string graph_format = "json";
  std::string from, to;
  graph->add_option("--seed", seed, "Seed hashtag");
  graph->add_option("--min-weight", min_weight, "Keep edges with weight above this (config default)");
  graph->add_option("--depth", depth)->capture_default_str();
  graph->add_option("--from", from, "Window start (RFC-3339)");
  graph->add_option("--to", to, "Window end (RFC-3339)");
  graph->add_option("--format", graph_format)
      ->check(CLI::IsMember({"json", "dot"}))
      ->capture_default_str();
  graph->callback([&] {
    GraphQuery query;
    if (!seed.empty()) query.seed = seed;
    if (min_weight >= 0) query.min_weight = min_weight;
    query.depth = depth;
    if (from.empty() != to.empty()) throw CLI::ValidationError("--from/--to", "give both or neither");
    if (!from.empty()) {
      auto start = parse_rfc3339(from);
      auto end = parse_rfc3339(to);
      if (!start || !end) throw CLI::ValidationError("--from/--to", "not RFC-3339");
      query.window = TimeWindow{*start, *end};
    }
    action = [&, query](Engine& engine) {
      auto result = engine.graph(query);
      out << (graph_format == "dot" ? graph_to_dot(result) : graph_to_json(result) + "\n");
    };
  });

  // track
  auto* track = app.add_subcommand("track", "Watchlist tracking");
  track->require_subcommand(1);
  std::string track_term;
  std::string track_granularity;
  std::string actor = "cli";
  auto add_granularity = [&](CLI::App* cmd) {
    cmd->add_option("--granularity", track_granularity)->check(CLI::IsMember(granularities));
  };
  auto granularity_choice = [&]() -> std::optional<Granularity> {
    if (track_granularity.empty()) return std::nullopt;
    return parse_granularity(track_granularity);
  };
  auto* scan = track->add_subcommand("scan", "Flag excursions for the watchlist or one term");
  scan->add_option("--term", track_term);
  add_granularity(scan);
  scan->callback([&] {
    action = [&](Engine& engine) {
      std::optional<std::string> term;
      if (!track_term.empty()) term = track_term;
      print_excursion_table(out, engine.excursions(term, granularity_choice()));
    };
  });
  auto* add = track->add_subcommand("add", "Add a term to the watchlist");
  add->add_option("term", track_term)->required();
  add->add_option("--actor", actor)->capture_default_str();
  add_granularity(add);
  auto* drop = track->add_subcommand("deactivate", "Deactivate a watchlist term");
  drop->add_option("term", track_term)->required();
  drop->add_option("--actor", actor)->capture_default_str();
  add_granularity(drop);
  for (auto* cmd : {add, drop}) {
    const bool adding = cmd == add;
    cmd->callback([&, adding] {
      action = [&, adding](Engine& engine) {
        engine.update_watchlist(adding ? WatchlistAction::kAdd : WatchlistAction::kDeactivate,
                                track_term, granularity_choice(), actor);
        out << (adding ? "added " : "deactivated ") << track_term << '\n';
      };
    });
  }
  auto* list = track->add_subcommand("list", "Show the watchlist");
  list->callback([&] {
    action = [&](Engine& engine) {
      for (const auto& e : engine.watchlist().entries()) {
        out << std::left << std::setw(24) << e.term << std::setw(8) << to_string(e.granularity)
            << (e.active ? "active" : "inactive") << '\n';
      }
    };
  });

  // audit
  auto* audit = app.add_subcommand("audit", "Guardrail audit of bot responses");
  audit->require_subcommand(1);
  auto* classify = audit->add_subcommand("classify", "Label every stored pair heuristically");
  classify->callback([&] {
    action = [&](Engine& engine) { out << "classified " << engine.audit_classify() << " pairs\n"; };
  });
  auto* tally_cmd = audit->add_subcommand("tally", "Per-label counts for one bot");
  std::string bot;
  std::string labels_file;
  tally_cmd->add_option("--bot", bot)->required();
  tally_cmd->add_option("--labels", labels_file, "Tally a labeled-pair JSONL file instead of the store")
      ->check(CLI::ExistingFile);
  tally_cmd->callback([&] {
    action = [&](Engine& engine) {
      if (labels_file.empty()) {
        out << tally_to_csv(engine.audit_tally(bot));
      } else {
        auto records = load_labeled_pairs(labels_file);
        out << tally_to_csv(tally(pairs_from_records(records), bot));
      }
    };
  });
  auto* label_cmd = audit->add_subcommand("label", "Record a manual verdict");
  std::string prompt_id, response_id, label_names;
  label_cmd->add_option("--prompt", prompt_id)->required();
  label_cmd->add_option("--response", response_id)->required();
  label_cmd->add_option("--labels", label_names, "Comma-separated, e.g. REFUSAL,WARNING")->required();
  label_cmd->callback([&] {
    auto labels = parse_label_list(label_names);
    action = [&, labels](Engine& engine) {
      out << "revision " << engine.set_manual_labels(prompt_id, response_id, labels) << '\n';
    };
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string bind;
  serve->add_option("--bind", bind, "host:port (config default)");
  serve->callback([&] {
    if (!bind.empty()) {
      try {
        parse_bind_address(bind);
      } catch (const ValidationError& e) {
        throw CLI::ValidationError("--bind", e.what());
      }
    }
    action = [&](Engine& engine) {
      ApiServer server(engine);
      BindAddress address = parse_bind_address(bind.empty() ? engine.config().bind : bind);
      int port = server.bind(address);
      out << "listening on " << address.host << ':' << port << std::endl;
      server.listen();
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  try {
    auto engine = Engine::open(resolve_config(global));
    action(*engine);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace ctrkit
