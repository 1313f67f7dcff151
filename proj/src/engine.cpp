#include "ctrkit/engine.hpp"

#include <algorithm>
#include <future>
#include <thread>

#include "ctrkit/errors.hpp"
#include "json_io.hpp"

namespace ctrkit {

namespace {

// Bump when the encoding or semantics of a cached result changes.
constexpr std::string_view kCacheVersion = "ctrkit-cache-1";

Timestamp now_seconds() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

bool in_scope(PostKind kind, DocumentScope scope) {
  switch (scope) {
    case DocumentScope::kUser: return kind != PostKind::kBotResponse;
    case DocumentScope::kPrompts: return kind == PostKind::kPrompt;
    case DocumentScope::kAll: return true;
  }
  return false;
}

const KindFilter kKeynessKinds = {TokenKind::kWord, TokenKind::kNounCandidate,
                                  TokenKind::kEntityCandidate, TokenKind::kHashtag};

// Runs fn(i) for i in [0, count) on up to hardware_concurrency workers.
template <typename Fn>
void parallel_for(std::size_t count, Fn fn) {
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(1, count / 256));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> tasks;
  std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t begin = 0; begin < count; begin += chunk) {
    std::size_t end = std::min(count, begin + chunk);
    tasks.push_back(std::async(std::launch::async, [&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    }));
  }
  for (auto& task : tasks) task.get();
}

}  // namespace

std::optional<DocumentScope> parse_document_scope(std::string_view name) {
  if (name == "user") return DocumentScope::kUser;
  if (name == "prompts") return DocumentScope::kPrompts;
  if (name == "all") return DocumentScope::kAll;
  return std::nullopt;
}

/// Analyzed view of the posts at one store generation.
struct Engine::Snapshot {
  std::size_t post_count = 0;
  std::string digest;
  std::vector<AnalyzedPost> analyzed;

  std::vector<AnalyzedPost> scoped(DocumentScope scope) const {
    std::vector<AnalyzedPost> out;
    for (const auto& item : analyzed) {
      if (in_scope(item.post.kind, scope)) out.push_back(item);
    }
    return out;
  }
};

Engine::Engine(Config config, Store store, Pipeline pipeline, PatternTable patterns)
    : config_(std::move(config)),
      store_(std::move(store)),
      pipeline_(std::move(pipeline)),
      patterns_(std::move(patterns)) {
  config_.validate();
}

std::unique_ptr<Engine> Engine::open(Config config) {
  config.validate();
  ParseOptions options;
  options.salt = config.salt;
  Store store = Store::open(config.data_dir, options);
  return std::make_unique<Engine>(std::move(config), std::move(store));
}

// Caller holds mutex_ (shared or exclusive).
std::shared_ptr<const Engine::Snapshot> Engine::snapshot_locked() const {
  std::lock_guard guard(snapshot_mutex_);
  const auto& posts = store_.posts();
  if (snapshot_ && snapshot_->post_count == posts.size()) return snapshot_;
  auto snap = std::make_shared<Snapshot>();
  snap->post_count = posts.size();
  snap->digest = store_.content_digest();
  snap->analyzed.resize(posts.size());
  parallel_for(posts.size(), [&](std::size_t i) {
    snap->analyzed[i].post = posts[i];
    snap->analyzed[i].tokens = pipeline_.analyze(posts[i].text);
  });
  snapshot_ = snap;
  return snapshot_;
}

std::string Engine::cache_key(std::string_view op, std::string_view params) const {
  std::string material(kCacheVersion);
  material.push_back('\0');
  material += snapshot_locked()->digest;
  material.push_back('\0');
  material += op;
  material.push_back('\0');
  material += params;
  return sha256_hex(material);
}

std::optional<std::string> Engine::cached(const std::string& key) {
  std::lock_guard guard(cache_mutex_);
  auto value = store_.cache_get(key);
  if (value) ++cache_hits_;
  return value;
}

void Engine::remember(const std::string& key, const std::string& value) {
  std::lock_guard guard(cache_mutex_);
  store_.cache_put(key, value);
}

IngestSummary Engine::ingest(std::istream& input) {
  std::unique_lock lock(mutex_);
  return store_.ingest(input);
}

IngestSummary Engine::ingest_file(const std::filesystem::path& path) {
  std::unique_lock lock(mutex_);
  return store_.ingest_file(path);
}

std::vector<KeynessResult> Engine::keyness(const KeynessQuery& query) {
  auto bucket = parse_bucket_label(query.period, query.granularity);
  if (!bucket) {
    throw ValidationError("period '" + query.period + "' is not a " +
                          std::string(to_string(query.granularity)) + " label");
  }
  const std::int64_t min_freq = query.min_freq.value_or(config_.min_freq);
  if (min_freq < 0) throw ValidationError("min_freq must be >= 0");

  std::shared_lock lock(mutex_);
  std::string key;
  if (!query.reference) {
    jsonio::json params = {{"period", query.period},
                           {"granularity", to_string(query.granularity)},
                           {"n", query.n},
                           {"min_freq", min_freq}};
    key = cache_key("keyness", params.dump());
    if (auto hit = cached(key)) {
      std::vector<KeynessResult> results;
      for (const auto& item : jsonio::json::parse(*hit)) results.push_back(jsonio::decode_keyness(item));
      return results;
    }
  }

  auto snap = snapshot_locked();
  FrequencyTable target("period:" + query.period);
  FrequencyTable all("all");
  for (const auto& item : snap->analyzed) {
    if (!in_scope(item.post.kind, DocumentScope::kUser)) continue;
    const bool inside = bucket_of(item.post.timestamp, query.granularity) == *bucket;
    for (const auto& token : item.tokens) {
      if (!kKeynessKinds.contains(token.kind)) continue;
      all.add(token.lemma);
      if (inside) target.add(token.lemma);
    }
  }
  if (target.empty()) throw DomainError("no tokens in period " + query.period);
  FrequencyTable reference = query.reference ? *query.reference : rest_of_corpus(all, target);
  auto results = top_n_keyness(target, reference, query.n, min_freq);
  if (!key.empty()) remember(key, jsonio::encode_all(results).dump());
  return results;
}

std::vector<TfidfResult> Engine::tfidf(TermKindFilter kind, std::size_t n, DocumentScope scope) {
  std::shared_lock lock(mutex_);
  jsonio::json params = {{"kind", to_string(kind)}, {"n", n}, {"scope", static_cast<int>(scope)}};
  std::string key = cache_key("tfidf", params.dump());
  if (auto hit = cached(key)) {
    std::vector<TfidfResult> results;
    for (const auto& item : jsonio::json::parse(*hit)) results.push_back(jsonio::decode_tfidf(item));
    return results;
  }
  auto snap = snapshot_locked();
  std::vector<std::vector<Token>> documents;
  for (const auto& item : snap->analyzed) {
    if (in_scope(item.post.kind, scope)) documents.push_back(item.tokens);
  }
  auto results = tfidf_rank(documents, kind, n);
  remember(key, jsonio::encode_all(results).dump());
  return results;
}

CooccurrenceGraph Engine::graph(const GraphQuery& query) {
  const std::int64_t min_weight = query.min_weight.value_or(config_.cooccur_min_weight);
  if (min_weight < 0) throw ValidationError("min_weight must be >= 0");
  if (query.window && query.window->end < query.window->start) {
    throw ValidationError("graph window ends before it starts");
  }

  std::shared_lock lock(mutex_);
  jsonio::json params = {{"seed", query.seed ? jsonio::json(*query.seed) : jsonio::json()},
                         {"min_weight", min_weight},
                         {"depth", query.depth}};
  if (query.window) {
    params["window"] = {format_rfc3339(query.window->start), format_rfc3339(query.window->end)};
  }
  std::string key = cache_key("graph", params.dump());
  if (auto hit = cached(key)) return jsonio::decode_graph(jsonio::json::parse(*hit));

  CooccurrenceGraph full = build_graph(store_.posts(), query.window);
  CooccurrenceGraph result;
  if (query.seed) {
    if (!full.has_node(*query.seed)) throw NotFoundError("hashtag '" + *query.seed + "' not in graph");
    full.seed_term = *query.seed;
    result = neighborhood(prune(full, min_weight), *query.seed, query.depth);
  } else {
    result = prune(full, min_weight);
  }
  remember(key, jsonio::encode(result).dump());
  return result;
}

SeriesView Engine::series(std::string_view term, std::optional<Granularity> granularity) {
  if (term.empty()) throw ValidationError("term is empty");
  const Granularity g = granularity.value_or(config_.default_granularity);
  std::shared_lock lock(mutex_);
  auto user_posts = snapshot_locked()->scoped(DocumentScope::kUser);
  auto range = bucket_range_of(user_posts, g);
  if (!range) throw DomainError("no posts to build a series from");
  SeriesView view;
  view.series = count_series(term, user_posts, g, *range);
  view.excursions = detect_excursions(view.series, config_.excursion, now_seconds());
  return view;
}

std::vector<Excursion> Engine::excursions(std::optional<std::string> term,
                                          std::optional<Granularity> granularity) {
  if (term) return series(*term, granularity).excursions;
  std::shared_lock lock(mutex_);
  Watchlist selected;
  for (const auto& entry : store_.state().watchlist.active_entries()) {
    if (!granularity || entry.granularity == *granularity) {
      selected.update(WatchlistAction::kAdd, entry.term, entry.granularity, entry.added_by,
                      entry.added_at);
    }
  }
  auto user_posts = snapshot_locked()->scoped(DocumentScope::kUser);
  return scan_watchlist(selected, user_posts, config_.excursion, now_seconds());
}

Watchlist Engine::watchlist() const {
  std::shared_lock lock(mutex_);
  return store_.state().watchlist;
}

Watchlist Engine::update_watchlist(WatchlistAction action, std::string_view term,
                                   std::optional<Granularity> granularity, std::string_view actor) {
  std::unique_lock lock(mutex_);
  StoreState next = store_.state();
  next.watchlist.update(action, term, granularity.value_or(config_.default_granularity),
                        actor.empty() ? "analyst" : actor, now_seconds());
  store_.commit_state(next);
  return store_.state().watchlist;
}

std::vector<PromptResponsePair> Engine::audit_pairs_locked() const {
  auto pairs = pair_exchanges(store_.posts()).pairs;
  const auto& records = store_.state().labels;
  for (auto& pair : pairs) {
    for (const auto& record : records) {
      if (record.prompt_id != pair.prompt.id || record.response_id != pair.response.id) continue;
      for (auto value : record.labels) pair.labels.push_back({value, record.origin});
    }
  }
  return pairs;
}

std::vector<PromptResponsePair> Engine::audit_pairs() const {
  std::shared_lock lock(mutex_);
  return audit_pairs_locked();
}

std::size_t Engine::audit_classify() {
  std::unique_lock lock(mutex_);
  auto pairs = pair_exchanges(store_.posts()).pairs;
  std::vector<std::set<AuditLabelValue>> verdicts(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    verdicts[i] = heuristic_classify(pairs[i].response.text, patterns_,
                                     prompt_topic_terms(pairs[i].prompt, pipeline_));
  });

  StoreState next = store_.state();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    LabeledPairRecord record;
    record.prompt_id = pairs[i].prompt.id;
    record.response_id = pairs[i].response.id;
    record.bot = pairs[i].bot_name;
    record.labels.assign(verdicts[i].begin(), verdicts[i].end());
    record.origin = LabelOrigin::kHeuristic;
    next.put_labels(std::move(record));
  }
  if (!pairs.empty()) store_.commit_state(std::move(next));
  return pairs.size();
}

TallyReport Engine::audit_tally(std::string_view bot) {
  std::shared_lock lock(mutex_);
  return tally(audit_pairs_locked(), bot);
}

std::uint64_t Engine::set_manual_labels(std::string_view prompt_id, std::string_view response_id,
                                        std::span<const AuditLabelValue> labels) {
  if (labels.empty()) throw ValidationError("a manual verdict needs at least one label");
  std::set<AuditLabelValue> wanted(labels.begin(), labels.end());

  std::unique_lock lock(mutex_);
  auto pairs = pair_exchanges(store_.posts()).pairs;
  auto pair = std::find_if(pairs.begin(), pairs.end(), [&](const PromptResponsePair& p) {
    return p.prompt.id == prompt_id && p.response.id == response_id;
  });
  if (pair == pairs.end()) {
    throw NotFoundError("no pair " + std::string(prompt_id) + "/" + std::string(response_id));
  }
  for (const auto& record : store_.state().labels) {
    if (record.prompt_id == prompt_id && record.response_id == response_id &&
        record.origin == LabelOrigin::kManual &&
        std::set<AuditLabelValue>(record.labels.begin(), record.labels.end()) == wanted) {
      return store_.state().revision;
    }
  }
  LabeledPairRecord record;
  record.prompt_id = std::string(prompt_id);
  record.response_id = std::string(response_id);
  record.bot = pair->bot_name;
  record.labels.assign(wanted.begin(), wanted.end());
  record.origin = LabelOrigin::kManual;
  StoreState next = store_.state();
  next.put_labels(std::move(record));
  return store_.commit_state(std::move(next));
}

std::uint64_t Engine::state_revision() const {
  std::shared_lock lock(mutex_);
  return store_.state().revision;
}

std::size_t Engine::post_count() const {
  std::shared_lock lock(mutex_);
  return store_.posts().size();
}

}  // namespace ctrkit
