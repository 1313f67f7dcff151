#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctrkit/audit.hpp"
#include "ctrkit/config.hpp"
#include "ctrkit/cooccur.hpp"
#include "ctrkit/preprocess.hpp"
#include "ctrkit/signatures.hpp"
#include "ctrkit/store.hpp"
#include "ctrkit/tracking.hpp"

namespace ctrkit {

/// Which posts act as TF-IDF documents.
enum class DocumentScope {
  /// Posts and prompts (user-authored text).
  kUser,
  kPrompts,
  kAll,
};

std::optional<DocumentScope> parse_document_scope(std::string_view name);

struct KeynessQuery {
  /// Bucket label, e.g. "2022-03".
  std::string period;
  Granularity granularity = Granularity::kMonth;
  std::size_t n = 3;
  std::optional<std::int64_t> min_freq;
  /// External reference table; the rest of the corpus is used when absent.
  std::optional<FrequencyTable> reference;
};

struct GraphQuery {
  std::optional<std::string> seed;
  std::optional<std::int64_t> min_weight;
  std::size_t depth = 1;
  std::optional<TimeWindow> window;
};

struct SeriesView {
  TermSeries series;
  std::vector<Excursion> excursions;
};

/// Binds store, pipeline and analytics. Reads run concurrently on a shared
/// lock; ingest, watchlist and label writes take the lock exclusively, so
/// every read sees one consistent snapshot.
///
/// Derived results (keyness, TF-IDF, graphs) are cached on disk keyed by a
/// hash of the store contents and the query parameters.
class Engine {
 public:
  Engine(Config config, Store store, Pipeline pipeline = Pipeline(),
         PatternTable patterns = PatternTable::defaults());

  /// Opens the store at config.data_dir.
  static std::unique_ptr<Engine> open(Config config);

  IngestSummary ingest(std::istream& input);
  IngestSummary ingest_file(const std::filesystem::path& path);

  std::vector<KeynessResult> keyness(const KeynessQuery& query);
  std::vector<TfidfResult> tfidf(TermKindFilter kind, std::size_t n,
                                 DocumentScope scope = DocumentScope::kUser);
  CooccurrenceGraph graph(const GraphQuery& query);
  SeriesView series(std::string_view term, std::optional<Granularity> granularity = std::nullopt);
  /// Excursions for one term, or for every active watchlist entry.
  std::vector<Excursion> excursions(std::optional<std::string> term,
                                    std::optional<Granularity> granularity = std::nullopt);

  Watchlist watchlist() const;
  Watchlist update_watchlist(WatchlistAction action, std::string_view term,
                             std::optional<Granularity> granularity, std::string_view actor);

  /// Classifies every stored prompt/response pair and records heuristic labels.
  /// Returns the number of pairs classified.
  std::size_t audit_classify();
  /// Stored pairs with their recorded labels attached.
  std::vector<PromptResponsePair> audit_pairs() const;
  TallyReport audit_tally(std::string_view bot);
  /// Records a manual verdict. Throws NotFoundError for an unknown pair.
  /// Resubmitting the same labels does not bump the state revision.
  std::uint64_t set_manual_labels(std::string_view prompt_id, std::string_view response_id,
                                  std::span<const AuditLabelValue> labels);

  std::uint64_t state_revision() const;
  std::size_t post_count() const;
  const Config& config() const { return config_; }
  /// Cache hits since construction.
  std::size_t cache_hits() const { return cache_hits_; }

 private:
  struct Snapshot;
  std::shared_ptr<const Snapshot> snapshot_locked() const;
  std::optional<std::string> cached(const std::string& key);
  void remember(const std::string& key, const std::string& value);
  std::string cache_key(std::string_view op, std::string_view params) const;
  std::vector<PromptResponsePair> audit_pairs_locked() const;

  Config config_;
  Store store_;
  Pipeline pipeline_;
  PatternTable patterns_;
  mutable std::shared_mutex mutex_;
  mutable std::mutex snapshot_mutex_;
  mutable std::shared_ptr<const Snapshot> snapshot_;
  std::mutex cache_mutex_;
  std::atomic<std::size_t> cache_hits_ = 0;
};

}  // namespace ctrkit
