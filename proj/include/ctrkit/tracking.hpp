#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctrkit/corpus.hpp"
#include "ctrkit/preprocess.hpp"

namespace ctrkit {

/// A post together with its analyzed token stream.
struct AnalyzedPost {
  Post post;
  std::vector<Token> tokens;
};

/// Counts per bucket, strictly increasing and gap-filled with zeros.
struct TermSeries {
  std::string term;
  Granularity granularity = Granularity::kMonth;
  std::vector<std::pair<TimeBucket, std::int64_t>> points;

  std::vector<std::int64_t> counts() const;
};

/// Inclusive range of buckets of one granularity.
struct BucketRange {
  TimeBucket first;
  TimeBucket last;
};

/// Range spanning every post, or nullopt when there are none.
std::optional<BucketRange> bucket_range_of(std::span<const AnalyzedPost> posts,
                                           Granularity granularity);

/// Number of posts per bucket whose token stream contains `term` (matched
/// against token lemmas, hashtags included). Posts outside the range are
/// ignored. Throws DomainError when range.last < range.first or the range
/// bounds are not aligned to `granularity`.
TermSeries count_series(std::string_view term, std::span<const AnalyzedPost> posts,
                        Granularity granularity, const BucketRange& range);

enum class ExcursionRule { kMultiple, kSigma };

std::string_view to_string(ExcursionRule rule);

struct ExcursionParams {
  /// Flag when count > multiple * baseline mean.
  double multiple = 3.0;
  /// Or when count > mean + sigma * stddev (population stddev of the baseline).
  double sigma = 3.0;
  /// Buckets that must precede any flag.
  std::size_t warmup = 3;
  /// Counts below this are never flagged.
  std::int64_t floor = 5;
  /// Baseline span in buckets; 0 uses every prior bucket (expanding mean).
  std::size_t window = 0;
};

/// Throws ValidationError if a parameter is out of range.
void validate(const ExcursionParams& params);

struct Excursion {
  std::string term;
  TimeBucket bucket;
  std::int64_t count = 0;
  double baseline_mean = 0.0;
  /// count / baseline_mean; +inf when the baseline is zero.
  double ratio = 0.0;
  ExcursionRule rule_fired = ExcursionRule::kMultiple;
  Timestamp detected_at{};
};

std::vector<Excursion> detect_excursions(const TermSeries& series, const ExcursionParams& params = {},
                                         Timestamp detected_at = Timestamp{});

/// `{term,bucket_start,count,baseline,ratio,rule}` (ratio is null when infinite).
std::string excursion_to_json(const Excursion& excursion);

struct WatchlistEntry {
  std::string term;
  Granularity granularity = Granularity::kMonth;
  std::string added_by;
  Timestamp added_at{};
  bool active = true;
};

struct WatchlistEvent {
  std::string action;
  std::string term;
  Granularity granularity = Granularity::kMonth;
  std::string actor;
  Timestamp at{};
};

enum class WatchlistAction { kAdd, kDeactivate };

/// Analyst-curated tracked terms, one entry per (term, granularity).
class Watchlist {
 public:
  /// Adding an existing entry reactivates it and keeps its original metadata.
  /// Deactivating an unknown entry throws NotFoundError.
  void update(WatchlistAction action, std::string_view term, Granularity granularity,
              std::string_view actor, Timestamp at);

  const WatchlistEntry* find(std::string_view term, Granularity granularity) const;
  std::vector<WatchlistEntry> entries() const;
  std::vector<WatchlistEntry> active_entries() const;
  const std::vector<WatchlistEvent>& audit_trail() const { return trail_; }

  std::string to_json() const;
  static Watchlist from_json(std::string_view json);

 private:
  std::map<std::pair<std::string, Granularity>, WatchlistEntry, std::less<>> entries_;
  std::vector<WatchlistEvent> trail_;
};

/// Series and excursions for every active watchlist entry. Terms are scanned
/// independently (one task per term).
std::vector<Excursion> scan_watchlist(const Watchlist& watchlist,
                                      std::span<const AnalyzedPost> posts,
                                      const ExcursionParams& params, Timestamp detected_at);

}  // namespace ctrkit
