#include "ctrkit/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <set>

#include <json.hpp>

#include "ctrkit/errors.hpp"

namespace ctrkit {

using json = nlohmann::json;

std::vector<std::int64_t> TermSeries::counts() const {
  std::vector<std::int64_t> out;
  out.reserve(points.size());
  for (const auto& [bucket, count] : points) out.push_back(count);
  return out;
}

std::optional<BucketRange> bucket_range_of(std::span<const AnalyzedPost> posts,
                                           Granularity granularity) {
  if (posts.empty()) return std::nullopt;
  auto [lo, hi] = std::minmax_element(posts.begin(), posts.end(), [](const auto& a, const auto& b) {
    return a.post.timestamp < b.post.timestamp;
  });
  return BucketRange{bucket_of(lo->post.timestamp, granularity),
                     bucket_of(hi->post.timestamp, granularity)};
}

TermSeries count_series(std::string_view term, std::span<const AnalyzedPost> posts,
                        Granularity granularity, const BucketRange& range) {
  if (range.first.granularity != granularity || range.last.granularity != granularity ||
      !is_aligned(range.first) || !is_aligned(range.last)) {
    throw DomainError("series range must be aligned to " + std::string(to_string(granularity)));
  }
  if (range.last < range.first) throw DomainError("empty series range");

  std::map<TimeBucket, std::int64_t> counts;
  for (TimeBucket b = range.first; b <= range.last; b = next_bucket(b)) counts[b] = 0;

  for (const auto& item : posts) {
    TimeBucket bucket = bucket_of(item.post.timestamp, granularity);
    if (bucket < range.first || range.last < bucket) continue;
    bool present = std::any_of(item.tokens.begin(), item.tokens.end(),
                               [&](const Token& token) { return token.lemma == term; });
    if (present) counts[bucket] += 1;
  }

  TermSeries series;
  series.term = std::string(term);
  series.granularity = granularity;
  series.points.assign(counts.begin(), counts.end());
  return series;
}

std::string_view to_string(ExcursionRule rule) {
  return rule == ExcursionRule::kMultiple ? "multiple" : "sigma";
}

void validate(const ExcursionParams& params) {
  if (!(params.multiple > 1.0) || !std::isfinite(params.multiple)) {
    throw ValidationError("excursion multiple must be a finite value > 1");
  }
  if (!(params.sigma > 0.0) || !std::isfinite(params.sigma)) {
    throw ValidationError("excursion sigma must be a finite value > 0");
  }
  if (params.warmup < 1) throw ValidationError("excursion warmup must be at least 1");
  if (params.floor < 1) throw ValidationError("excursion floor must be at least 1");
  if (params.window != 0 && params.window < params.warmup) {
    throw ValidationError("excursion window must be 0 (expanding) or >= warmup");
  }
}

std::vector<Excursion> detect_excursions(const TermSeries& series, const ExcursionParams& params,
                                         Timestamp detected_at) {
  validate(params);
  std::vector<Excursion> found;
  const auto counts = series.counts();
  for (std::size_t i = params.warmup; i < counts.size(); ++i) {
    const std::int64_t count = counts[i];
    if (count < params.floor) continue;
    std::size_t begin = params.window == 0 || i < params.window ? 0 : i - params.window;
    const double n = static_cast<double>(i - begin);
    double sum = 0.0;
    for (std::size_t j = begin; j < i; ++j) sum += static_cast<double>(counts[j]);
    const double mean = sum / n;
    double squares = 0.0;
    for (std::size_t j = begin; j < i; ++j) {
      const double d = static_cast<double>(counts[j]) - mean;
      squares += d * d;
    }
    const double stddev = std::sqrt(squares / n);
    const double value = static_cast<double>(count);

    const bool by_multiple = value > params.multiple * mean;
    const bool by_sigma = value > mean + params.sigma * stddev;
    if (!by_multiple && !by_sigma) continue;

    Excursion e;
    e.term = series.term;
    e.bucket = series.points[i].first;
    e.count = count;
    e.baseline_mean = mean;
    e.ratio = mean > 0.0 ? value / mean : std::numeric_limits<double>::infinity();
    e.rule_fired = by_multiple ? ExcursionRule::kMultiple : ExcursionRule::kSigma;
    e.detected_at = detected_at;
    // Either rule implies count > mean, so ratio > 1.
    found.push_back(std::move(e));
  }
  return found;
}

std::string excursion_to_json(const Excursion& excursion) {
  json out = {
      {"term", excursion.term},
      {"bucket", bucket_label(excursion.bucket)},
      {"granularity", to_string(excursion.bucket.granularity)},
      {"bucket_start", format_rfc3339(excursion.bucket.start)},
      {"count", excursion.count},
      {"baseline", excursion.baseline_mean},
      {"rule", to_string(excursion.rule_fired)},
      {"detected_at", format_rfc3339(excursion.detected_at)},
  };
  out["ratio"] = std::isfinite(excursion.ratio) ? json(excursion.ratio) : json(nullptr);
  return out.dump();
}

void Watchlist::update(WatchlistAction action, std::string_view term, Granularity granularity,
                       std::string_view actor, Timestamp at) {
  if (term.empty()) throw ValidationError("watchlist term is empty");
  auto key = std::make_pair(std::string(term), granularity);
  auto it = entries_.find(key);
  if (action == WatchlistAction::kAdd) {
    if (it == entries_.end()) {
      entries_.emplace(key, WatchlistEntry{std::string(term), granularity, std::string(actor), at, true});
    } else {
      it->second.active = true;
    }
    trail_.push_back({"add", std::string(term), granularity, std::string(actor), at});
  } else {
    if (it == entries_.end()) {
      throw NotFoundError("watchlist has no entry '" + std::string(term) + "' (" +
                          std::string(to_string(granularity)) + ")");
    }
    it->second.active = false;
    trail_.push_back({"deactivate", std::string(term), granularity, std::string(actor), at});
  }
}

const WatchlistEntry* Watchlist::find(std::string_view term, Granularity granularity) const {
  auto it = entries_.find(std::make_pair(std::string(term), granularity));
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<WatchlistEntry> Watchlist::entries() const {
  std::vector<WatchlistEntry> out;
  for (const auto& [key, entry] : entries_) out.push_back(entry);
  return out;
}

std::vector<WatchlistEntry> Watchlist::active_entries() const {
  std::vector<WatchlistEntry> out;
  for (const auto& [key, entry] : entries_) {
    if (entry.active) out.push_back(entry);
  }
  return out;
}

std::string Watchlist::to_json() const {
  json entries = json::array();
  for (const auto& [key, e] : entries_) {
    entries.push_back({{"term", e.term},
                       {"granularity", to_string(e.granularity)},
                       {"added_by", e.added_by},
                       {"added_at", format_rfc3339(e.added_at)},
                       {"active", e.active}});
  }
  json trail = json::array();
  for (const auto& ev : trail_) {
    trail.push_back({{"action", ev.action},
                     {"term", ev.term},
                     {"granularity", to_string(ev.granularity)},
                     {"actor", ev.actor},
                     {"at", format_rfc3339(ev.at)}});
  }
  return json{{"entries", entries}, {"audit_trail", trail}}.dump();
}

Watchlist Watchlist::from_json(std::string_view text) {
  Watchlist list;
  json doc = json::parse(text);
  auto granularity_of = [](const json& j) {
    auto g = parse_granularity(j.get<std::string>());
    if (!g) throw ValidationError("unknown granularity in watchlist");
    return *g;
  };
  auto time_of = [](const json& j) {
    auto ts = parse_rfc3339(j.get<std::string>());
    if (!ts) throw ValidationError("bad timestamp in watchlist");
    return *ts;
  };
  for (const auto& e : doc.value("entries", json::array())) {
    WatchlistEntry entry{e.at("term").get<std::string>(), granularity_of(e.at("granularity")),
                         e.value("added_by", ""), time_of(e.at("added_at")), e.value("active", true)};
    list.entries_[{entry.term, entry.granularity}] = entry;
  }
  for (const auto& ev : doc.value("audit_trail", json::array())) {
    list.trail_.push_back({ev.at("action").get<std::string>(), ev.at("term").get<std::string>(),
                           granularity_of(ev.at("granularity")), ev.value("actor", ""),
                           time_of(ev.at("at"))});
  }
  return list;
}

std::vector<Excursion> scan_watchlist(const Watchlist& watchlist,
                                      std::span<const AnalyzedPost> posts,
                                      const ExcursionParams& params, Timestamp detected_at) {
  validate(params);
  std::vector<std::future<std::vector<Excursion>>> tasks;
  for (const auto& entry : watchlist.active_entries()) {
    tasks.push_back(std::async(std::launch::async, [&, entry] {
      auto range = bucket_range_of(posts, entry.granularity);
      if (!range) return std::vector<Excursion>{};
      auto series = count_series(entry.term, posts, entry.granularity, *range);
      return detect_excursions(series, params, detected_at);
    }));
  }
  std::vector<Excursion> all;
  for (auto& task : tasks) {
    auto found = task.get();
    all.insert(all.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
  }
  return all;
}

}  // namespace ctrkit
