#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctrkit/audit.hpp"
#include "ctrkit/corpus.hpp"
#include "ctrkit/tracking.hpp"

namespace ctrkit {

struct IngestSummary {
  std::size_t accepted = 0;
  std::size_t duplicates = 0;
  std::size_t rejected = 0;
  /// First few per-record failures, "line N: reason".
  std::vector<std::string> errors;
};

/// Mutable analyst state, persisted as one JSON document.
struct StoreState {
  std::uint64_t revision = 0;
  Watchlist watchlist;
  /// At most one record per (prompt_id, response_id, origin).
  std::vector<LabeledPairRecord> labels;
  /// Free-form JSON object of config overrides.
  std::string config_overrides = "{}";

  std::string to_json() const;
  static StoreState from_json(std::string_view json);

  /// Replaces the record with the same pair and origin, or appends.
  void put_labels(LabeledPairRecord record);
};

/// Embedded file store:
///   segments/<source>-<YYYY-MM>.jsonl  append-only posts, one per line
///   state.json                         StoreState, replaced via write-then-rename
///   cache/<sha256>.json                immutable derived results
///
/// Not thread-safe; callers serialize writers (see Engine).
class Store {
 public:
  static Store open(const std::filesystem::path& data_dir, ParseOptions options = {});

  IngestSummary ingest(std::istream& input);
  /// Throws IoError when the file cannot be read.
  IngestSummary ingest_file(const std::filesystem::path& path);

  const std::vector<Post>& posts() const { return posts_; }
  const StoreState& state() const { return state_; }
  /// Writes `next` with revision = current + 1 and returns the new revision.
  std::uint64_t commit_state(StoreState next);

  /// SHA-256 over every segment's name and bytes.
  std::string content_digest() const;

  std::optional<std::string> cache_get(std::string_view key) const;
  /// First write wins; an existing entry is never replaced.
  void cache_put(std::string_view key, std::string_view value);

  const std::filesystem::path& data_dir() const { return dir_; }
  std::filesystem::path state_path() const { return dir_ / "state.json"; }
  std::filesystem::path segment_dir() const { return dir_ / "segments"; }
  std::filesystem::path cache_dir() const { return dir_ / "cache"; }
  /// Segment lines that could not be read back on open (torn writes).
  std::size_t skipped_segment_lines() const { return skipped_lines_; }

 private:
  explicit Store(std::filesystem::path dir, ParseOptions options);
  void load_segments();
  void load_state();
  std::filesystem::path segment_path(const Post& post) const;

  std::filesystem::path dir_;
  ParseOptions options_;
  std::vector<Post> posts_;
  std::set<std::pair<Source, std::string>> keys_;
  StoreState state_;
  std::size_t skipped_lines_ = 0;
};

/// Atomically replaces `path` with `contents` (temp file, flush, rename).
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace ctrkit
