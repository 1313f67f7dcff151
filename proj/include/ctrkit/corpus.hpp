#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctrkit/audit_label.hpp"

namespace ctrkit {

using Timestamp = std::chrono::sys_seconds;

enum class Source { kGab, kGettr, kBitchute, kOther };
enum class PostKind { kPost, kPrompt, kBotResponse };
enum class Granularity { kDay, kWeek, kMonth };

std::string_view to_string(Source source);
/// Unknown platform names map to Source::kOther.
Source parse_source(std::string_view name);

std::string_view to_string(PostKind kind);
std::optional<PostKind> parse_post_kind(std::string_view name);

std::string_view to_string(Granularity granularity);
std::optional<Granularity> parse_granularity(std::string_view name);

/// RFC-3339 (date, 'T' or ' ', time, optional fraction, optional offset).
/// A missing offset is read as UTC; fractions are truncated to seconds.
std::optional<Timestamp> parse_rfc3339(std::string_view text);
/// Formats as YYYY-MM-DDTHH:MM:SSZ.
std::string format_rfc3339(Timestamp ts);

/// One social-media message. Immutable once parsed.
struct Post {
  std::string id;
  Source source = Source::kOther;
  std::string author_ref;
  Timestamp timestamp{};
  std::string text;
  std::vector<std::string> hashtags;
  PostKind kind = PostKind::kPost;
  std::optional<std::string> reply_to;
  std::optional<std::string> bot;

  friend bool operator==(const Post&, const Post&) = default;
};

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Salted one-way pseudonym for an upstream username (hex SHA-256 prefix).
std::string pseudonymize(std::string_view username, std::string_view salt);

struct ParseOptions {
  std::string salt = "ctrkit";
  /// Timestamps later than now + 1 day are rejected. Defaults to the system clock.
  std::optional<Timestamp> now;
};

/// Parses one JSONL record. Throws ParseError for undecodable input and
/// ValidationError when a Post invariant does not hold.
///
/// Records carrying `author_ref` (the store's own serialization) are taken
/// as already pseudonymized; records carrying `author` are hashed.
Post parse_post_record(std::string_view line, const ParseOptions& options = {},
                       std::size_t line_number = 1);

/// Inverse of parse_post_record for valid posts (emits `author_ref`).
std::string serialize_post(const Post& post);

/// Throws ValidationError describing the first violated invariant.
void validate_post(const Post& post, Timestamp now);

struct DedupResult {
  std::vector<Post> posts;
  std::size_t dropped = 0;
};

/// Keeps the first occurrence of each (source, id).
DedupResult dedup(std::span<const Post> posts);

struct TimeBucket {
  Timestamp start{};
  Granularity granularity = Granularity::kMonth;

  friend auto operator<=>(const TimeBucket&, const TimeBucket&) = default;
};

/// Aligns `ts` down to its bucket: UTC midnight, ISO Monday, or the 1st of the month.
TimeBucket bucket_of(Timestamp ts, Granularity granularity);
TimeBucket next_bucket(const TimeBucket& bucket);
bool is_aligned(const TimeBucket& bucket);
/// "2022-03" for months, "2022-03-14" for days and weeks.
std::string bucket_label(const TimeBucket& bucket);
/// Inverse of bucket_label. Returns nullopt for malformed or misaligned labels.
std::optional<TimeBucket> parse_bucket_label(std::string_view label, Granularity granularity);

std::map<TimeBucket, std::vector<Post>> bucketize(std::span<const Post> posts,
                                                  Granularity granularity);

struct PromptResponsePair {
  Post prompt;
  Post response;
  std::string bot_name;
  std::vector<AuditLabel> labels;
};

struct PairingResult {
  std::vector<PromptResponsePair> pairs;
  /// Responses whose prompt is missing or which violate pair invariants.
  std::vector<std::string> orphan_response_ids;
};

/// Joins bot responses to the prompts they reply to. Pairs come out in
/// response input order.
PairingResult pair_exchanges(std::span<const Post> posts);

}  // namespace ctrkit
