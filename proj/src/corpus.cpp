#include "ctrkit/corpus.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>
#include <utility>

#include <json.hpp>

#include "ctrkit/errors.hpp"
#include "ctrkit/preprocess.hpp"

namespace ctrkit {

using json = nlohmann::json;
using namespace std::chrono;

namespace {

constexpr Timestamp kEarliest = sys_days{year{2000} / January / 1};

bool parse_digits(std::string_view text, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > text.size()) return false;
  int value = 0;
  for (std::size_t i = 0; i < count; ++i) {
    char c = text[pos + i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

bool valid_hashtag(std::string_view tag) {
  if (tag.empty()) return false;
  return std::all_of(tag.begin(), tag.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

std::string lower_ascii(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

const std::string* string_field(const json& record, const char* name, std::size_t line) {
  auto it = record.find(name);
  if (it == record.end() || it->is_null()) return nullptr;
  if (!it->is_string()) throw ParseError(line, std::string("field '") + name + "' must be a string");
  return it->get_ptr<const std::string*>();
}

}  // namespace

std::string_view to_string(Source source) {
  switch (source) {
    case Source::kGab: return "gab";
    case Source::kGettr: return "gettr";
    case Source::kBitchute: return "bitchute";
    case Source::kOther: return "other";
  }
  return "other";
}

Source parse_source(std::string_view name) {
  auto lower = lower_ascii(name);
  if (lower == "gab") return Source::kGab;
  if (lower == "gettr") return Source::kGettr;
  if (lower == "bitchute") return Source::kBitchute;
  return Source::kOther;
}

std::string_view to_string(PostKind kind) {
  switch (kind) {
    case PostKind::kPost: return "post";
    case PostKind::kPrompt: return "prompt";
    case PostKind::kBotResponse: return "bot_response";
  }
  return "post";
}

std::optional<PostKind> parse_post_kind(std::string_view name) {
  if (name == "post") return PostKind::kPost;
  if (name == "prompt") return PostKind::kPrompt;
  if (name == "bot_response") return PostKind::kBotResponse;
  return std::nullopt;
}

std::string_view to_string(Granularity granularity) {
  switch (granularity) {
    case Granularity::kDay: return "day";
    case Granularity::kWeek: return "week";
    case Granularity::kMonth: return "month";
  }
  return "month";
}

std::optional<Granularity> parse_granularity(std::string_view name) {
  if (name == "day") return Granularity::kDay;
  if (name == "week") return Granularity::kWeek;
  if (name == "month") return Granularity::kMonth;
  return std::nullopt;
}

std::optional<Timestamp> parse_rfc3339(std::string_view text) {
  int y, mo, d, h, mi, s;
  if (!parse_digits(text, 0, 4, y) || text.size() < 19 || text[4] != '-' ||
      !parse_digits(text, 5, 2, mo) || text[7] != '-' || !parse_digits(text, 8, 2, d)) {
    return std::nullopt;
  }
  char sep = text[10];
  if (sep != 'T' && sep != 't' && sep != ' ') return std::nullopt;
  if (!parse_digits(text, 11, 2, h) || text[13] != ':' || !parse_digits(text, 14, 2, mi) ||
      text[16] != ':' || !parse_digits(text, 17, 2, s)) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      ++pos;
      ++digits;
    }
    if (digits == 0) return std::nullopt;
  }
  int offset_minutes = 0;
  if (pos < text.size()) {
    char tz = text[pos];
    if (tz == 'Z' || tz == 'z') {
      ++pos;
    } else if (tz == '+' || tz == '-') {
      int oh, om;
      if (!parse_digits(text, pos + 1, 2, oh)) return std::nullopt;
      std::size_t mpos = pos + 3;
      if (mpos < text.size() && text[mpos] == ':') ++mpos;
      if (!parse_digits(text, mpos, 2, om) || oh > 23 || om > 59) return std::nullopt;
      offset_minutes = (oh * 60 + om) * (tz == '-' ? -1 : 1);
      pos = mpos + 2;
    } else {
      return std::nullopt;
    }
  }
  if (pos != text.size()) return std::nullopt;

  year_month_day date{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!date.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  s = std::min(s, 59);  // leap second
  Timestamp local = sys_days{date} + hours{h} + minutes{mi} + seconds{s};
  return local - minutes{offset_minutes};
}

std::string format_rfc3339(Timestamp ts) {
  auto day_point = floor<days>(ts);
  year_month_day date{day_point};
  hh_mm_ss tod{ts - day_point};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string pseudonymize(std::string_view username, std::string_view salt) {
  std::string material;
  material.reserve(salt.size() + username.size() + 1);
  material.append(salt).push_back('\x1f');
  material.append(username);
  return "u_" + sha256_hex(material).substr(0, 24);
}

void validate_post(const Post& post, Timestamp now) {
  if (post.id.empty()) throw ValidationError("id is empty");
  if (post.timestamp < kEarliest) throw ValidationError("timestamp before 2000-01-01");
  if (post.timestamp > now + days{1}) throw ValidationError("timestamp in the future");
  std::set<std::string_view> seen;
  for (const auto& tag : post.hashtags) {
    if (!valid_hashtag(tag)) throw ValidationError("invalid hashtag '" + tag + "'");
    if (!seen.insert(tag).second) throw ValidationError("duplicate hashtag '" + tag + "'");
  }
  if (post.kind == PostKind::kBotResponse && !post.reply_to) {
    throw ValidationError("bot_response without reply_to");
  }
}

Post parse_post_record(std::string_view line, const ParseOptions& options,
                       std::size_t line_number) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_number, std::string("malformed JSON: ") + e.what());
  }
  if (!record.is_object()) throw ParseError(line_number, "record is not a JSON object");

  auto require = [&](const char* name) -> const std::string& {
    const std::string* value = string_field(record, name, line_number);
    if (!value) throw ValidationError(line_number, std::string("missing required field '") + name + "'");
    return *value;
  };

  Post post;
  post.id = require("id");
  if (post.id.empty()) throw ValidationError(line_number, "id is empty");
  post.source = parse_source(require("source"));

  if (const auto* ref = string_field(record, "author_ref", line_number)) {
    post.author_ref = *ref;
  } else {
    post.author_ref = pseudonymize(require("author"), options.salt);
  }

  const std::string& ts_text = require("ts");
  auto ts = parse_rfc3339(ts_text);
  if (!ts) throw ValidationError(line_number, "unparseable timestamp '" + ts_text + "'");
  post.timestamp = *ts;
  post.text = require("text");

  if (auto it = record.find("hashtags"); it != record.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError(line_number, "field 'hashtags' must be an array");
    std::set<std::string> seen;
    for (const auto& tag : *it) {
      if (!tag.is_string()) throw ParseError(line_number, "hashtag entries must be strings");
      std::string_view raw = tag.get_ref<const std::string&>();
      if (!raw.empty() && raw.front() == '#') raw.remove_prefix(1);
      std::string lowered = lower_ascii(raw);
      if (seen.insert(lowered).second) post.hashtags.push_back(std::move(lowered));
    }
  } else {
    post.hashtags = extract_hashtags(post.text);
  }

  if (const auto* kind = string_field(record, "kind", line_number)) {
    auto parsed = parse_post_kind(*kind);
    if (!parsed) throw ValidationError(line_number, "unknown kind '" + *kind + "'");
    post.kind = *parsed;
  }
  if (const auto* reply = string_field(record, "reply_to", line_number)) post.reply_to = *reply;
  if (const auto* bot = string_field(record, "bot", line_number)) post.bot = *bot;

  Timestamp now = options.now.value_or(time_point_cast<seconds>(system_clock::now()));
  try {
    validate_post(post, now);
  } catch (const ValidationError& e) {
    throw ValidationError(line_number, e.reason());
  }
  return post;
}

std::string serialize_post(const Post& post) {
  json record = {
      {"id", post.id},
      {"source", to_string(post.source)},
      {"author_ref", post.author_ref},
      {"ts", format_rfc3339(post.timestamp)},
      {"text", post.text},
      {"hashtags", post.hashtags},
      {"kind", to_string(post.kind)},
  };
  if (post.reply_to) record["reply_to"] = *post.reply_to;
  if (post.bot) record["bot"] = *post.bot;
  return record.dump();
}

DedupResult dedup(std::span<const Post> posts) {
  DedupResult result;
  std::set<std::pair<Source, std::string_view>> seen;
  for (const auto& post : posts) {
    if (seen.emplace(post.source, post.id).second) {
      result.posts.push_back(post);
    } else {
      ++result.dropped;
    }
  }
  return result;
}

TimeBucket bucket_of(Timestamp ts, Granularity granularity) {
  sys_days day_point = floor<days>(ts);
  switch (granularity) {
    case Granularity::kDay:
      return {day_point, granularity};
    case Granularity::kWeek: {
      weekday wd{day_point};
      return {day_point - days{wd.iso_encoding() - 1}, granularity};
    }
    case Granularity::kMonth: {
      year_month_day date{day_point};
      return {sys_days{date.year() / date.month() / 1}, granularity};
    }
  }
  return {day_point, granularity};
}

TimeBucket next_bucket(const TimeBucket& bucket) {
  sys_days day_point = floor<days>(bucket.start);
  switch (bucket.granularity) {
    case Granularity::kDay: return {day_point + days{1}, bucket.granularity};
    case Granularity::kWeek: return {day_point + days{7}, bucket.granularity};
    case Granularity::kMonth: {
      year_month_day date{day_point};
      year_month next = date.year() / date.month() + months{1};
      return {sys_days{next / 1}, bucket.granularity};
    }
  }
  return bucket;
}

bool is_aligned(const TimeBucket& bucket) {
  return bucket_of(bucket.start, bucket.granularity) == bucket;
}

std::string bucket_label(const TimeBucket& bucket) {
  year_month_day date{floor<days>(bucket.start)};
  char buf[16];
  if (bucket.granularity == Granularity::kMonth) {
    std::snprintf(buf, sizeof(buf), "%04d-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()));
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  }
  return buf;
}

std::optional<TimeBucket> parse_bucket_label(std::string_view label, Granularity granularity) {
  int y, m, d = 1;
  if (!parse_digits(label, 0, 4, y) || label.size() < 7 || label[4] != '-' ||
      !parse_digits(label, 5, 2, m)) {
    return std::nullopt;
  }
  if (granularity == Granularity::kMonth) {
    if (label.size() != 7) return std::nullopt;
  } else if (label.size() != 10 || label[7] != '-' || !parse_digits(label, 8, 2, d)) {
    return std::nullopt;
  }
  year_month_day date{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  TimeBucket bucket{sys_days{date}, granularity};
  if (!is_aligned(bucket)) return std::nullopt;
  return bucket;
}

std::map<TimeBucket, std::vector<Post>> bucketize(std::span<const Post> posts,
                                                  Granularity granularity) {
  std::map<TimeBucket, std::vector<Post>> buckets;
  for (const auto& post : posts) buckets[bucket_of(post.timestamp, granularity)].push_back(post);
  return buckets;
}

PairingResult pair_exchanges(std::span<const Post> posts) {
  std::map<std::string_view, const Post*> prompts;
  for (const auto& post : posts) {
    if (post.kind == PostKind::kPrompt) prompts.emplace(post.id, &post);
  }
  PairingResult result;
  for (const auto& post : posts) {
    if (post.kind != PostKind::kBotResponse) continue;
    auto it = post.reply_to ? prompts.find(*post.reply_to) : prompts.end();
    if (it == prompts.end() || it->second->timestamp > post.timestamp) {
      result.orphan_response_ids.push_back(post.id);
      continue;
    }
    PromptResponsePair pair;
    pair.prompt = *it->second;
    pair.response = post;
    pair.bot_name = post.bot.value_or(post.author_ref);
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

}  // namespace ctrkit
