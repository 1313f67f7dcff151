#include "ctrkit/store.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "ctrkit/errors.hpp"

namespace ctrkit {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::size_t kMaxReportedErrors = 10;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_all(int fd, std::string_view data, const fs::path& path) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("write failed on " + path.string() + ": " + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

// Appends whole lines with a single write; a crash can tear at most the last one.
void append_lines(const fs::path& path, const std::string& lines) {
  int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  std::string payload;
  // Seal a torn tail so the new lines start on a fresh line.
  off_t size = ::lseek(fd, 0, SEEK_END);
  if (size > 0) {
    char last = '\n';
    if (::pread(fd, &last, 1, size - 1) == 1 && last != '\n') payload.push_back('\n');
  }
  payload += lines;
  try {
    write_all(fd, payload, path);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::fsync(fd);
  ::close(fd);
}

bool post_order(const Post& a, const Post& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  if (a.source != b.source) return a.source < b.source;
  return a.id < b.id;
}

json record_to_json(const LabeledPairRecord& record) {
  return json::parse(serialize_labeled_pair(record));
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw IoError("cannot open " + tmp.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, contents, tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) throw IoError("cannot flush " + tmp.string());
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

// ---- StoreState ---------------------------------------------------------

std::string StoreState::to_json() const {
  json labels_json = json::array();
  for (const auto& record : labels) labels_json.push_back(record_to_json(record));
  json overrides = json::parse(config_overrides.empty() ? "{}" : config_overrides);
  return json{{"revision", revision},
              {"watchlist", json::parse(watchlist.to_json())},
              {"labels", labels_json},
              {"config_overrides", overrides}}
      .dump(2);
}

StoreState StoreState::from_json(std::string_view text) {
  StoreState state;
  try {
    json doc = json::parse(text);
    state.revision = doc.at("revision").get<std::uint64_t>();
    if (doc.contains("watchlist")) state.watchlist = Watchlist::from_json(doc["watchlist"].dump());
    std::size_t line = 0;
    for (const auto& record : doc.value("labels", json::array())) {
      state.labels.push_back(parse_labeled_pair(record.dump(), ++line));
    }
    state.config_overrides = doc.value("config_overrides", json::object()).dump();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad state document: ") + e.what());
  }
  return state;
}

void StoreState::put_labels(LabeledPairRecord record) {
  auto it = std::find_if(labels.begin(), labels.end(), [&](const LabeledPairRecord& r) {
    return r.prompt_id == record.prompt_id && r.response_id == record.response_id &&
           r.origin == record.origin;
  });
  if (it == labels.end()) {
    labels.push_back(std::move(record));
  } else {
    *it = std::move(record);
  }
}

// ---- Store --------------------------------------------------------------

Store::Store(fs::path dir, ParseOptions options) : dir_(std::move(dir)), options_(std::move(options)) {}

Store Store::open(const fs::path& data_dir, ParseOptions options) {
  Store store(data_dir, std::move(options));
  std::error_code ec;
  fs::create_directories(store.segment_dir(), ec);
  if (!ec) fs::create_directories(store.cache_dir(), ec);
  if (ec) throw IoError("cannot create store at " + data_dir.string() + ": " + ec.message());
  store.load_segments();
  store.load_state();
  return store;
}

void Store::load_segments() {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(segment_dir())) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  // Stored posts were validated on ingest; only structure is rechecked here.
  ParseOptions reload = options_;
  reload.now = Timestamp::max() - std::chrono::days{2};
  for (const auto& file : files) {
    std::istringstream in(read_file(file));
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (line.empty()) continue;
      try {
        Post post = parse_post_record(line, reload, line_number);
        if (keys_.emplace(post.source, post.id).second) posts_.push_back(std::move(post));
      } catch (const Error&) {
        ++skipped_lines_;
      }
    }
  }
  std::sort(posts_.begin(), posts_.end(), post_order);
}

void Store::load_state() {
  // A leftover temp file is an interrupted write; the previous state stands.
  fs::path tmp = state_path();
  tmp += ".tmp";
  std::error_code ec;
  fs::remove(tmp, ec);
  if (!fs::exists(state_path())) return;
  state_ = StoreState::from_json(read_file(state_path()));
}

fs::path Store::segment_path(const Post& post) const {
  std::string month = bucket_label(bucket_of(post.timestamp, Granularity::kMonth));
  return segment_dir() / (std::string(to_string(post.source)) + "-" + month + ".jsonl");
}

IngestSummary Store::ingest(std::istream& input) {
  IngestSummary summary;
  std::map<fs::path, std::string> pending;
  std::vector<Post> accepted;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(input, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Post post;
    try {
      post = parse_post_record(line, options_, line_number);
    } catch (const Error& e) {
      ++summary.rejected;
      if (summary.errors.size() < kMaxReportedErrors) summary.errors.push_back(e.what());
      continue;
    }
    if (!keys_.emplace(post.source, post.id).second) {
      ++summary.duplicates;
      continue;
    }
    pending[segment_path(post)] += serialize_post(post) + "\n";
    accepted.push_back(std::move(post));
  }
  if (input.bad()) throw IoError("read error while ingesting");

  for (const auto& [path, lines] : pending) append_lines(path, lines);
  summary.accepted = accepted.size();
  if (!accepted.empty()) {
    std::sort(accepted.begin(), accepted.end(), post_order);
    std::size_t middle = posts_.size();
    posts_.insert(posts_.end(), std::make_move_iterator(accepted.begin()),
                  std::make_move_iterator(accepted.end()));
    std::inplace_merge(posts_.begin(), posts_.begin() + static_cast<std::ptrdiff_t>(middle),
                       posts_.end(), post_order);
  }
  return summary;
}

IngestSummary Store::ingest_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return ingest(in);
}

std::uint64_t Store::commit_state(StoreState next) {
  next.revision = state_.revision + 1;
  write_file_atomic(state_path(), next.to_json());
  state_ = std::move(next);
  return state_.revision;
}

std::string Store::content_digest() const {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(segment_dir())) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::array<char, 1 << 16> buffer{};
  for (const auto& file : files) {
    std::string name = file.filename().string();
    name.push_back('\0');
    EVP_DigestUpdate(ctx.get(), name.data(), name.size());
    std::ifstream in(file, std::ios::binary);
    while (in.read(buffer.data(), buffer.size()) || in.gcount() > 0) {
      EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
    }
    EVP_DigestUpdate(ctx.get(), "\0", 1);
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::optional<std::string> Store::cache_get(std::string_view key) const {
  fs::path path = cache_dir() / (std::string(key) + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void Store::cache_put(std::string_view key, std::string_view value) {
  fs::path path = cache_dir() / (std::string(key) + ".json");
  if (fs::exists(path)) return;
  write_file_atomic(path, value);
}

}  // namespace ctrkit
