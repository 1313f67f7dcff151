#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "ctrkit/corpus.hpp"
#include "ctrkit/tracking.hpp"

namespace ctrkit {

inline constexpr std::string_view kDataDirEnv = "CTRKIT_DATA_DIR";

struct Config {
  std::filesystem::path data_dir = "ctrkit-data";
  /// Salt for author pseudonyms. Must be non-empty.
  std::string salt = "ctrkit";
  Granularity default_granularity = Granularity::kMonth;
  ExcursionParams excursion;
  std::int64_t min_freq = 5;
  std::int64_t cooccur_min_weight = 50;
  std::string bind = "127.0.0.1:8080";

  /// Reads a JSON config; absent keys keep their defaults.
  static Config from_json(std::string_view json);
  static Config load(const std::filesystem::path& path);
  std::string to_json() const;

  /// CTRKIT_DATA_DIR, when set, replaces data_dir.
  void apply_environment();
  /// Throws ValidationError for out-of-range values.
  void validate() const;
};

struct BindAddress {
  std::string host;
  int port = 0;
};

/// "host:port", ":port" or "port". Throws ValidationError on bad input.
BindAddress parse_bind_address(std::string_view text);

}  // namespace ctrkit
