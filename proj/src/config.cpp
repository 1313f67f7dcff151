#include "ctrkit/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ctrkit/errors.hpp"

namespace ctrkit {

using json = nlohmann::json;

Config Config::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");

  Config config;
  try {
    if (doc.contains("data_dir")) config.data_dir = doc["data_dir"].get<std::string>();
    if (doc.contains("salt")) config.salt = doc["salt"].get<std::string>();
    if (doc.contains("default_granularity")) {
      auto g = parse_granularity(doc["default_granularity"].get<std::string>());
      if (!g) throw ValidationError("unknown default_granularity");
      config.default_granularity = *g;
    }
    if (doc.contains("excursion")) {
      const auto& e = doc["excursion"];
      auto& p = config.excursion;
      p.multiple = e.value("multiple", p.multiple);
      p.sigma = e.value("sigma", p.sigma);
      p.warmup = e.value("warmup", p.warmup);
      p.floor = e.value("floor", p.floor);
      p.window = e.value("window", p.window);
    }
    config.min_freq = doc.value("min_freq", config.min_freq);
    config.cooccur_min_weight = doc.value("cooccur_min_weight", config.cooccur_min_weight);
    config.bind = doc.value("bind", config.bind);
  } catch (const json::type_error& e) {
    throw ValidationError(std::string("config field has the wrong type: ") + e.what());
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::string Config::to_json() const {
  return json{{"data_dir", data_dir.string()},
              {"salt", salt},
              {"default_granularity", ctrkit::to_string(default_granularity)},
              {"excursion",
               {{"multiple", excursion.multiple},
                {"sigma", excursion.sigma},
                {"warmup", excursion.warmup},
                {"floor", excursion.floor},
                {"window", excursion.window}}},
              {"min_freq", min_freq},
              {"cooccur_min_weight", cooccur_min_weight},
              {"bind", bind}}
      .dump(2);
}

void Config::apply_environment() {
  if (const char* dir = std::getenv(std::string(kDataDirEnv).c_str()); dir && *dir) data_dir = dir;
}

void Config::validate() const {
  if (salt.empty()) throw ValidationError("salt must be non-empty");
  if (data_dir.empty()) throw ValidationError("data_dir must be non-empty");
  if (min_freq < 0) throw ValidationError("min_freq must be >= 0");
  if (cooccur_min_weight < 0) throw ValidationError("cooccur_min_weight must be >= 0");
  ctrkit::validate(excursion);
  parse_bind_address(bind);
}

BindAddress parse_bind_address(std::string_view text) {
  BindAddress address{"127.0.0.1", 0};
  std::string_view port = text;
  if (auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) address.host = std::string(text.substr(0, colon));
    port = text.substr(colon + 1);
  }
  int value = -1;
  auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (port.empty() || ec != std::errc() || end != port.data() + port.size() || value < 0 ||
      value > 65535) {
    throw ValidationError("bad bind address '" + std::string(text) + "'");
  }
  address.port = value;
  return address;
}

}  // namespace ctrkit
