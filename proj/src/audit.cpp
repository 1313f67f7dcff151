#include "ctrkit/audit.hpp"

#include <unicode/unistr.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ctrkit/errors.hpp"
#include "resources.hpp"

namespace ctrkit {

using json = nlohmann::json;

namespace {

constexpr std::array<AuditLabelValue, 4> kGuardrailLabels = {
    AuditLabelValue::kRefusal, AuditLabelValue::kWarning, AuditLabelValue::kCorrection,
    AuditLabelValue::kDebunkOrConcern};

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

// Phrase occurrence that does not start or end inside a word.
bool contains_phrase(std::string_view text, std::string_view phrase) {
  if (phrase.empty()) return false;
  for (std::size_t pos = text.find(phrase); pos != std::string_view::npos;
       pos = text.find(phrase, pos + 1)) {
    std::size_t end = pos + phrase.size();
    bool left_ok = pos == 0 || !is_word_char(phrase.front()) || !is_word_char(text[pos - 1]);
    bool right_ok = end == text.size() || !is_word_char(phrase.back()) || !is_word_char(text[end]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

std::vector<std::string> parse_phrase_lines(std::string_view text) {
  std::vector<std::string> phrases;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string phrase = normalize_for_matching(line);
    if (phrase.empty() || phrase.front() == '#') continue;
    phrases.push_back(std::move(phrase));
  }
  return phrases;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string pair_id(const PromptResponsePair& pair) {
  return pair.prompt.id + "/" + pair.response.id;
}

}  // namespace

// ---- PatternTable -------------------------------------------------------

void PatternTable::set(AuditLabelValue label, std::vector<std::string> phrases) {
  for (auto& phrase : phrases) {
    phrase = normalize_for_matching(phrase);
    if (phrase.empty()) {
      throw ValidationError("empty phrase in " + std::string(to_string(label)) + " patterns");
    }
  }
  auto other = label == AuditLabelValue::kRefusal   ? AuditLabelValue::kPromotion
               : label == AuditLabelValue::kPromotion ? AuditLabelValue::kRefusal
                                                      : label;
  if (other != label) {
    for (const auto& phrase : phrases) {
      const auto& existing = this->phrases(other);
      if (std::find(existing.begin(), existing.end(), phrase) != existing.end()) {
        throw ValidationError("phrase '" + phrase + "' is in both REFUSAL and PROMOTION patterns");
      }
    }
  }
  phrases_[label] = std::move(phrases);
}

const std::vector<std::string>& PatternTable::phrases(AuditLabelValue label) const {
  static const std::vector<std::string> kNone;
  auto it = phrases_.find(label);
  return it == phrases_.end() ? kNone : it->second;
}

bool PatternTable::empty() const {
  return std::all_of(phrases_.begin(), phrases_.end(),
                     [](const auto& entry) { return entry.second.empty(); });
}

std::string PatternTable::file_name(AuditLabelValue label) {
  std::string name(to_string(label));
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return name + ".txt";
}

PatternTable PatternTable::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  PatternTable table;
  for (auto label : kAllAuditLabels) {
    auto path = dir / file_name(label);
    if (std::filesystem::exists(path)) table.set(label, parse_phrase_lines(read_file(path)));
  }
  return table;
}

const PatternTable& PatternTable::defaults() {
  static const PatternTable table = [] {
    PatternTable t;
    for (auto label : kAllAuditLabels) {
      std::string stem = file_name(label);
      stem.resize(stem.size() - 4);
      auto text = resources::pattern_file(stem);
      if (!text.empty()) t.set(label, parse_phrase_lines(text));
    }
    return t;
  }();
  return table;
}

// ---- classification -----------------------------------------------------

std::string normalize_for_matching(std::string_view text) {
  std::string lowered;
  icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())))
      .toLower()
      .findAndReplace(icu::UnicodeString(static_cast<UChar32>(0x2019)), icu::UnicodeString("'"))
      .findAndReplace(icu::UnicodeString(static_cast<UChar32>(0x2018)), icu::UnicodeString("'"))
      .findAndReplace(icu::UnicodeString(static_cast<UChar32>(0x201C)), icu::UnicodeString("\""))
      .findAndReplace(icu::UnicodeString(static_cast<UChar32>(0x201D)), icu::UnicodeString("\""))
      .toUTF8String(lowered);
  std::string out;
  out.reserve(lowered.size());
  bool pending_space = false;
  for (char c : lowered) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::set<AuditLabelValue> heuristic_classify(std::string_view response_text,
                                             const PatternTable& patterns,
                                             const std::set<std::string>& prompt_topic_terms) {
  const std::string text = normalize_for_matching(response_text);
  auto matches = [&](AuditLabelValue label) {
    const auto& phrases = patterns.phrases(label);
    return std::any_of(phrases.begin(), phrases.end(),
                       [&](const std::string& phrase) { return contains_phrase(text, phrase); });
  };

  std::set<AuditLabelValue> labels;
  for (auto label : kGuardrailLabels) {
    if (matches(label)) labels.insert(label);
  }
  if (!labels.empty()) return labels;

  bool topic_recurs = std::any_of(prompt_topic_terms.begin(), prompt_topic_terms.end(),
                                  [&](const std::string& term) {
                                    std::string phrase = term;
                                    std::replace(phrase.begin(), phrase.end(), '_', ' ');
                                    return contains_phrase(text, normalize_for_matching(phrase));
                                  });
  labels.insert(matches(AuditLabelValue::kPromotion) || topic_recurs
                    ? AuditLabelValue::kPromotion
                    : AuditLabelValue::kComplianceOther);
  return labels;
}

std::set<std::string> prompt_topic_terms(const Post& prompt, const Pipeline& pipeline) {
  std::set<std::string> entities;
  std::set<std::string> nouns;
  for (const auto& token : pipeline.analyze(prompt.text)) {
    if (token.kind == TokenKind::kEntityCandidate) entities.insert(token.lemma);
    if (token.kind == TokenKind::kNounCandidate) nouns.insert(token.lemma);
  }
  return entities.empty() ? nouns : entities;
}

std::set<AuditLabelValue> effective_labels(std::span<const AuditLabel> labels) {
  std::set<AuditLabelValue> manual;
  std::set<AuditLabelValue> heuristic;
  for (const auto& label : labels) {
    (label.origin == LabelOrigin::kManual ? manual : heuristic).insert(label.value);
  }
  return manual.empty() ? heuristic : manual;
}

void apply_heuristics(PromptResponsePair& pair, const PatternTable& patterns,
                      const Pipeline& pipeline) {
  auto found = heuristic_classify(pair.response.text, patterns,
                                  prompt_topic_terms(pair.prompt, pipeline));
  std::erase_if(pair.labels, [](const AuditLabel& l) { return l.origin == LabelOrigin::kHeuristic; });
  for (auto value : found) pair.labels.push_back({value, LabelOrigin::kHeuristic});
}

std::vector<PromptResponsePair> sample_prompts_by_terms(std::span<const PromptResponsePair> pairs,
                                                        const std::set<std::string>& terms,
                                                        std::size_t n, const Pipeline& pipeline,
                                                        std::uint64_t seed) {
  if (n == 0) return {};
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto tokens = pipeline.analyze(pairs[i].prompt.text);
    bool hit = std::any_of(tokens.begin(), tokens.end(),
                           [&](const Token& t) { return terms.contains(t.lemma); });
    if (hit) candidates.push_back(i);
  }
  if (candidates.size() < n) {
    throw DomainError("only " + std::to_string(candidates.size()) +
                      " prompts match the requested terms, " + std::to_string(n) + " requested");
  }
  // Partial Fisher-Yates on raw engine output; std distributions are
  // implementation-defined and would make samples differ across toolchains.
  std::mt19937_64 rng(seed);
  auto bounded = [&](std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    return x % bound;
  };
  std::vector<PromptResponsePair> sample;
  sample.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
    sample.push_back(pairs[candidates[i]]);
  }
  return sample;
}

// ---- tallies ------------------------------------------------------------

std::int64_t TallyReport::count(AuditLabelValue label) const {
  auto it = counts.find(label);
  return it == counts.end() ? 0 : it->second;
}

TallyReport tally(std::span<const PromptResponsePair> pairs, std::string_view bot_name) {
  TallyReport report;
  report.bot_name = std::string(bot_name);
  for (auto label : kAllAuditLabels) report.counts[label] = 0;
  std::vector<std::string> unlabeled;
  for (const auto& pair : pairs) {
    if (pair.bot_name != bot_name) continue;
    auto labels = effective_labels(pair.labels);
    if (labels.empty()) {
      unlabeled.push_back(pair_id(pair));
      continue;
    }
    report.denominator += 1;
    for (auto label : labels) report.counts[label] += 1;
  }
  if (!unlabeled.empty()) {
    std::string ids;
    for (const auto& id : unlabeled) ids += (ids.empty() ? "" : ", ") + id;
    throw ValidationError("unlabeled pairs: " + ids);
  }
  report.sample_description = std::to_string(report.denominator) + " prompt/response pairs answered by " +
                              report.bot_name;
  return report;
}

std::string tally_to_csv(const TallyReport& report) {
  std::ostringstream out;
  out << "bot,label,count,denominator\n";
  for (auto label : kAllAuditLabels) {
    out << report.bot_name << ',' << to_string(label) << ',' << report.count(label) << ','
        << report.denominator << '\n';
  }
  return out.str();
}

// ---- labeled-pair files -------------------------------------------------

LabeledPairRecord parse_labeled_pair(std::string_view line, std::size_t line_number) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_number, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError(line_number, "record is not a JSON object");
  auto text = [&](const char* name) {
    auto it = doc.find(name);
    if (it == doc.end() || !it->is_string()) {
      throw ValidationError(line_number, std::string("missing string field '") + name + "'");
    }
    return it->get<std::string>();
  };
  LabeledPairRecord record;
  record.prompt_id = text("prompt_id");
  record.response_id = text("response_id");
  record.bot = text("bot");
  auto labels = doc.find("labels");
  if (labels == doc.end() || !labels->is_array()) {
    throw ValidationError(line_number, "missing array field 'labels'");
  }
  for (const auto& entry : *labels) {
    auto value = entry.is_string() ? parse_audit_label(entry.get<std::string>()) : std::nullopt;
    if (!value) throw ValidationError(line_number, "unknown audit label " + entry.dump());
    if (std::find(record.labels.begin(), record.labels.end(), *value) == record.labels.end()) {
      record.labels.push_back(*value);
    }
  }
  if (auto it = doc.find("origin"); it != doc.end()) {
    auto origin = it->is_string() ? parse_label_origin(it->get<std::string>()) : std::nullopt;
    if (!origin) throw ValidationError(line_number, "origin must be 'heuristic' or 'manual'");
    record.origin = *origin;
  }
  return record;
}

std::string serialize_labeled_pair(const LabeledPairRecord& record) {
  json labels = json::array();
  for (auto label : record.labels) labels.push_back(to_string(label));
  return json{{"prompt_id", record.prompt_id},
              {"response_id", record.response_id},
              {"bot", record.bot},
              {"labels", labels},
              {"origin", to_string(record.origin)}}
      .dump();
}

std::vector<LabeledPairRecord> load_labeled_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<LabeledPairRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(parse_labeled_pair(line, line_number));
  }
  return records;
}

std::vector<PromptResponsePair> pairs_from_records(std::span<const LabeledPairRecord> records) {
  std::vector<PromptResponsePair> pairs;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
  for (const auto& record : records) {
    auto key = std::make_tuple(record.prompt_id, record.response_id, record.bot);
    auto [it, inserted] = index.try_emplace(key, pairs.size());
    if (inserted) {
      PromptResponsePair pair;
      pair.prompt.id = record.prompt_id;
      pair.prompt.kind = PostKind::kPrompt;
      pair.response.id = record.response_id;
      pair.response.kind = PostKind::kBotResponse;
      pair.response.reply_to = record.prompt_id;
      pair.response.bot = record.bot;
      pair.bot_name = record.bot;
      pairs.push_back(std::move(pair));
    }
    auto& labels = pairs[it->second].labels;
    for (auto value : record.labels) labels.push_back({value, record.origin});
  }
  return pairs;
}

}  // namespace ctrkit
