#include "ctrkit/signatures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ctrkit/errors.hpp"

namespace ctrkit {

namespace {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted.push_back('"');
    quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

bool matches(TermKindFilter filter, TokenKind kind) {
  switch (filter) {
    case TermKindFilter::kNoun: return kind == TokenKind::kNounCandidate;
    case TermKindFilter::kEntity: return kind == TokenKind::kEntityCandidate;
    case TermKindFilter::kAny: return true;
  }
  return false;
}

}  // namespace

void FrequencyTable::add(std::string_view term, std::int64_t count) {
  if (count < 0) throw DomainError("negative frequency for '" + std::string(term) + "'");
  if (count == 0) return;
  auto it = counts_.find(term);
  if (it == counts_.end()) {
    counts_.emplace(std::string(term), count);
  } else {
    it->second += count;
  }
  total_ += count;
}

void FrequencyTable::merge(const FrequencyTable& other) {
  for (const auto& [term, count] : other.counts_) add(term, count);
}

void FrequencyTable::subtract(const FrequencyTable& other) {
  for (const auto& [term, count] : other.counts_) {
    auto it = counts_.find(term);
    if (it == counts_.end() || it->second < count) {
      throw DomainError("cannot subtract '" + term + "': count would go negative");
    }
  }
  for (const auto& [term, count] : other.counts_) {
    auto it = counts_.find(term);
    it->second -= count;
    total_ -= count;
    if (it->second == 0) counts_.erase(it);
  }
}

std::int64_t FrequencyTable::count(std::string_view term) const {
  auto it = counts_.find(term);
  return it == counts_.end() ? 0 : it->second;
}

FrequencyTable build_frequency_table(std::span<const Token> tokens, const KindFilter& kinds,
                                     std::string slice_tag) {
  FrequencyTable table(std::move(slice_tag));
  for (const auto& token : tokens) {
    if (kinds.contains(token.kind)) table.add(token.lemma);
  }
  return table;
}

double log_ratio_value(std::int64_t f_target, std::int64_t n_target, std::int64_t f_reference,
                       std::int64_t n_reference) {
  if (n_target <= 0 || n_reference <= 0) throw DomainError("log ratio needs non-empty corpora");
  // Relative-frequency ratio as an exact fraction num/den of integers (counts
  // doubled so the 0.5 substitute stays integral):
  //   (f_t / N_t) / (f_r / N_r) = (2 f_t * N_r) / (2 f_r * N_t)
  // Equal fractions therefore give bit-identical results.
  __int128 twice_t = f_target > 0 ? 2 * static_cast<__int128>(f_target) : 1;
  __int128 twice_r = f_reference > 0 ? 2 * static_cast<__int128>(f_reference) : 1;
  __int128 num = twice_t * n_reference;
  __int128 den = twice_r * n_target;
  if (num == den) return 0.0;
  // Near 1 the quotient loses relative precision; log1p of the exact
  // difference keeps it.
  if (num < 2 * den && den < 2 * num) {
    return std::log1p(static_cast<double>(num - den) / static_cast<double>(den)) /
           std::numbers::ln2;
  }
  return std::log2(static_cast<double>(num) / static_cast<double>(den));
}

std::vector<KeynessResult> log_ratio(const FrequencyTable& target, const FrequencyTable& reference,
                                     std::int64_t min_freq) {
  if (target.empty() || reference.empty()) {
    throw DomainError("keyness needs non-empty target and reference tables");
  }
  if (min_freq < 0) throw DomainError("min_freq must be non-negative");

  std::vector<KeynessResult> results;
  auto score = [&](const std::string& term, std::int64_t f_t) {
    KeynessResult r;
    r.term = term;
    r.f_target = f_t;
    r.n_target = target.total();
    r.f_reference = reference.count(term);
    r.n_reference = reference.total();
    r.smoothed = r.f_target == 0 || r.f_reference == 0;
    r.log_ratio = log_ratio_value(r.f_target, r.n_target, r.f_reference, r.n_reference);
    results.push_back(std::move(r));
  };
  for (const auto& [term, count] : target.counts()) {
    if (count >= min_freq) score(term, count);
  }
  if (min_freq == 0) {
    for (const auto& [term, count] : reference.counts()) {
      if (target.count(term) == 0) score(term, 0);
    }
  }
  std::sort(results.begin(), results.end(), [](const KeynessResult& a, const KeynessResult& b) {
    if (a.log_ratio != b.log_ratio) return a.log_ratio > b.log_ratio;
    if (a.f_target != b.f_target) return a.f_target > b.f_target;
    return a.term < b.term;
  });
  return results;
}

std::vector<KeynessResult> top_n_keyness(const FrequencyTable& target,
                                         const FrequencyTable& reference, std::size_t n,
                                         std::int64_t min_freq) {
  auto results = log_ratio(target, reference, min_freq);
  if (results.size() > n) results.resize(n);
  return results;
}

FrequencyTable rest_of_corpus(const FrequencyTable& all, const FrequencyTable& slice) {
  FrequencyTable rest = all;
  rest.subtract(slice);
  rest.set_slice_tag("rest:" + slice.slice_tag());
  return rest;
}

std::string_view to_string(TermKindFilter filter) {
  switch (filter) {
    case TermKindFilter::kNoun: return "noun";
    case TermKindFilter::kEntity: return "entity";
    case TermKindFilter::kAny: return "any";
  }
  return "any";
}

std::optional<TermKindFilter> parse_term_kind(std::string_view name) {
  if (name == "noun") return TermKindFilter::kNoun;
  if (name == "entity") return TermKindFilter::kEntity;
  if (name == "any") return TermKindFilter::kAny;
  return std::nullopt;
}

std::vector<TfidfResult> tfidf_rank(std::span<const std::vector<Token>> documents,
                                    TermKindFilter kind, std::size_t n) {
  if (documents.empty()) throw DomainError("TF-IDF needs at least one document");

  struct Stats {
    std::int64_t tf_total = 0;
    std::int64_t df = 0;
  };
  std::unordered_map<std::string, Stats> stats;
  std::unordered_set<std::string_view> seen_in_doc;
  for (const auto& doc : documents) {
    seen_in_doc.clear();
    for (const auto& token : doc) {
      if (!matches(kind, token.kind)) continue;
      auto [it, inserted] = stats.try_emplace(token.lemma);
      it->second.tf_total += 1;
      if (seen_in_doc.insert(it->first).second) it->second.df += 1;
    }
  }

  const double doc_count = static_cast<double>(documents.size());
  std::vector<TfidfResult> results;
  results.reserve(stats.size());
  for (const auto& [term, s] : stats) {
    TfidfResult r;
    r.term = term;
    r.df = s.df;
    r.tf_total = s.tf_total;
    r.term_kind = kind;
    // Summing tf * idf over documents equals tf_total * idf, since idf is
    // constant per term.
    r.score = s.df == static_cast<std::int64_t>(documents.size())
                  ? 0.0
                  : static_cast<double>(s.tf_total) * std::log(doc_count / static_cast<double>(s.df));
    results.push_back(std::move(r));
  }
  auto order = [](const TfidfResult& a, const TfidfResult& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.df != b.df) return a.df > b.df;
    return a.term < b.term;
  };
  if (results.size() > n) {
    std::partial_sort(results.begin(), results.begin() + static_cast<std::ptrdiff_t>(n),
                      results.end(), order);
    results.resize(n);
  } else {
    std::sort(results.begin(), results.end(), order);
  }
  return results;
}

std::string keyness_to_csv(std::span<const KeynessResult> results) {
  std::ostringstream out;
  out << "term,score,f_target,f_reference,smoothed\n";
  for (const auto& r : results) {
    out << csv_field(r.term) << ',' << format_double(r.log_ratio) << ',' << r.f_target << ','
        << r.f_reference << ',' << (r.smoothed ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string tfidf_to_csv(std::span<const TfidfResult> results) {
  std::ostringstream out;
  out << "term,score,df,tf_total,kind\n";
  for (const auto& r : results) {
    out << csv_field(r.term) << ',' << format_double(r.score) << ',' << r.df << ',' << r.tf_total
        << ',' << to_string(r.term_kind) << '\n';
  }
  return out.str();
}

}  // namespace ctrkit
