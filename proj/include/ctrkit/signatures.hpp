#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctrkit/preprocess.hpp"

namespace ctrkit {

/// Lemma counts for one corpus slice. `total` always equals the sum of counts
/// and no zero-count entry is stored.
class FrequencyTable {
 public:
  FrequencyTable() = default;
  explicit FrequencyTable(std::string slice_tag) : slice_tag_(std::move(slice_tag)) {}

  void add(std::string_view term, std::int64_t count = 1);
  /// Associative and commutative; the slice tag of *this is kept.
  void merge(const FrequencyTable& other);
  /// Removes `other`'s counts. Throws DomainError if any count would go negative.
  void subtract(const FrequencyTable& other);

  std::int64_t count(std::string_view term) const;
  std::int64_t total() const { return total_; }
  std::size_t vocabulary_size() const { return counts_.size(); }
  bool empty() const { return total_ == 0; }
  const std::map<std::string, std::int64_t, std::less<>>& counts() const { return counts_; }
  const std::string& slice_tag() const { return slice_tag_; }
  void set_slice_tag(std::string tag) { slice_tag_ = std::move(tag); }

  friend bool operator==(const FrequencyTable& a, const FrequencyTable& b) {
    return a.total_ == b.total_ && a.counts_ == b.counts_;
  }

 private:
  std::map<std::string, std::int64_t, std::less<>> counts_;
  std::int64_t total_ = 0;
  std::string slice_tag_;
};

using KindFilter = std::set<TokenKind>;

FrequencyTable build_frequency_table(std::span<const Token> tokens, const KindFilter& kinds,
                                     std::string slice_tag = {});

struct KeynessResult {
  std::string term;
  /// Binary log of the ratio of relative frequencies (bits).
  double log_ratio = 0.0;
  std::int64_t f_target = 0;
  std::int64_t n_target = 0;
  std::int64_t f_reference = 0;
  std::int64_t n_reference = 0;
  /// A zero raw frequency was replaced by 0.5.
  bool smoothed = false;
};

inline constexpr double kZeroFrequencySubstitute = 0.5;
inline constexpr std::int64_t kDefaultMinFreq = 5;

/// Log Ratio keyness of every target term with f_target >= min_freq (with
/// min_freq == 0, reference-only terms are scored too). Sorted by LR
/// descending, then f_target descending, then term.
std::vector<KeynessResult> log_ratio(const FrequencyTable& target, const FrequencyTable& reference,
                                     std::int64_t min_freq = kDefaultMinFreq);

/// Log Ratio of a single term from raw counts (0 counts smoothed).
double log_ratio_value(std::int64_t f_target, std::int64_t n_target, std::int64_t f_reference,
                       std::int64_t n_reference);

std::vector<KeynessResult> top_n_keyness(const FrequencyTable& target,
                                         const FrequencyTable& reference, std::size_t n,
                                         std::int64_t min_freq = kDefaultMinFreq);

/// Table of `all` with `slice` removed: the "rest of the corpus" reference.
FrequencyTable rest_of_corpus(const FrequencyTable& all, const FrequencyTable& slice);

enum class TermKindFilter { kNoun, kEntity, kAny };

std::string_view to_string(TermKindFilter filter);
std::optional<TermKindFilter> parse_term_kind(std::string_view name);

struct TfidfResult {
  std::string term;
  double score = 0.0;
  std::int64_t df = 0;
  std::int64_t tf_total = 0;
  TermKindFilter term_kind = TermKindFilter::kAny;
};

/// Corpus TF-IDF: score(t) = sum over documents of tf(t, d) * ln(D / df(t)).
/// Top n by score, then df descending, then term. Throws DomainError for
/// an empty document list.
std::vector<TfidfResult> tfidf_rank(std::span<const std::vector<Token>> documents,
                                    TermKindFilter kind, std::size_t n);

/// `term,score,f_target,f_reference,smoothed` with a header row.
std::string keyness_to_csv(std::span<const KeynessResult> results);
std::string tfidf_to_csv(std::span<const TfidfResult> results);

}  // namespace ctrkit
