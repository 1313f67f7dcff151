#pragma once

#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctrkit/audit_label.hpp"
#include "ctrkit/corpus.hpp"
#include "ctrkit/preprocess.hpp"

namespace ctrkit {

/// Case-insensitive trigger phrases per label. No phrase is empty and the
/// REFUSAL and PROMOTION lists never share a phrase.
class PatternTable {
 public:
  PatternTable() = default;

  /// Throws ValidationError on an empty phrase or a REFUSAL/PROMOTION overlap.
  void set(AuditLabelValue label, std::vector<std::string> phrases);
  const std::vector<std::string>& phrases(AuditLabelValue label) const;
  bool empty() const;

  /// Reads `<label>.txt` files (refusal.txt, warning.txt, correction.txt,
  /// debunk_or_concern.txt, promotion.txt) from a directory; missing files
  /// leave that label without phrases.
  static PatternTable load_directory(const std::filesystem::path& dir);
  static const PatternTable& defaults();

  static std::string file_name(AuditLabelValue label);

 private:
  std::map<AuditLabelValue, std::vector<std::string>> phrases_;
};

/// Lowercases, folds typographic quotes to ASCII and collapses whitespace.
std::string normalize_for_matching(std::string_view text);

/// Labels a bot response. Each of REFUSAL, WARNING, CORRECTION and
/// DEBUNK_OR_CONCERN whose table has a matching phrase contributes its label.
/// When none matched, the response is PROMOTION if a promotion phrase matches
/// or one of `prompt_topic_terms` recurs in it, otherwise COMPLIANCE_OTHER.
std::set<AuditLabelValue> heuristic_classify(std::string_view response_text,
                                             const PatternTable& patterns,
                                             const std::set<std::string>& prompt_topic_terms = {});

/// Entity lemmas of a prompt, used as its topic terms.
std::set<std::string> prompt_topic_terms(const Post& prompt, const Pipeline& pipeline);

/// Manual labels, when any exist for a pair, replace its heuristic labels.
std::set<AuditLabelValue> effective_labels(std::span<const AuditLabel> labels);

/// Runs the classifier and records the result as heuristic labels. Manual
/// labels on the pair are left untouched.
void apply_heuristics(PromptResponsePair& pair, const PatternTable& patterns,
                      const Pipeline& pipeline);

/// Deterministic sample of `n` pairs whose prompt carries at least one of
/// `terms` among its token lemmas. Throws DomainError reporting the number of
/// matches when fewer than `n` exist.
std::vector<PromptResponsePair> sample_prompts_by_terms(std::span<const PromptResponsePair> pairs,
                                                        const std::set<std::string>& terms,
                                                        std::size_t n, const Pipeline& pipeline,
                                                        std::uint64_t seed = 20231220);

struct TallyReport {
  std::string bot_name;
  std::int64_t denominator = 0;
  std::map<AuditLabelValue, std::int64_t> counts;
  std::string sample_description;

  std::int64_t count(AuditLabelValue label) const;
};

/// Per-label counts over the pairs answered by `bot_name`. Throws
/// ValidationError listing the ids of pairs without any label.
TallyReport tally(std::span<const PromptResponsePair> pairs, std::string_view bot_name);

/// `bot,label,count,denominator`, one row per label.
std::string tally_to_csv(const TallyReport& report);

/// One line of the labeled-pair file.
struct LabeledPairRecord {
  std::string prompt_id;
  std::string response_id;
  std::string bot;
  std::vector<AuditLabelValue> labels;
  LabelOrigin origin = LabelOrigin::kManual;
};

/// `{prompt_id,response_id,bot,labels:[...],origin}`.
LabeledPairRecord parse_labeled_pair(std::string_view line, std::size_t line_number = 1);
std::string serialize_labeled_pair(const LabeledPairRecord& record);
std::vector<LabeledPairRecord> load_labeled_pairs(const std::filesystem::path& path);

/// Builds label-only pairs (empty prompt/response text) from labeled records,
/// enough for tallying a shipped sample.
std::vector<PromptResponsePair> pairs_from_records(std::span<const LabeledPairRecord> records);

}  // namespace ctrkit
