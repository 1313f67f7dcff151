#include "ctrkit/audit_label.hpp"

namespace ctrkit {

std::string_view to_string(AuditLabelValue value) {
  switch (value) {
    case AuditLabelValue::kRefusal: return "REFUSAL";
    case AuditLabelValue::kWarning: return "WARNING";
    case AuditLabelValue::kCorrection: return "CORRECTION";
    case AuditLabelValue::kDebunkOrConcern: return "DEBUNK_OR_CONCERN";
    case AuditLabelValue::kPromotion: return "PROMOTION";
    case AuditLabelValue::kComplianceOther: return "COMPLIANCE_OTHER";
  }
  return "COMPLIANCE_OTHER";
}

std::optional<AuditLabelValue> parse_audit_label(std::string_view name) {
  for (auto label : kAllAuditLabels) {
    if (to_string(label) == name) return label;
  }
  return std::nullopt;
}

std::string_view to_string(LabelOrigin origin) {
  return origin == LabelOrigin::kManual ? "manual" : "heuristic";
}

std::optional<LabelOrigin> parse_label_origin(std::string_view name) {
  if (name == "manual") return LabelOrigin::kManual;
  if (name == "heuristic") return LabelOrigin::kHeuristic;
  return std::nullopt;
}

}  // namespace ctrkit
