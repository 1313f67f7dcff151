#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace ctrkit {

enum class AuditLabelValue {
  kRefusal,
  kWarning,
  kCorrection,
  kDebunkOrConcern,
  kPromotion,
  kComplianceOther,
};

enum class LabelOrigin { kHeuristic, kManual };

inline constexpr std::array<AuditLabelValue, 6> kAllAuditLabels = {
    AuditLabelValue::kRefusal,         AuditLabelValue::kWarning,
    AuditLabelValue::kCorrection,      AuditLabelValue::kDebunkOrConcern,
    AuditLabelValue::kPromotion,       AuditLabelValue::kComplianceOther,
};

struct AuditLabel {
  AuditLabelValue value;
  LabelOrigin origin;

  friend auto operator<=>(const AuditLabel&, const AuditLabel&) = default;
};

/// Upper-case wire name, e.g. "DEBUNK_OR_CONCERN".
std::string_view to_string(AuditLabelValue value);
std::optional<AuditLabelValue> parse_audit_label(std::string_view name);

std::string_view to_string(LabelOrigin origin);
std::optional<LabelOrigin> parse_label_origin(std::string_view name);

}  // namespace ctrkit
