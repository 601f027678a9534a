#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ovm {

/// 1-based position of a lexeme in DSL source text.
struct SourceSpan {
  int line = 1;
  int column = 1;
  int length = 0;

  bool operator==(const SourceSpan&) const = default;
};

enum class Severity { error, warning };

struct Diagnostic {
  std::string code;
  Severity severity = Severity::error;
  std::string message;
  std::vector<std::string> subject;
  std::optional<SourceSpan> location;

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

// Published code catalog. These strings are part of the external interface.
namespace codes {
inline constexpr std::string_view vp_without_variants = "OVM001";
inline constexpr std::string_view dangling_reference = "OVM002";
inline constexpr std::string_view bad_cardinality = "OVM003";
inline constexpr std::string_view duplicate_id = "OVM004";
inline constexpr std::string_view self_constraint = "OVM005";
inline constexpr std::string_view variant_unreferenced = "OVM006";
inline constexpr std::string_view empty_guard = "OVM007";
inline constexpr std::string_view duplicate_edge = "OVM008";

inline constexpr std::string_view binding_cardinality = "DER001";
inline constexpr std::string_view contradiction = "DER002";
inline constexpr std::string_view group_void = "DER003";
inline constexpr std::string_view unbound_internal_vp = "DER004";

inline constexpr std::string_view missing_mandatory = "CFG001";
inline constexpr std::string_view cardinality_violation = "CFG002";
inline constexpr std::string_view constraint_violation = "CFG003";
inline constexpr std::string_view unknown_selection = "CFG004";

inline constexpr std::string_view void_model = "SES001";
inline constexpr std::string_view locked_variant = "SES002";
inline constexpr std::string_view unknown_pair = "SES003";
inline constexpr std::string_view retract_of_forced = "SES004";

inline constexpr std::string_view unknown_vp = "WF001";
inline constexpr std::string_view region_variant_mismatch = "WF002";
inline constexpr std::string_view unreachable_node = "WF003";
inline constexpr std::string_view missing_initial_or_final = "WF004";
inline constexpr std::string_view dangling_region = "WF005";
inline constexpr std::string_view trace_mismatch = "WF006";
inline constexpr std::string_view config_model_mismatch = "WF007";
}  // namespace codes

Diagnostic make_error(std::string_view code, std::string message,
                      std::vector<std::string> subject = {});
Diagnostic make_warning(std::string_view code, std::string message,
                        std::vector<std::string> subject = {});

bool has_errors(const Diagnostics& diagnostics);
bool has_code(const Diagnostics& diagnostics, std::string_view code);

std::string_view to_string(Severity severity);
std::ostream& operator<<(std::ostream& os, const Diagnostic& diagnostic);

}  // namespace ovm
