#include "ovm/diagnostic.hpp"

#include <algorithm>

namespace ovm {

Diagnostic make_error(std::string_view code, std::string message, std::vector<std::string> subject) {
  return Diagnostic{std::string(code), Severity::error, std::move(message), std::move(subject), std::nullopt};
}

Diagnostic make_warning(std::string_view code, std::string message, std::vector<std::string> subject) {
  return Diagnostic{std::string(code), Severity::warning, std::move(message), std::move(subject), std::nullopt};
}

bool has_errors(const Diagnostics& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

bool has_code(const Diagnostics& diagnostics, std::string_view code) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [code](const Diagnostic& d) { return d.code == code; });
}

std::string_view to_string(Severity severity) {
  return severity == Severity::error ? "error" : "warning";
}

std::ostream& operator<<(std::ostream& os, const Diagnostic& d) {
  if (d.location) os << d.location->line << ':' << d.location->column << ": ";
  os << to_string(d.severity) << ' ' << d.code << ": " << d.message;
  return os;
}

}  // namespace ovm
