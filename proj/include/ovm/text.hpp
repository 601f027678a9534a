#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ovm/model.hpp"
#include "ovm/result.hpp"

namespace ovm::text {

/// A lexical or syntactic error. `found` is the verbatim offending lexeme,
/// or "end of input".
struct ParseError {
  SourceSpan span;
  std::string expected;
  std::string found;

  bool operator==(const ParseError&) const = default;
};

using ParseErrors = std::vector<ParseError>;

std::string format(const ParseError& error);

/// Positions of declarations in the parsed text, used to attach locations to
/// structural diagnostics.
struct SourceMap {
  std::map<std::string, SourceSpan, std::less<>> ids;  // VP ids and first variant mentions
  std::vector<SourceSpan> constraints;                 // parallel to model.constraints
};

struct ParsedModel {
  VariabilityModel model;
  SourceMap source_map;
};

/// Parses DSL source. Only syntax is checked; run `well_formed` on the result
/// for structural diagnostics. Recovery resumes at the next declaration, so
/// every syntax error in the text is reported.
Expected<VariabilityModel, ParseErrors> parse(std::string_view source);
Expected<ParsedModel, ParseErrors> parse_with_source_map(std::string_view source);

/// Fills in `location` for diagnostics whose first subject has a known span.
void attach_locations(Diagnostics& diagnostics, const SourceMap& source_map);

class SerializeError : public std::runtime_error {
 public:
  SerializeError(const std::string& what, Diagnostics diagnostics)
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}
  const Diagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  Diagnostics diagnostics_;
};

/// Canonical text: the `model` header, then one declaration per line indented
/// by two spaces, in declaration order. Throws SerializeError for models that
/// are not well formed, have an empty name, or use ids the grammar cannot spell.
///
/// The grammar carries no display names, descriptions or Selected flags, and
/// parsing declares variants in first-mention order; round trips are exact for
/// models already in that form.
std::string serialize(const VariabilityModel& model);

/// `[A-Za-z_][A-Za-z0-9_]*` and not a reserved word.
bool is_identifier(std::string_view text);
bool is_reserved(std::string_view text);

}  // namespace ovm::text
