#include "ovm/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace ovm::text {

namespace {

constexpr std::array<std::string_view, 13> kReserved = {
    "model",     "vp",       "cp",  "layer", "process",  "service",  "component",
    "mandatory", "optional", "alt", "when",  "requires", "excludes"};

enum class Tok { ident, string, integer, lbrace, rbrace, lbracket, rbracket, dotdot, semicolon, invalid, end };

struct Token {
  Tok kind = Tok::end;
  std::string lexeme;  // verbatim source text
  std::string value;   // unescaped string contents for Tok::string
  SourceSpan span;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run(ParseErrors& errors) {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token t = next(errors);
      const bool done = t.kind == Tok::end;
      out.push_back(std::move(t));
      if (done) break;
    }
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }
  bool at_end() const { return pos_ >= src_.size(); }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (!at_end()) {
      char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Token make(Tok kind, std::size_t start, int line, int col) const {
    Token t;
    t.kind = kind;
    t.lexeme = std::string(src_.substr(start, pos_ - start));
    t.span = SourceSpan{line, col, static_cast<int>(pos_ - start)};
    return t;
  }

  Token next(ParseErrors& errors) {
    const std::size_t start = pos_;
    const int line = line_;
    const int col = col_;
    if (at_end()) {
      Token t;
      t.kind = Tok::end;
      t.lexeme = "end of input";
      t.span = end_span();
      return t;
    }
    const char c = peek();
    if (ident_start(c)) {
      while (!at_end() && ident_char(peek())) advance();
      return make(Tok::ident, start, line, col);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
      return make(Tok::integer, start, line, col);
    }
    if (c == '"') return string_literal(errors, start, line, col);
    if (c == '.' && peek(1) == '.') {
      advance();
      advance();
      return make(Tok::dotdot, start, line, col);
    }
    Tok kind = Tok::invalid;
    switch (c) {
      case '{': kind = Tok::lbrace; break;
      case '}': kind = Tok::rbrace; break;
      case '[': kind = Tok::lbracket; break;
      case ']': kind = Tok::rbracket; break;
      case ';': kind = Tok::semicolon; break;
      default: break;
    }
    advance();
    // Keep multi-byte UTF-8 sequences together so `found` stays verbatim.
    if (kind == Tok::invalid)
      while (!at_end() && (static_cast<unsigned char>(peek()) & 0xC0) == 0x80) advance();
    Token t = make(kind, start, line, col);
    if (kind == Tok::invalid) errors.push_back(ParseError{t.span, "token", t.lexeme});
    return t;
  }

  Token string_literal(ParseErrors& errors, std::size_t start, int line, int col) {
    advance();  // opening quote
    std::string value;
    while (!at_end() && peek() != '"' && peek() != '\n') {
      char c = peek();
      if (c == '\\') {
        advance();
        if (at_end()) break;
        char e = peek();
        switch (e) {
          case 'n': value.push_back('\n'); break;
          case 't': value.push_back('\t'); break;
          case '"': value.push_back('"'); break;
          case '\\': value.push_back('\\'); break;
          default:
            value.push_back('\\');
            value.push_back(e);
            break;
        }
        advance();
        continue;
      }
      value.push_back(c);
      advance();
    }
    if (at_end() || peek() != '"') {
      Token t = make(Tok::invalid, start, line, col);
      errors.push_back(ParseError{t.span, "closing '\"'", t.lexeme});
      return t;
    }
    advance();  // closing quote
    Token t = make(Tok::string, start, line, col);
    t.value = std::move(value);
    return t;
  }

  SourceSpan end_span() const {
    // Points at the last character of the input so spans stay inside the text.
    if (src_.empty()) return SourceSpan{1, 1, 0};
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i + 1 < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return SourceSpan{line, col, 0};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, ParseErrors& errors) : toks_(std::move(tokens)), errors_(errors) {}

  ParsedModel run() {
    ParsedModel out;
    model_ = &out.model;
    map_ = &out.source_map;

    if (is_keyword("model")) {
      bump();
      if (cur().kind == Tok::string) {
        model_->name = cur().value;
        bump();
      } else {
        fail("string");
      }
    } else {
      fail("model");
    }

    while (cur().kind != Tok::end) {
      const std::size_t before = errors_.size();
      declaration();
      if (errors_.size() != before) recover();
    }
    canonicalize_variants(*model_);
    return out;
  }

 private:
  struct Abort {};

  const Token& cur() const { return toks_[pos_]; }
  void bump() {
    if (cur().kind == Tok::lbrace) ++depth_;
    if (cur().kind == Tok::rbrace) --depth_;
    if (cur().kind != Tok::end) ++pos_;
  }
  bool is_keyword(std::string_view kw) const { return cur().kind == Tok::ident && cur().lexeme == kw; }

  void fail(std::string expected) { errors_.push_back(ParseError{cur().span, std::move(expected), cur().lexeme}); }

  [[noreturn]] void abort(std::string expected) {
    fail(std::move(expected));
    throw Abort{};
  }

  void expect(Tok kind, std::string_view what) {
    if (cur().kind != kind) abort(std::string(what));
    bump();
  }

  void expect_keyword(std::string_view kw) {
    if (!is_keyword(kw)) abort(std::string(kw));
    bump();
  }

  std::string identifier() {
    if (cur().kind != Tok::ident || is_reserved(cur().lexeme)) abort("identifier");
    std::string id = cur().lexeme;
    bump();
    return id;
  }

  int integer() {
    if (cur().kind != Tok::integer || cur().lexeme.size() > 9) abort("integer");
    int v = std::stoi(cur().lexeme);
    bump();
    return v;
  }

  void declaration() {
    depth_ = 0;
    try {
      if (is_keyword("vp") || is_keyword("cp")) {
        vp_declaration();
      } else if (cur().kind == Tok::ident && !is_reserved(cur().lexeme)) {
        constraint();
      } else {
        abort("vp|cp|identifier");
      }
    } catch (const Abort&) {
    }
  }

  void vp_declaration() {
    VariationPoint vp;
    vp.visibility = is_keyword("cp") ? Visibility::external : Visibility::internal;
    bump();
    const SourceSpan id_span = cur().span;
    vp.id = identifier();
    expect_keyword("layer");
    if (cur().kind != Tok::ident) abort("process|service|component");
    auto layer = parse_layer(cur().lexeme);
    if (!layer) abort("process|service|component");
    vp.layer = *layer;
    bump();
    expect(Tok::lbrace, "'{'");
    std::vector<std::pair<std::string, SourceSpan>> mentions;
    while (is_keyword("mandatory") || is_keyword("optional")) {
      const bool mandatory = is_keyword("mandatory");
      bump();
      VariantEdge edge = member(mentions);
      edge.kind = mandatory ? EdgeKind::mandatory : EdgeKind::optional;
      (mandatory ? vp.mandatory_edges : vp.optional_edges).push_back(std::move(edge));
    }
    if (is_keyword("alt")) {
      bump();
      AlternativeGroup group;
      expect(Tok::lbracket, "'['");
      group.min = integer();
      expect(Tok::dotdot, "'..'");
      group.max = integer();
      expect(Tok::rbracket, "']'");
      expect(Tok::lbrace, "'{'");
      do {
        group.members.push_back(member(mentions));
      } while (cur().kind != Tok::rbrace);
      bump();
      vp.group = std::move(group);
    }
    if (cur().kind != Tok::rbrace) abort(vp.group ? "'}'" : "mandatory|optional|alt|'}'");
    bump();

    map_->ids.emplace(vp.id, id_span);
    for (auto& [id, span] : mentions) map_->ids.emplace(id, span);
    model_->vps.push_back(std::move(vp));
  }

  VariantEdge member(std::vector<std::pair<std::string, SourceSpan>>& mentions) {
    VariantEdge edge;
    const SourceSpan span = cur().span;
    edge.variant_id = identifier();
    mentions.emplace_back(edge.variant_id, span);
    if (is_keyword("when")) {
      bump();
      if (cur().kind != Tok::string) abort("string");
      edge.guard = cur().value;
      bump();
    }
    expect(Tok::semicolon, "';'");
    return edge;
  }

  void constraint() {
    Constraint c;
    const SourceSpan span = cur().span;
    c.source = identifier();
    if (is_keyword("requires")) {
      c.kind = ConstraintKind::require;
    } else if (is_keyword("excludes")) {
      c.kind = ConstraintKind::exclude;
    } else {
      abort("requires|excludes");
    }
    bump();
    c.target = identifier();
    expect(Tok::semicolon, "';'");
    model_->constraints.push_back(std::move(c));
    map_->constraints.push_back(span);
  }

  // Skips to the start of the next declaration.
  void recover() {
    while (cur().kind != Tok::end) {
      if (is_keyword("vp") || is_keyword("cp")) return;
      const Tok k = cur().kind;
      bump();
      if ((k == Tok::rbrace || k == Tok::semicolon) && depth_ <= 0) return;
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  ParseErrors& errors_;
  VariabilityModel* model_ = nullptr;
  SourceMap* map_ = nullptr;
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

void write_member(std::ostringstream& os, const VariantEdge& e) {
  os << ' ' << e.variant_id;
  if (e.guard) os << " when " << quote(*e.guard);
  os << ';';
}

}  // namespace

std::string format(const ParseError& e) {
  std::ostringstream os;
  os << e.span.line << ':' << e.span.column << ": expected " << e.expected << ", found '" << e.found << "'";
  return os.str();
}

bool is_reserved(std::string_view text) {
  return std::find(kReserved.begin(), kReserved.end(), text) != kReserved.end();
}

bool is_identifier(std::string_view text) {
  if (text.empty() || !ident_start(text.front())) return false;
  if (!std::all_of(text.begin(), text.end(), ident_char)) return false;
  return !is_reserved(text);
}

Expected<ParsedModel, ParseErrors> parse_with_source_map(std::string_view source) {
  ParseErrors errors;
  auto tokens = Lexer(source).run(errors);
  // Lexical errors surface as invalid tokens; the parser reports them again
  // with the expected token, so keep only the lexer's version.
  const std::size_t lexical = errors.size();
  ParseErrors syntax;
  ParsedModel parsed = Parser(std::move(tokens), syntax).run();
  for (auto& e : syntax) {
    const bool duplicate = std::any_of(errors.begin(), errors.begin() + static_cast<std::ptrdiff_t>(lexical),
                                       [&](const ParseError& l) { return l.span == e.span; });
    if (!duplicate) errors.push_back(std::move(e));
  }
  if (!errors.empty()) {
    std::stable_sort(errors.begin(), errors.end(), [](const ParseError& a, const ParseError& b) {
      return std::tie(a.span.line, a.span.column) < std::tie(b.span.line, b.span.column);
    });
    return errors;
  }
  return parsed;
}

Expected<VariabilityModel, ParseErrors> parse(std::string_view source) {
  auto parsed = parse_with_source_map(source);
  if (!parsed) return std::move(parsed).error();
  return std::move(parsed).value().model;
}

void attach_locations(Diagnostics& diagnostics, const SourceMap& source_map) {
  for (auto& d : diagnostics) {
    if (d.location || d.subject.empty()) continue;
    if (auto it = source_map.ids.find(d.subject.front()); it != source_map.ids.end()) d.location = it->second;
  }
}

std::string serialize(const VariabilityModel& model) {
  if (model.name.empty()) throw SerializeError("cannot serialize a model with an empty name", {});
  Diagnostics diagnostics = well_formed(model);
  if (has_errors(diagnostics)) throw SerializeError("cannot serialize a model that is not well formed", diagnostics);
  for (const auto& vp : model.vps) {
    for (const auto& id : vp.variant_ids()) {
      if (!is_identifier(id)) throw SerializeError("'" + id + "' is not a DSL identifier", {});
    }
    if (!is_identifier(vp.id)) throw SerializeError("'" + vp.id + "' is not a DSL identifier", {});
  }

  std::ostringstream os;
  os << "model " << quote(model.name) << '\n';
  for (const auto& vp : model.vps) {
    os << "  " << (vp.is_external() ? "cp " : "vp ") << vp.id << " layer " << to_string(vp.layer) << " {";
    for (const auto& e : vp.mandatory_edges) {
      os << " mandatory";
      write_member(os, e);
    }
    for (const auto& e : vp.optional_edges) {
      os << " optional";
      write_member(os, e);
    }
    if (vp.group) {
      os << " alt " << format_cardinality(vp.group->cardinality()) << " {";
      for (const auto& e : vp.group->members) write_member(os, e);
      os << " }";
    }
    os << " }\n";
  }
  for (const auto& c : model.constraints) os << "  " << describe(c) << ";\n";
  return os.str();
}

}  // namespace ovm::text
