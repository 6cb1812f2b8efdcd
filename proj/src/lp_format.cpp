#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "quantsched/error.hpp"
#include "quantsched/mip.hpp"

namespace quantsched {

namespace {

constexpr std::size_t kMaxLine = 100;
constexpr std::size_t kMaxName = 255;

std::string lower_case(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool reserved_word(std::string_view name) {
  static const char* const kWords[] = {
      "minimize", "minimum", "min",      "maximize", "maximum", "max",  "subject", "such",
      "st",       "s.t.",    "bounds",   "bound",    "binary",  "binaries", "bin",  "general",
      "generals", "gen",     "end",      "free",     "inf",     "infinity"};
  const std::string lc = lower_case(name);
  return std::any_of(std::begin(kWords), std::end(kWords), [&](const char* w) { return lc == w; });
}

bool name_char(char c) {
  if (std::isalnum(static_cast<unsigned char>(c))) return true;
  return std::string_view("!\"#$%&()/,.;?@_`'{}|~").find(c) != std::string_view::npos;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  if (v == kInfinity) return "+inf";
  if (v == -kInfinity) return "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

// Accumulates space-separated pieces into lines of bounded width.
class LineWriter {
 public:
  explicit LineWriter(std::string& out) : out_(out) {}

  void start(std::string head) { line_ = " " + std::move(head); }
  void piece(const std::string& text) {
    if (line_.size() + 1 + text.size() > kMaxLine && line_.size() > 4) {
      out_ += line_ + "\n";
      line_ = "   " + text;
    } else {
      line_ += " " + text;
    }
  }
  void finish() { out_ += line_ + "\n"; }

 private:
  std::string& out_;
  std::string line_;
};

void write_terms(LineWriter& w, const Model& model, const std::vector<LinearTerm>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    const std::string& name = model.variables()[t.var].name;
    const double mag = std::abs(t.coef);
    const bool negative = std::signbit(t.coef) && t.coef != 0.0;
    std::string text;
    if (first) {
      // "x", "- x", "2 x", "-2 x"
      if (negative) text = "-";
      if (mag != 1.0) text += format_number(mag) + " ";
      else if (negative) text += " ";
    } else {
      text = negative ? "- " : "+ ";
      if (mag != 1.0) text += format_number(mag) + " ";
    }
    w.piece(text + name);
    first = false;
  }
}

std::string_view relation_text(Relation r) {
  switch (r) {
    case Relation::kLessEqual: return "<=";
    case Relation::kGreaterEqual: return ">=";
    case Relation::kEqual: return "=";
  }
  return "=";
}

void require_legal(std::string_view name) {
  if (!legal_lp_name(name)) {
    throw InvalidArgument("export_lp_format: name '" + std::string(name) +
                          "' cannot be written in the LP dialect");
  }
}

}  // namespace

bool legal_lp_name(std::string_view name) {
  if (name.empty() || name.size() > kMaxName) return false;
  if (std::isdigit(static_cast<unsigned char>(name[0])) || name[0] == '.') return false;
  if (!std::all_of(name.begin(), name.end(), name_char)) return false;
  return !reserved_word(name);
}

std::string export_lp_format(const Model& model) {
  check_model(model);
  for (const auto& v : model.variables()) require_legal(v.name);
  for (const auto& c : model.constraints()) require_legal(c.name);
  for (const auto& ind : model.indicators()) require_legal(ind.body.name);

  std::string out = "Minimize\n";
  LineWriter w(out);
  w.start("obj:");
  std::vector<LinearTerm> objective;
  for (int j = 0; j < model.num_vars(); ++j) {
    if (model.objective()[j] != 0.0) objective.push_back({j, model.objective()[j]});
  }
  write_terms(w, model, objective);
  if (model.objective_constant != 0.0) {
    const double c = model.objective_constant;
    const std::string mag = format_number(std::abs(c));
    w.piece(objective.empty() ? (c < 0 ? "-" + mag : mag) : (c < 0 ? "- " : "+ ") + mag);
  }
  w.finish();

  out += "Subject To\n";
  auto write_row = [&](const std::string& head, const Constraint& c) {
    if (c.terms.empty()) {
      if (model.num_vars() == 0) {
        throw InvalidArgument("export_lp_format: row '" + c.name + "' has no terms");
      }
      w.start(head);
      w.piece("0 " + model.variables()[0].name);
    } else {
      w.start(head);
      write_terms(w, model, c.terms);
    }
    w.piece(std::string(relation_text(c.relation)));
    w.piece(format_number(c.rhs));
    w.finish();
  };
  for (const auto& c : model.constraints()) write_row(c.name + ":", c);
  for (const auto& ind : model.indicators()) {
    write_row(ind.body.name + ": " + model.variables()[ind.guard].name + " = " +
                  std::to_string(ind.active_value) + " ->",
              ind.body);
  }

  if (model.num_vars() > 0) {
    out += "Bounds\n";
    for (const auto& v : model.variables()) {
      out += " " + format_number(v.lower) + " <= " + v.name + " <= " + format_number(v.upper) + "\n";
    }
  }
  std::vector<std::string_view> binaries;
  for (const auto& v : model.variables()) {
    if (v.kind == VarKind::kBinary) binaries.push_back(v.name);
  }
  if (!binaries.empty()) {
    out += "Binaries\n";
    LineWriter bw(out);
    bw.start(std::string(binaries.front()));
    for (std::size_t i = 1; i < binaries.size(); ++i) bw.piece(std::string(binaries[i]));
    bw.finish();
  }
  out += "End\n";
  return out;
}

namespace {

enum class Section { kNone, kObjective, kConstraints, kBounds, kBinaries, kEnd };

enum class TokenKind { kName, kNumber, kRelation, kSign, kColon, kArrow };

struct Token {
  TokenKind kind;
  std::string text;
  double number = 0.0;
  Relation relation = Relation::kEqual;
  int line = 0;
};

[[noreturn]] void fail(int line, const std::string& message) {
  throw ParseError("LP file line " + std::to_string(line) + ": " + message);
}

std::optional<Section> section_header(std::string_view trimmed) {
  std::string lc = lower_case(trimmed);
  // Collapse internal runs of whitespace so "subject  to" is accepted.
  std::string norm;
  for (char c : lc) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!norm.empty() && norm.back() != ' ') norm += ' ';
    } else {
      norm += c;
    }
  }
  if (norm == "minimize" || norm == "minimum" || norm == "min") return Section::kObjective;
  if (norm == "subject to" || norm == "such that" || norm == "st" || norm == "s.t.") {
    return Section::kConstraints;
  }
  if (norm == "bounds" || norm == "bound") return Section::kBounds;
  if (norm == "binary" || norm == "binaries" || norm == "bin") return Section::kBinaries;
  if (norm == "end") return Section::kEnd;
  if (norm == "maximize" || norm == "maximum" || norm == "max") {
    throw ParseError("LP file: maximization is not supported");
  }
  if (norm == "general" || norm == "generals" || norm == "gen") {
    throw ParseError("LP file: general integer variables are not supported");
  }
  return std::nullopt;
}

void tokenize_line(std::string_view line, int line_no, std::vector<Token>& out) {
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token tok;
    tok.line = line_no;
    if (c == '<' || c == '>' || c == '=') {
      std::size_t j = i + 1;
      if (j < line.size() && (line[j] == '=' || line[j] == '<' || line[j] == '>')) ++j;
      const std::string op(line.substr(i, j - i));
      tok.kind = TokenKind::kRelation;
      tok.text = op;
      if (op == "<" || op == "<=" || op == "=<") tok.relation = Relation::kLessEqual;
      else if (op == ">" || op == ">=" || op == "=>") tok.relation = Relation::kGreaterEqual;
      else if (op == "=") tok.relation = Relation::kEqual;
      else fail(line_no, "unknown operator '" + op + "'");
      i = j;
    } else if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      tok.kind = TokenKind::kArrow;
      tok.text = "->";
      i += 2;
    } else if (c == '+' || c == '-') {
      tok.kind = TokenKind::kSign;
      tok.text = std::string(1, c);
      ++i;
    } else if (c == ':') {
      tok.kind = TokenKind::kColon;
      tok.text = ":";
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < line.size() &&
             (std::isdigit(static_cast<unsigned char>(line[j])) || line[j] == '.')) {
        ++j;
      }
      if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < line.size() && (line[k] == '+' || line[k] == '-')) ++k;
        if (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) {
          j = k;
          while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
        }
      }
      tok.kind = TokenKind::kNumber;
      tok.text = std::string(line.substr(i, j - i));
      auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
      if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
        fail(line_no, "malformed number '" + tok.text + "'");
      }
      i = j;
    } else if (name_char(c)) {
      std::size_t j = i;
      while (j < line.size() && name_char(line[j])) ++j;
      tok.text = std::string(line.substr(i, j - i));
      const std::string lc = lower_case(tok.text);
      if (lc == "inf" || lc == "infinity") {
        tok.kind = TokenKind::kNumber;
        tok.number = kInfinity;
      } else {
        tok.kind = TokenKind::kName;
      }
      i = j;
    } else {
      fail(line_no, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(tok));
  }
}

struct ParsedRow {
  std::string name;
  std::vector<std::pair<std::string, double>> terms;
  Relation relation = Relation::kEqual;
  double rhs = 0.0;
  std::optional<std::pair<std::string, int>> guard;
};

class SectionParser {
 public:
  explicit SectionParser(const std::vector<Token>& tokens) : tokens_(tokens) {}

  bool done() const { return pos_ >= tokens_.size(); }
  const Token& peek(std::size_t ahead = 0) const { return tokens_[pos_ + ahead]; }
  bool has(std::size_t ahead) const { return pos_ + ahead < tokens_.size(); }
  const Token& take() {
    if (done()) fail(tokens_.empty() ? 0 : tokens_.back().line, "unexpected end of section");
    return tokens_[pos_++];
  }

  std::optional<std::string> label() {
    if (has(1) && peek().kind == TokenKind::kName && peek(1).kind == TokenKind::kColon) {
      std::string name = take().text;
      take();
      return name;
    }
    return std::nullopt;
  }

  // [sign] number, where inf is a number.
  double signed_number() {
    double sign = 1.0;
    while (!done() && peek().kind == TokenKind::kSign) sign *= take().text == "-" ? -1.0 : 1.0;
    const Token& t = take();
    if (t.kind != TokenKind::kNumber) fail(t.line, "expected a number, found '" + t.text + "'");
    return sign * t.number;
  }

  // Terms up to (not including) a relation or the end of the section.
  // Bare numbers are summed into `constant` when it is supplied.
  std::vector<std::pair<std::string, double>> expression(double* constant) {
    std::vector<std::pair<std::string, double>> terms;
    bool first = true;
    while (!done() && peek().kind != TokenKind::kRelation) {
      double sign = 1.0;
      bool any = false;
      while (!done() && peek().kind == TokenKind::kSign) {
        sign *= take().text == "-" ? -1.0 : 1.0;
        any = true;
      }
      if (done()) fail(tokens_.back().line, "dangling sign");
      if (!first && !any) fail(peek().line, "missing operator before '" + peek().text + "'");
      first = false;
      double coef = 1.0;
      if (peek().kind == TokenKind::kNumber) {
        coef = take().number;
        if (done() || peek().kind != TokenKind::kName) {
          if (!constant) fail(tokens_[pos_ - 1].line, "constant term in a constraint body");
          *constant += sign * coef;
          continue;
        }
      }
      const Token& t = take();
      if (t.kind != TokenKind::kName) fail(t.line, "expected a variable name, found '" + t.text + "'");
      terms.emplace_back(t.text, sign * coef);
    }
    return terms;
  }

 private:
  const std::vector<Token>& tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Model parse_lp_format(std::string_view text) {
  std::map<Section, std::vector<Token>> sections;
  Section current = Section::kNone;
  bool seen_objective = false;
  bool seen_end = false;
  int line_no = 0;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (auto comment = line.find('\\'); comment != std::string_view::npos) line = line.substr(0, comment);
    std::size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    std::size_t b = line.find_last_not_of(" \t\r");
    std::string_view trimmed = line.substr(a, b - a + 1);
    if (auto header = section_header(trimmed)) {
      if (seen_end) fail(line_no, "content after End");
      if (*header == Section::kObjective) seen_objective = true;
      if (*header == Section::kEnd) seen_end = true;
      if (*header != Section::kObjective && !seen_objective) fail(line_no, "file must start with Minimize");
      current = *header;
    } else {
      if (current == Section::kNone) fail(line_no, "text before the Minimize section");
      if (current == Section::kEnd) fail(line_no, "content after End");
      tokenize_line(trimmed, line_no, sections[current]);
    }
    if (end == text.size()) break;
  }
  if (!seen_objective) throw ParseError("LP file: missing Minimize section");
  if (!seen_end) throw ParseError("LP file: missing End");

  std::vector<std::string> order;
  std::unordered_map<std::string, int> position;
  auto note = [&](const std::string& name) {
    if (position.emplace(name, static_cast<int>(order.size())).second) order.push_back(name);
  };

  struct BoundPair {
    std::optional<double> lower;
    std::optional<double> upper;
  };
  std::unordered_map<std::string, BoundPair> bounds;
  {
    SectionParser p(sections[Section::kBounds]);
    while (!p.done()) {
      const int line = p.peek().line;
      if (p.peek().kind == TokenKind::kName) {
        const std::string name = p.take().text;
        note(name);
        auto& bp = bounds[name];
        if (!p.done() && p.peek().kind == TokenKind::kName && lower_case(p.peek().text) == "free") {
          p.take();
          bp.lower = -kInfinity;
          bp.upper = kInfinity;
          continue;
        }
        const Token& rel = p.take();
        if (rel.kind != TokenKind::kRelation) fail(line, "expected a relation after '" + name + "'");
        const double v = p.signed_number();
        if (rel.relation == Relation::kLessEqual) bp.upper = v;
        else if (rel.relation == Relation::kGreaterEqual) bp.lower = v;
        else bp.lower = bp.upper = v;
        continue;
      }
      const double first = p.signed_number();
      const Token& rel = p.take();
      if (rel.kind != TokenKind::kRelation) fail(line, "expected a relation in bound");
      const Token& var = p.take();
      if (var.kind != TokenKind::kName) fail(line, "expected a variable in bound");
      note(var.text);
      auto& bp = bounds[var.text];
      auto apply = [&](Relation r, double v, bool value_first) {
        // "v <= x" bounds from below; "x <= v" from above.
        const bool lower = (r == Relation::kLessEqual) == value_first;
        if (r == Relation::kEqual) bp.lower = bp.upper = v;
        else if (lower) bp.lower = v;
        else bp.upper = v;
      };
      apply(rel.relation, first, true);
      if (!p.done() && p.peek().kind == TokenKind::kRelation) {
        const Relation second = p.take().relation;
        apply(second, p.signed_number(), false);
      }
    }
  }

  double constant = 0.0;
  std::vector<std::pair<std::string, double>> objective;
  {
    SectionParser p(sections[Section::kObjective]);
    p.label();
    objective = p.expression(&constant);
    if (!p.done()) fail(p.peek().line, "relation in the objective");
    for (const auto& [name, coef] : objective) note(name);
  }

  std::vector<ParsedRow> rows;
  {
    SectionParser p(sections[Section::kConstraints]);
    while (!p.done()) {
      ParsedRow row;
      row.name = p.label().value_or("R" + std::to_string(rows.size() + 1));
      if (p.has(3) && p.peek().kind == TokenKind::kName && p.peek(1).kind == TokenKind::kRelation &&
          p.peek(1).relation == Relation::kEqual && p.peek(2).kind == TokenKind::kNumber &&
          p.peek(3).kind == TokenKind::kArrow) {
        const std::string guard = p.take().text;
        p.take();
        const Token& value = p.take();
        if (value.number != 0.0 && value.number != 1.0) fail(value.line, "indicator value must be 0 or 1");
        p.take();
        note(guard);
        row.guard = std::make_pair(guard, static_cast<int>(value.number));
      }
      row.terms = p.expression(nullptr);
      if (p.done()) fail(0, "row '" + row.name + "' has no relation");
      row.relation = p.take().relation;
      row.rhs = p.signed_number();
      for (const auto& [name, coef] : row.terms) note(name);
      rows.push_back(std::move(row));
    }
  }

  std::unordered_map<std::string, bool> binary;
  {
    SectionParser p(sections[Section::kBinaries]);
    while (!p.done()) {
      const Token& t = p.take();
      if (t.kind != TokenKind::kName) fail(t.line, "expected a variable name in Binaries");
      note(t.text);
      binary[t.text] = true;
    }
  }

  Model model;
  for (const auto& name : order) {
    const bool is_binary = binary.count(name) > 0;
    const auto it = bounds.find(name);
    double lower = 0.0;
    double upper = is_binary ? 1.0 : kInfinity;
    if (it != bounds.end()) {
      if (it->second.lower) lower = *it->second.lower;
      if (it->second.upper) upper = *it->second.upper;
    }
    model.add_variable(name, is_binary ? VarKind::kBinary : VarKind::kContinuous, lower, upper);
  }
  for (const auto& [name, coef] : objective) model.objective()[model.variable(name)] += coef;
  model.objective_constant = constant;
  for (auto& row : rows) {
    Constraint c;
    c.name = row.name;
    c.relation = row.relation;
    c.rhs = row.rhs;
    for (const auto& [name, coef] : row.terms) c.terms.push_back({model.variable(name), coef});
    if (row.guard) {
      const int g = model.variable(row.guard->first);
      if (model.variables()[g].kind != VarKind::kBinary) {
        throw ParseError("LP file: indicator guard '" + row.guard->first + "' is not binary");
      }
      model.add_indicator({g, row.guard->second, std::move(c)});
    } else {
      model.add_constraint(std::move(c));
    }
  }
  return model;
}

}  // namespace quantsched
