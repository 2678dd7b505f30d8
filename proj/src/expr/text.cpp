#include "expr/text.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace sparsym::expr {

ParseError::ParseError(ParseErrorKind kind, std::size_t position, const std::string& message)
    : Error(ErrorCode::Parse, message + " at position " + std::to_string(position)),
      kind_(kind),
      position_(position) {}

std::string format_constant(double v, bool display) {
  char buf[40];
  if (display) {
    std::snprintf(buf, sizeof buf, "%.2g", v);
    return buf;
  }
  // shortest text that reads back to the same double
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace {

bool negative_constant(const Expr& e) { return is_constant(e) && std::signbit(e->value); }

// Left spine of a chain: ((a op b) op c) -> [a, b, c]. Right operands of the
// same operator stay grouped so the text re-parses to the same shape.
std::vector<Expr> left_spine(const Expr& e, std::string_view op) {
  std::vector<Expr> out;
  Expr cur = e;
  while (cur->kind == Kind::Binary && cur->op == op) {
    out.push_back(cur->right);
    cur = cur->left;
  }
  out.push_back(cur);
  return {out.rbegin(), out.rend()};
}

class Printer {
 public:
  explicit Printer(const TextOptions& o) : opt_(o) {}

  std::string expr(const Expr& e) {
    if (is_op(e, "add") && e->kind == Kind::Binary) return sum(e);
    return term(e, true);
  }

 private:
  std::string constant_text(double v) { return format_constant(v, opt_.display); }

  std::string sum(const Expr& e) {
    auto terms = left_spine(e, "add");
    std::string out = term(terms[0], true);
    for (std::size_t i = 1; i < terms.size(); ++i) {
      const Expr& t = terms[i];
      if (is_op(t, "add")) {
        out += " + (" + sum(t) + ")";
        continue;
      }
      if (Expr neg = negated(t)) {
        out += " - " + term(neg, false);
      } else {
        out += " + " + term(t, false);
      }
    }
    return out;
  }

  // If the term starts with a negative constant, the same term with that
  // constant negated; otherwise null.
  static Expr negated(const Expr& t) {
    if (negative_constant(t)) return constant(-t->value);
    if (t->kind == Kind::Binary && t->op == "mul") {
      auto factors = left_spine(t, "mul");
      if (negative_constant(factors[0])) {
        factors[0] = constant(-factors[0]->value);
        return build_chain("mul", factors);
      }
    }
    return nullptr;
  }

  // A product or anything tighter. `leading` allows a bare negative constant
  // at the front.
  std::string term(const Expr& e, bool leading) {
    if (!(e->kind == Kind::Binary && e->op == "mul")) return factor(e, leading);
    auto factors = left_spine(e, "mul");
    std::string out;
    std::size_t start = 0;
    if (leading && is_constant(factors[0], -1.0) && !is_constant(factors[1])) {
      out = "-";
      out += factor(factors[1], false);
      start = 2;
    } else {
      out = factor(factors[0], leading);
      start = 1;
    }
    for (std::size_t i = start; i < factors.size(); ++i) out += "*" + factor(factors[i], false);
    return out;
  }

  std::string factor(const Expr& e, bool leading) {
    if (is_op(e, "add") && e->kind == Kind::Binary) return "(" + sum(e) + ")";
    if (is_op(e, "mul") && e->kind == Kind::Binary) return "(" + term(e, true) + ")";
    if (negative_constant(e)) {
      return leading ? constant_text(e->value) : "(" + constant_text(e->value) + ")";
    }
    return power(e);
  }

  std::string power(const Expr& e) {
    if (e->kind == Kind::Binary && e->op == "pow") {
      return atom_or_group(e->left) + "^" + atom_or_group(e->right);
    }
    return atom(e);
  }

  std::string atom_or_group(const Expr& e) {
    const bool bare = (e->kind == Kind::Constant && !std::signbit(e->value)) ||
                      e->kind == Kind::Variable || e->kind == Kind::Unary;
    return bare ? atom(e) : "(" + expr(e) + ")";
  }

  std::string atom(const Expr& e) {
    switch (e->kind) {
      case Kind::Constant: return constant_text(e->value);
      case Kind::Variable:
        if (e->index < opt_.feature_names.size()) return opt_.feature_names[e->index];
        return "x" + std::to_string(e->index);
      case Kind::Unary: return e->op + "(" + expr(e->left) + ")";
      case Kind::Binary: return e->op + "(" + expr(e->left) + ", " + expr(e->right) + ")";
    }
    return {};
  }

  const TextOptions& opt_;
};

// ---------------------------------------------------------------------------

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
  double number = 0.0;
};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(c) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
          i = j;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        }
      }
      Token t{Tok::Number, start, s.substr(start, i - start)};
      auto [ptr, ec] = std::from_chars(s.data() + start, s.data() + i, t.number);
      if (ec != std::errc() || ptr != s.data() + i) {
        throw ParseError(ParseErrorKind::Syntax, start, "malformed number '" + t.text + "'");
      }
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Tok::Ident, start, s.substr(start, i - start)});
      continue;
    }
    // UTF-8 middle dot, multiplication sign, minus sign.
    if (s.compare(i, 2, "\xC2\xB7") == 0 || s.compare(i, 2, "\xC3\x97") == 0) {
      out.push_back({Tok::Star, start, "*"});
      i += 2;
      continue;
    }
    if (s.compare(i, 3, "\xE2\x88\x92") == 0) {
      out.push_back({Tok::Minus, start, "-"});
      i += 3;
      continue;
    }
    Tok k;
    switch (c) {
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      case '^': k = Tok::Caret; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case ',': k = Tok::Comma; break;
      default:
        throw ParseError(ParseErrorKind::Syntax, start,
                         std::string("unexpected character '") + s[i] + "'");
    }
    out.push_back({k, start, std::string(1, s[i])});
    ++i;
  }
  out.push_back({Tok::End, s.size(), ""});
  return out;
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& names,
         const diff::Registry& registry)
      : toks_(lex(text)), names_(names), registry_(registry) {}

  Expr parse() {
    Expr e = sum();
    if (peek().kind != Tok::End) syntax("unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void syntax(const std::string& msg) const {
    throw ParseError(ParseErrorKind::Syntax, peek().pos, msg);
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) {
      syntax(std::string("expected ") + what +
             (peek().kind == Tok::End ? " before end of input" : ", found '" + peek().text + "'"));
    }
  }

  Expr sum() {
    Expr acc = term();
    for (;;) {
      if (accept(Tok::Plus)) {
        acc = add(acc, term());
      } else if (accept(Tok::Minus)) {
        acc = add(acc, negate(term()));
      } else {
        return acc;
      }
    }
  }

  static Expr negate(const Expr& t) {
    if (is_constant(t)) return constant(-t->value);
    std::vector<Expr> factors = left_spine(t, "mul");
    if (is_constant(factors[0])) {
      factors[0] = constant(-factors[0]->value);
    } else {
      factors.insert(factors.begin(), constant(-1.0));
    }
    return build_chain("mul", factors);
  }

  Expr term() {
    Expr acc = signed_factor();
    for (;;) {
      if (accept(Tok::Star)) {
        acc = mul(acc, signed_factor());
      } else if (peek().kind == Tok::Slash) {
        throw ParseError(ParseErrorKind::UnknownOperator, peek().pos,
                         "unknown operator '/' (division is not supported)");
      } else {
        return acc;
      }
    }
  }

  Expr signed_factor() {
    if (accept(Tok::Minus)) {
      if (peek().kind == Tok::Number && peek(1).kind != Tok::Caret) {
        return constant(-next().number);
      }
      return mul(constant(-1.0), signed_factor());
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept(Tok::Caret)) {
      Expr exponent;
      if (accept(Tok::Minus)) {
        if (peek().kind == Tok::Number && peek(1).kind != Tok::Caret) {
          exponent = constant(-next().number);
        } else {
          exponent = mul(constant(-1.0), power());
        }
      } else {
        exponent = power();
      }
      return pow(base, exponent);
    }
    return base;
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: next(); return constant(t.number);
      case Tok::LParen: {
        next();
        Expr e = sum();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: {
        Token id = next();
        if (peek().kind == Tok::LParen) return call(id);
        return variable_named(id);
      }
      case Tok::End: syntax("unexpected end of input");
      default: syntax("unexpected '" + t.text + "'");
    }
  }

  Expr call(const Token& id) {
    std::size_t arity = 0;
    if (id.text == "pow") {
      arity = 2;
    } else if (auto p = registry_.find(id.text)) {
      arity = p->arity;
    } else {
      throw ParseError(ParseErrorKind::UnknownOperator, id.pos, "unknown operator '" + id.text + "'");
    }
    expect(Tok::LParen, "'('");
    std::vector<Expr> args{sum()};
    while (accept(Tok::Comma)) args.push_back(sum());
    expect(Tok::RParen, "')'");
    if (args.size() != arity) {
      throw ParseError(ParseErrorKind::Syntax, id.pos,
                       "operator '" + id.text + "' takes " + std::to_string(arity) +
                           " argument(s), got " + std::to_string(args.size()));
    }
    return arity == 1 ? unary(id.text, args[0]) : binary(id.text, args[0], args[1]);
  }

  Expr variable_named(const Token& id) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == id.text) return variable(i);
    }
    if (id.text.size() > 1 && id.text[0] == 'x') {
      std::size_t index = 0;
      const char* b = id.text.data() + 1;
      const char* e = id.text.data() + id.text.size();
      auto [ptr, ec] = std::from_chars(b, e, index);
      if (ec == std::errc() && ptr == e) {
        if (!names_.empty() && index >= names_.size()) {
          throw ParseError(ParseErrorKind::UnknownVariable, id.pos,
                           "variable '" + id.text + "' outside " + std::to_string(names_.size()) +
                               " features");
        }
        return variable(index);
      }
    }
    throw ParseError(ParseErrorKind::UnknownVariable, id.pos, "unknown variable '" + id.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const std::vector<std::string>& names_;
  const diff::Registry& registry_;
};

}  // namespace

std::string to_text(const Expr& e, const TextOptions& options) { return Printer(options).expr(e); }

Expr parse_text(const std::string& text, const std::vector<std::string>& feature_names,
                const diff::Registry& registry) {
  return Parser(text, feature_names, registry).parse();
}

}  // namespace sparsym::expr
