#include "lmm/formula.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <variant>

#include "lmm/error.hpp"

namespace lmm {
namespace {

enum class Tok {
  Ident,
  Number,
  Tilde,
  Plus,
  Minus,
  Colon,
  Slash,
  Bar,
  DoubleBar,
  LParen,
  RParen,
  Star,
  Caret,
  Dot,
  Other,
  End
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (c == '`') {
      const auto close = src.find('`', i + 1);
      if (close == std::string_view::npos) throw FormulaError("unterminated backquoted name", start);
      if (close == i + 1) throw FormulaError("empty backquoted name", start);
      out.push_back({Tok::Ident, std::string(src.substr(i + 1, close - i - 1)), start});
      i = close + 1;
      continue;
    }
    if (c == '.' && (i + 1 >= src.size() || !ident_char(src[i + 1]))) {
      out.push_back({Tok::Dot, ".", start});
      ++i;
      continue;
    }
    if (ident_start(c)) {
      while (i < src.size() && ident_char(src[i])) ++i;
      out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '.')) ++i;
      out.push_back({Tok::Number, std::string(src.substr(start, i - start)), start});
      continue;
    }
    Tok kind = Tok::Other;
    switch (c) {
      case '~': kind = Tok::Tilde; break;
      case '+': kind = Tok::Plus; break;
      case '-': kind = Tok::Minus; break;
      case ':': kind = Tok::Colon; break;
      case '/': kind = Tok::Slash; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case '*': kind = Tok::Star; break;
      case '^': kind = Tok::Caret; break;
      case '|':
        if (i + 1 < src.size() && src[i + 1] == '|') {
          out.push_back({Tok::DoubleBar, "||", start});
          i += 2;
          continue;
        }
        kind = Tok::Bar;
        break;
      default: break;
    }
    out.push_back({kind, std::string(1, c), start});
    ++i;
  }
  out.push_back({Tok::End, "", src.size()});
  return out;
}

struct InterceptItem {
  bool present;
};
struct OffsetItem {
  std::string name;
};
struct DotItem {};
using Item = std::variant<InterceptItem, Term, OffsetItem, RandomTermSpec, DotItem>;

struct SignedItem {
  bool removed;
  Item item;
  std::size_t offset;
};

class Parser {
 public:
  Parser(std::string_view src, bool update_mode)
      : toks_(tokenize(src)), update_(update_mode) {}

  // Returns the response (empty optional for `.`) and the rhs items.
  std::pair<std::optional<std::string>, std::vector<SignedItem>> parse() {
    std::optional<std::string> response;
    const Token& first = peek();
    if (first.kind == Tok::Ident) {
      response = first.text;
      next();
    } else if (first.kind == Tok::Dot && update_) {
      next();
    } else if (first.kind == Tok::Tilde) {
      throw FormulaError("missing response before '~'", first.offset);
    } else if (first.kind == Tok::End) {
      throw FormulaError("empty formula", first.offset);
    } else {
      throw FormulaError("expected response variable", first.offset);
    }
    if (peek().kind != Tok::Tilde) throw FormulaError("missing '~'", peek().offset);
    next();
    auto items = parse_sum(/*in_random_lhs=*/false, std::nullopt);
    if (peek().kind != Tok::End) unexpected(peek());
    return {response, std::move(items)};
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  [[noreturn]] void unexpected(const Token& t) const {
    switch (t.kind) {
      case Tok::Bar:
      case Tok::DoubleBar:
        throw FormulaError("'" + t.text + "' outside parentheses", t.offset);
      case Tok::RParen:
        throw FormulaError("unbalanced ')'", t.offset);
      case Tok::Star:
        throw FormulaError("'*' expansion is not supported; write the terms out explicitly", t.offset);
      case Tok::Slash:
        throw FormulaError("'/' is only allowed inside a grouping expression", t.offset);
      case Tok::Tilde:
        throw FormulaError("unexpected second '~'", t.offset);
      case Tok::End:
        throw FormulaError("unexpected end of formula", t.offset);
      default:
        throw FormulaError("unexpected '" + t.text + "'", t.offset);
    }
  }

  // A sum of items separated by + and -. Stops at End, ')' or a bar.
  std::vector<SignedItem> parse_sum(bool in_random_lhs, std::optional<std::size_t> open_paren) {
    std::vector<SignedItem> items;
    bool expect_item = true;
    bool removed = false;
    while (true) {
      const Token& t = peek();
      if (expect_item) {
        if (t.kind == Tok::Minus) {
          removed = true;
          next();
          continue;
        }
        if (t.kind == Tok::Plus && !items.empty()) {
          unexpected(t);
        }
        if (t.kind == Tok::End) {
          if (open_paren) throw FormulaError("unbalanced '('", *open_paren);
          throw FormulaError("expected a term", t.offset);
        }
        items.push_back(parse_item(removed, in_random_lhs));
        removed = false;
        expect_item = false;
        continue;
      }
      if (t.kind == Tok::Plus) {
        next();
        expect_item = true;
        continue;
      }
      if (t.kind == Tok::Minus) {
        next();
        removed = true;
        expect_item = true;
        continue;
      }
      if (t.kind == Tok::End && open_paren) throw FormulaError("unbalanced '('", *open_paren);
      return items;
    }
  }

  SignedItem parse_item(bool removed, bool in_random_lhs) {
    const Token& t = peek();
    const std::size_t off = t.offset;
    switch (t.kind) {
      case Tok::Number: {
        next();
        if (t.text == "1") return {removed, InterceptItem{!removed}, off};
        if (t.text == "0") {
          if (removed) throw FormulaError("'-0' is not supported", off);
          return {false, InterceptItem{false}, off};
        }
        throw FormulaError("numeric term '" + t.text + "' (only 0 and 1 are allowed)", off);
      }
      case Tok::Dot:
        if (!update_ || in_random_lhs) throw FormulaError("'.' is only allowed in update formulas", off);
        if (removed) throw FormulaError("cannot remove '.'", off);
        next();
        return {false, DotItem{}, off};
      case Tok::LParen: {
        if (in_random_lhs) throw FormulaError("nested parentheses in a random-effects term", off);
        next();
        RandomTermSpec re = parse_random(off);
        if (removed && !update_) throw FormulaError("term removal is only allowed in update formulas", off);
        return {removed, std::move(re), off};
      }
      case Tok::Ident: {
        const Token& name = next();
        if (peek().kind == Tok::LParen) {
          if (name.text != "offset") {
            throw FormulaError("function '" + name.text +
                                   "' is not supported; precompute the column and refer to it by name",
                               off);
          }
          if (in_random_lhs) throw FormulaError("offset() inside a random-effects term", off);
          const std::size_t paren = peek().offset;
          next();
          if (peek().kind != Tok::Ident) {
            if (peek().kind == Tok::End) throw FormulaError("unbalanced '('", paren);
            throw FormulaError("offset() expects a column name", peek().offset);
          }
          std::string col = next().text;
          if (peek().kind != Tok::RParen) {
            if (peek().kind == Tok::End) throw FormulaError("unbalanced '('", paren);
            throw FormulaError("offset() takes exactly one column name", peek().offset);
          }
          next();
          if (removed && !update_) throw FormulaError("term removal is only allowed in update formulas", off);
          return {removed, OffsetItem{std::move(col)}, off};
        }
        Term term{name.text};
        while (peek().kind == Tok::Colon) {
          next();
          if (peek().kind != Tok::Ident) throw FormulaError("expected a variable after ':'", peek().offset);
          term.push_back(next().text);
        }
        if (peek().kind == Tok::Star || peek().kind == Tok::Caret) unexpected(peek());
        if (removed && !update_) throw FormulaError("term removal is only allowed in update formulas", off);
        return {removed, std::move(term), off};
      }
      default:
        unexpected(t);
    }
  }

  RandomTermSpec parse_random(std::size_t open) {
    const std::size_t lhs_start = peek().offset;
    if (peek().kind == Tok::Bar || peek().kind == Tok::DoubleBar) {
      throw FormulaError("empty random-effects term", lhs_start);
    }
    if (peek().kind == Tok::RParen) throw FormulaError("empty parentheses", lhs_start);
    auto items = parse_sum(/*in_random_lhs=*/true, open);
    const Token& bar = peek();
    if (bar.kind == Tok::RParen) {
      throw FormulaError("parenthesized expression without '|' is not supported", open);
    }
    if (bar.kind != Tok::Bar && bar.kind != Tok::DoubleBar) unexpected(bar);
    next();
    RandomTermSpec re;
    re.correlated = bar.kind == Tok::Bar;
    for (auto& si : items) {
      if (auto* ic = std::get_if<InterceptItem>(&si.item)) {
        re.lhs.intercept = ic->present;
      } else if (auto* term = std::get_if<Term>(&si.item)) {
        if (si.removed) throw FormulaError("term removal inside a random-effects term", si.offset);
        if (std::find(re.lhs.terms.begin(), re.lhs.terms.end(), *term) == re.lhs.terms.end()) {
          re.lhs.terms.push_back(std::move(*term));
        }
      }
    }
    if (!re.lhs.intercept && re.lhs.terms.empty()) {
      throw FormulaError("random-effects term has no columns", lhs_start);
    }
    // grouping expression
    const Token& g = peek();
    if (g.kind == Tok::RParen) throw FormulaError("empty grouping factor", g.offset);
    if (g.kind == Tok::End) throw FormulaError("unbalanced '('", open);
    if (g.kind != Tok::Ident) throw FormulaError("expected a grouping factor name", g.offset);
    re.grouping.factors.push_back(next().text);
    std::optional<Tok> op;
    while (peek().kind == Tok::Colon || peek().kind == Tok::Slash) {
      const Token& o = next();
      if (op && *op != o.kind) {
        throw FormulaError("mixing ':' and '/' in a grouping expression is ambiguous; use separate terms",
                           o.offset);
      }
      op = o.kind;
      if (peek().kind != Tok::Ident) throw FormulaError("expected a grouping factor name", peek().offset);
      re.grouping.factors.push_back(next().text);
    }
    re.grouping.nested = op == Tok::Slash;
    if (peek().kind == Tok::End) throw FormulaError("unbalanced '('", open);
    if (peek().kind != Tok::RParen) unexpected(peek());
    next();
    return re;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  bool update_;
};

template <class T>
void push_unique(std::vector<T>& v, T x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(std::move(x));
}

template <class T>
void erase_value(std::vector<T>& v, const T& x) {
  v.erase(std::remove(v.begin(), v.end(), x), v.end());
}

void apply_items(FormulaAst& ast, std::vector<SignedItem>& items, const FormulaAst* base) {
  for (auto& si : items) {
    std::visit(
        [&](auto& item) {
          using T = std::decay_t<decltype(item)>;
          if constexpr (std::is_same_v<T, InterceptItem>) {
            ast.fixed.intercept = item.present;
          } else if constexpr (std::is_same_v<T, Term>) {
            if (si.removed) {
              erase_value(ast.fixed.terms, item);
            } else {
              push_unique(ast.fixed.terms, item);
            }
          } else if constexpr (std::is_same_v<T, OffsetItem>) {
            if (si.removed) {
              erase_value(ast.offsets, item.name);
            } else {
              push_unique(ast.offsets, item.name);
            }
          } else if constexpr (std::is_same_v<T, RandomTermSpec>) {
            if (si.removed) {
              erase_value(ast.random, item);
            } else {
              ast.random.push_back(item);
            }
          } else {
            ast.fixed = base->fixed;
            ast.offsets = base->offsets;
            ast.random = base->random;
          }
        },
        si.item);
  }
}

std::string quote_name(const std::string& name) {
  bool plain = !name.empty() && name != "." && ident_start(name[0]) &&
               !std::isdigit(static_cast<unsigned char>(name.size() > 1 && name[0] == '.' ? name[1] : 'a'));
  for (char c : name) plain = plain && ident_char(c);
  return plain ? name : "`" + name + "`";
}

std::string print_term(const Term& term) {
  std::string s;
  for (std::size_t i = 0; i < term.size(); ++i) {
    if (i) s += ':';
    s += quote_name(term[i]);
  }
  return s;
}

std::string print_linear(const LinearPart& lp, bool explicit_intercept) {
  std::string out;
  auto add = [&out](const std::string& s) {
    if (!out.empty()) out += " + ";
    out += s;
  };
  if (explicit_intercept || !lp.intercept || lp.terms.empty()) add(lp.intercept ? "1" : "0");
  for (const auto& t : lp.terms) add(print_term(t));
  return out;
}

std::string print(const FormulaAst& ast, bool canonical) {
  std::string out = quote_name(ast.response) + " ~ ";
  std::string rhs;
  auto add = [&rhs](const std::string& s) {
    if (!rhs.empty()) rhs += " + ";
    rhs += s;
  };
  const bool only_intercept = ast.fixed.intercept && ast.fixed.terms.empty();
  if (canonical || !only_intercept || (ast.offsets.empty() && ast.random.empty())) {
    add(print_linear(ast.fixed, canonical));
  }
  for (const auto& o : ast.offsets) add("offset(" + quote_name(o) + ")");
  for (const auto& re : ast.random) {
    std::string g;
    for (std::size_t i = 0; i < re.grouping.factors.size(); ++i) {
      if (i) g += re.grouping.nested ? "/" : ":";
      g += quote_name(re.grouping.factors[i]);
    }
    add("(" + print_linear(re.lhs, canonical) + (re.correlated ? " | " : " || ") + g + ")");
  }
  return out + rhs;
}

}  // namespace

std::string join_term(const Term& term) {
  std::string s;
  for (std::size_t i = 0; i < term.size(); ++i) {
    if (i) s += ':';
    s += term[i];
  }
  return s;
}

FormulaAst parse_formula(std::string_view src) {
  Parser parser(src, /*update_mode=*/false);
  auto [response, items] = parser.parse();
  FormulaAst ast;
  ast.response = *response;
  apply_items(ast, items, nullptr);
  return ast;
}

FormulaAst update_formula(const FormulaAst& base, std::string_view update) {
  Parser parser(update, /*update_mode=*/true);
  auto [response, items] = parser.parse();
  FormulaAst ast;
  ast.response = response ? *response : base.response;
  // Without a `.`, the update formula replaces the right-hand side.
  ast.fixed = LinearPart{};
  apply_items(ast, items, &base);
  return ast;
}

FormulaAst rewrite(const FormulaAst& ast) {
  FormulaAst out = ast;
  out.random.clear();
  for (const auto& re : ast.random) {
    std::vector<GroupingExpr> groups;
    if (re.grouping.nested) {
      for (std::size_t k = 1; k <= re.grouping.factors.size(); ++k) {
        GroupingExpr g;
        g.factors.assign(re.grouping.factors.begin(), re.grouping.factors.begin() + k);
        groups.push_back(std::move(g));
      }
    } else {
      groups.push_back(re.grouping);
    }
    for (const auto& g : groups) {
      if (re.correlated) {
        out.random.push_back({re.lhs, g, true});
        continue;
      }
      if (re.lhs.intercept) out.random.push_back({LinearPart{true, {}}, g, true});
      for (const auto& t : re.lhs.terms) out.random.push_back({LinearPart{false, {t}}, g, true});
    }
  }
  return out;
}

std::string to_string(const FormulaAst& ast) { return print(ast, true); }

std::string to_display_string(const FormulaAst& ast) { return print(ast, false); }

std::vector<std::string> referenced_variables(const FormulaAst& ast) {
  std::vector<std::string> vars;
  push_unique(vars, ast.response);
  for (const auto& t : ast.fixed.terms)
    for (const auto& v : t) push_unique(vars, v);
  for (const auto& o : ast.offsets) push_unique(vars, o);
  for (const auto& re : ast.random) {
    for (const auto& t : re.lhs.terms)
      for (const auto& v : t) push_unique(vars, v);
    for (const auto& g : re.grouping.factors) push_unique(vars, g);
  }
  return vars;
}

}  // namespace lmm
