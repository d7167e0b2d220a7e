#include <doctest.h>

#include <algorithm>
#include <random>

#include "lmm/error.hpp"
#include "lmm/formula.hpp"

using namespace lmm;

namespace {

// Multiset of random terms as (sorted lhs rendering, grouping) strings.
std::vector<std::string> random_terms(const FormulaAst& a) {
  std::vector<std::string> out;
  for (const auto& re : a.random) {
    std::string s = re.lhs.intercept ? "1" : "0";
    for (const auto& t : re.lhs.terms) s += "+" + join_term(t);
    s += re.correlated ? "|" : "||";
    for (std::size_t i = 0; i < re.grouping.factors.size(); ++i)
      s += (i ? (re.grouping.nested ? "/" : ":") : "") + re.grouping.factors[i];
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t error_offset(const char* src) {
  try {
    parse_formula(src);
  } catch (const FormulaError& e) {
    return e.offset();
  }
  FAIL("expected a FormulaError for " << src);
  return 0;
}

}  // namespace

TEST_CASE("sleepstudy formula") {
  const auto a = parse_formula("Reaction ~ Days + (Days|Subject)");
  CHECK(a.response == "Reaction");
  CHECK(a.fixed.intercept);
  REQUIRE(a.fixed.terms.size() == 1);
  CHECK(a.fixed.terms[0] == Term{"Days"});
  REQUIRE(a.random.size() == 1);
  CHECK(a.random[0].lhs.intercept);
  CHECK(a.random[0].lhs.terms == std::vector<Term>{{"Days"}});
  CHECK(a.random[0].grouping.factors == std::vector<std::string>{"Subject"});
  CHECK(a.random[0].correlated);
}

TEST_CASE("offset model without intercept") {
  const auto a = parse_formula("y ~ 0 + offset(o) + (1|g)");
  CHECK_FALSE(a.fixed.intercept);
  CHECK(a.fixed.terms.empty());
  CHECK(a.offsets == std::vector<std::string>{"o"});
  CHECK(parse_formula("y ~ -1 + offset(o) + (1|g)") == a);
}

TEST_CASE("syntax errors carry byte offsets") {
  CHECK(error_offset("y ~ x + (") == 8);
  CHECK(error_offset("y x") == 2);
  CHECK(error_offset("y ~ x | g") == 6);
  CHECK(error_offset("y ~ x + (|g)") == 9);
  CHECK(error_offset("y ~ x + (1|g") == 8);
  CHECK(error_offset("y ~ x)") == 5);
  CHECK(error_offset("y ~ log(x)") == 4);
  CHECK(error_offset("y ~ a*b") == 5);
  CHECK_THROWS_AS(parse_formula(""), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ (1|a/b:c)"), FormulaError);
}

TEST_CASE("rewrite expands nesting and double bars") {
  CHECK(random_terms(rewrite(parse_formula("y ~ (1|g1/g2)"))) ==
        random_terms(parse_formula("y ~ (1|g1) + (1|g1:g2)")));
  CHECK(random_terms(rewrite(parse_formula("y ~ x + (x||g)"))) ==
        random_terms(parse_formula("y ~ x + (1|g) + (0+x|g)")));
  const auto plain = parse_formula("Reaction ~ Days + (Days|Subject)");
  CHECK(rewrite(plain) == plain);
  CHECK(rewrite(parse_formula("y ~ (1||g)")) == parse_formula("y ~ (1|g)"));
  CHECK(random_terms(rewrite(parse_formula("y ~ (1|a/b/c)"))) ==
        random_terms(parse_formula("y ~ (1|a) + (1|a:b) + (1|a:b:c)")));
}

TEST_CASE("every Table-1 style pair agrees after rewrite") {
  const std::pair<const char*, const char*> pairs[] = {
      {"y ~ (1|g)", "y ~ 1+(1|g)"},
      {"y ~ 0+offset(o)+(1|g)", "y ~ -1+offset(o)+(1|g)"},
      {"y ~ (1|g1/g2)", "y ~ (1|g1)+(1|g1:g2)"},
      {"y ~ (1|g1)+(1|g2)", "y ~ 1+(1|g1)+(1|g2)"},
      {"y ~ x+(x|g)", "y ~ 1+x+(1+x|g)"},
      {"y ~ x+(x||g)", "y ~ 1+x+(1|g)+(0+x|g)"},
  };
  for (const auto& [lhs, rhs] : pairs) {
    CAPTURE(lhs);
    const auto a = rewrite(parse_formula(lhs));
    const auto b = rewrite(parse_formula(rhs));
    CHECK(a.fixed == b.fixed);
    CHECK(a.offsets == b.offsets);
    CHECK(random_terms(a) == random_terms(b));
  }
}

TEST_CASE("canonical printing round trips") {
  const char* srcs[] = {
      "Reaction ~ Days + (Days|Subject)",
      "y ~ 0 + offset(o) + (1|g)",
      "y ~ x + a:b + (x||g) + (1|g1/g2)",
      "y ~ 1",
      "y ~ `odd name` + (0 + x + z | g:h)",
  };
  for (const char* s : srcs) {
    CAPTURE(s);
    const auto a = parse_formula(s);
    const auto printed = to_string(a);
    CHECK(parse_formula(printed) == a);
    CHECK(to_string(parse_formula(printed)) == printed);
    CHECK(rewrite(rewrite(a)) == rewrite(a));
  }
  CHECK(to_string(parse_formula("y ~ x + (x|g)")) == "y ~ 1 + x + (1 + x | g)");
}

TEST_CASE("update formula") {
  const auto base = parse_formula("Reaction ~ Days + (Days|Subject)");
  const auto up = update_formula(base, ". ~ . - (Days|Subject) + (1|Subject)");
  CHECK(to_display_string(up) == "Reaction ~ Days + (1 | Subject)");
  CHECK_THROWS_AS(parse_formula("y ~ x - z"), FormulaError);
}

TEST_CASE("random formulas round trip") {
  std::mt19937 rng(11);
  const char* vars[] = {"a", "b", "c", "x", "z"};
  for (int rep = 0; rep < 200; ++rep) {
    std::string s = "y ~ ";
    s += (rng() % 3 == 0) ? "0" : "1";
    const int nt = static_cast<int>(rng() % 3);
    for (int i = 0; i < nt; ++i) s += std::string(" + ") + vars[rng() % 5];
    if (rng() % 2) s += std::string(" + ") + vars[rng() % 5] + ":" + vars[rng() % 5];
    const int nr = 1 + static_cast<int>(rng() % 2);
    for (int i = 0; i < nr; ++i) {
      s += " + (";
      s += (rng() % 2) ? "1" : "0 + x";
      if (rng() % 2) s += " + z";
      s += (rng() % 3 == 0) ? " || " : " | ";
      s += (rng() % 2) ? "g" : "g/h";
      s += ")";
    }
    CAPTURE(s);
    const auto a = parse_formula(s);
    CHECK(parse_formula(to_string(a)) == a);
    const auto r = rewrite(a);
    CHECK(rewrite(r) == r);
    for (const auto& re : r.random) {
      CHECK(re.correlated);
      CHECK_FALSE(re.grouping.nested);
    }
  }
}
