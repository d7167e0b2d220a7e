#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lmm {

/// A model-matrix term: one variable, or an interaction `a:b:...` of several.
using Term = std::vector<std::string>;

/// Right-hand side of a linear sub-formula: explicit intercept flag plus
/// terms in source order (duplicates removed).
struct LinearPart {
  bool intercept = true;
  std::vector<Term> terms;

  friend bool operator==(const LinearPart&, const LinearPart&) = default;
};

/// Grouping expression of a random-effects term. `factors` holds the
/// components of `a:b` (interaction) or `a/b` (nesting, before rewrite).
struct GroupingExpr {
  std::vector<std::string> factors;
  bool nested = false;

  friend bool operator==(const GroupingExpr&, const GroupingExpr&) = default;
};

/// `(lhs | grouping)` or, with correlated == false, `(lhs || grouping)`.
struct RandomTermSpec {
  LinearPart lhs;
  GroupingExpr grouping;
  bool correlated = true;

  friend bool operator==(const RandomTermSpec&, const RandomTermSpec&) = default;
};

struct FormulaAst {
  std::string response;
  LinearPart fixed;
  std::vector<std::string> offsets;
  std::vector<RandomTermSpec> random;

  friend bool operator==(const FormulaAst&, const FormulaAst&) = default;
};

/// Parses `resp ~ fixed + (lhs|g) + ...`. Throws FormulaError carrying the
/// byte offset of the offending token.
FormulaAst parse_formula(std::string_view src);

/// Expands `(e|g1/g2)` into `(e|g1) + (e|g1:g2)` and `(1 + x||g)` into
/// `(1|g) + (0 + x|g)`. Idempotent.
FormulaAst rewrite(const FormulaAst& ast);

/// Canonical form with an explicit `1 +` / `0 +` in every linear part.
/// parse_formula(to_string(a)) == a for every parsed a.
std::string to_string(const FormulaAst& ast);

/// Human-oriented form: the implicit intercept is left out, e.g.
/// "Reaction ~ Days + (1 | Subject)".
std::string to_display_string(const FormulaAst& ast);

/// Applies an update formula such as `. ~ . - (Days|Subject) + (1|Subject)`
/// to `base`. `.` stands for the corresponding side of `base`; `- term`
/// removes a fixed or random term.
FormulaAst update_formula(const FormulaAst& base, std::string_view update);

/// Every variable name referenced by the formula (response, terms,
/// offsets, grouping factors), without duplicates, in first-use order.
std::vector<std::string> referenced_variables(const FormulaAst& ast);

/// "a:b" for {"a", "b"}.
std::string join_term(const Term& term);

}  // namespace lmm
