#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rvc/valued.hpp"

namespace rvc {

struct OptResult {
    Cost cost = Cost::infinity();
    std::optional<Assignment> witness; // present iff cost < ∞; lexicographically least optimum
    long long nodes_explored = 0;
};

// Exact minimum of expr over gamma by branch and bound. Deterministic:
// variables by descending summand degree, values in domain order, witness
// canonicalized to the lexicographically least optimal assignment.
OptResult solve_exact(const TauExpression& expr, const ValuedStructure& gamma);

// Variant with some variables pinned (entries >= 0 are fixed).
OptResult solve_exact_pinned(const TauExpression& expr, const ValuedStructure& gamma,
    const Assignment& pinned);

struct BlpResult {
    Cost bound = Cost::infinity(); // ∞ when the relaxation is infeasible
    // Per-variable distributions over the domain (empty when bound is ∞).
    std::vector<std::vector<Rational>> marginals;
};

// Basic LP relaxation: per-variable distributions, per-summand distributions
// over finite-cost tuples with matching one-variable marginals.
BlpResult solve_blp(const TauExpression& expr, const ValuedStructure& gamma);

enum class RewriteCase { Equality, EmptyRelation, Expressibility, ScaleShift, Feas, Opt };

struct RewriteContext {
    std::string symbol; // the symbol being eliminated
    // Expressibility: definition whose first `arity(symbol)` variables are free.
    TauExpression definition;
    // ScaleShift (symbol = r*source + s), Feas, Opt: the source symbol.
    std::string source;
    Rational r = 1;
    Rational s = 0;
};

// The instance rewritings that eliminate one derived symbol while preserving
// the existence of a solution. `delta` interprets the instance before
// rewriting (it must contain cost tables for the eliminated symbol's source
// data where the case needs them).
VcspInstance rewrite_instance(const VcspInstance& inst, const ValuedStructure& delta,
    RewriteCase op, const RewriteContext& ctx);

// Instance-level reduction from a pp-power back to the base structure: every
// variable becomes d variables, every summand its defining expression on
// flattened coordinates with fresh bound variables.
VcspInstance reduce_pp_instance(const VcspInstance& inst, const ValuedStructure& gamma,
    int d, const std::map<std::string, PpDefinition>& defs);

} // namespace rvc
