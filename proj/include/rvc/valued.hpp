#pragma once

#include <map>
#include <string>
#include <vector>

#include "rvc/query.hpp"
#include "rvc/rational.hpp"

namespace rvc {

// Names usable in any expression without being declared: the crisp equality
// relation and the empty (constant-infinity) unary relation.
inline constexpr const char* kEqualitySymbol = "EQ";
inline constexpr const char* kEmptySymbol = "EMPTY";

// Total cost table domain^arity -> Q ∪ {∞}, row-major with the first
// coordinate most significant.
class ValuedRelation {
public:
    ValuedRelation() = default;
    ValuedRelation(int arity, int domain_size, Cost fill = Cost(0));

    int arity() const { return arity_; }
    int domain_size() const { return domain_size_; }
    size_t table_size() const { return table_.size(); }

    const Cost& at(const Tuple& t) const { return table_[index(t)]; }
    Cost& at(const Tuple& t) { return table_[index(t)]; }
    const Cost& at_index(size_t i) const { return table_[i]; }
    Cost& at_index(size_t i) { return table_[i]; }

    size_t index(const Tuple& t) const;
    Tuple tuple_of_index(size_t i) const;

    // Minimum finite value, or ∞ when there is none.
    Cost min_value() const;
    Cost max_finite_value() const; // ∞ when there is no finite entry

    bool operator==(const ValuedRelation&) const = default;

private:
    int arity_ = 0;
    int domain_size_ = 0;
    std::vector<Cost> table_;
};

ValuedRelation feas(const ValuedRelation& r);
ValuedRelation opt(const ValuedRelation& r);
ValuedRelation shift(const ValuedRelation& r, const Rational& s);
ValuedRelation scale(const ValuedRelation& r, const Rational& factor); // factor >= 0

class ValuedStructure {
public:
    ValuedStructure() = default;
    ValuedStructure(Signature sig, std::vector<std::string> domain);

    int domain_size() const { return static_cast<int>(domain_.size()); }
    const std::vector<std::string>& domain() const { return domain_; }
    const Signature& signature() const { return sig_; }
    int element_index(const std::string& name) const;

    void set_relation(const std::string& name, ValuedRelation r);
    const ValuedRelation& relation(const std::string& name) const;

    // Cost of one atom; resolves the built-in EQ/EMPTY symbols unless the
    // signature declares them explicitly.
    Cost cost(const std::string& relation, const Tuple& t) const;
    int symbol_arity(const std::string& relation) const;

    // Restriction to a subset of the domain (ascending element indices).
    ValuedStructure restrict(const std::vector<int>& keep) const;

    bool operator==(const ValuedStructure&) const = default;

private:
    Signature sig_;
    std::vector<std::string> domain_;
    std::map<std::string, ValuedRelation> relations_;
};

struct TauAtom {
    std::string relation;
    std::vector<int> vars;
    auto operator<=>(const TauAtom&) const = default;
};

// Formal sum of atoms; duplicates are significant.
struct TauExpression {
    std::vector<std::string> variables;
    std::vector<TauAtom> summands;
};

struct VcspInstance {
    TauExpression expr;
    Rational threshold;
};

using Assignment = std::vector<int>;

Cost evaluate(const TauExpression& expr, const ValuedStructure& gamma, const Assignment& a);

// Expressibility: R(free) = min over assignments to the remaining (bound)
// variables. `free` lists variable indices of expr; the resulting relation's
// coordinate order follows `free`. Guarded by a cap on domain^#variables.
ValuedRelation express(const ValuedStructure& gamma, const TauExpression& expr,
    const std::vector<int>& free, size_t cap = size_t(1) << 26);

struct PpDefinition {
    int arity = 0;          // arity k of the new relation over the power domain
    TauExpression expr;     // first k*d variables are free, the rest are bound
};

// d-th pp-power; the new domain is C^d with elements labeled "(a,...,b)".
ValuedStructure pp_power(const ValuedStructure& gamma, int d,
    const std::map<std::string, PpDefinition>& defs);

// The ℓ-th power with averaged tables (the pp-power a fractional polymorphism
// of arity ℓ is a fractional homomorphism from).
ValuedStructure ell_power(const ValuedStructure& gamma, int ell);

// Γ(B, σ): endogenous relations cost 0 on tuples of B and 1 otherwise,
// exogenous ones 0 / ∞.
ValuedStructure dual_to_valued(const RelationalStructure& b, const std::set<std::string>& sigma);

// JSON formats (see README): valued structures and instances.
ValuedStructure valued_structure_from_json(const std::string& json_text);
std::string valued_structure_to_json(const ValuedStructure& gamma);
TauExpression instance_expression_from_json(const std::string& json_text, const ValuedStructure& gamma);

// Built-in example structures on {0,1}: directed max-cut (<) and min-cut (>=).
ValuedStructure gamma_less();
ValuedStructure gamma_geq();

} // namespace rvc
