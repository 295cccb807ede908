#pragma once

#include <optional>
#include <vector>

#include "rvc/valued.hpp"

namespace rvc {

// Total operation domain^arity -> domain, stored row-major like cost tables.
struct OperationTable {
    int arity = 0;
    int domain_size = 0;
    std::vector<int> table;

    int apply(const Tuple& args) const;
    // Componentwise application to `arity` many k-tuples.
    Tuple apply_componentwise(const std::vector<Tuple>& tuples) const;

    bool is_cyclic() const;
    bool is_siggers() const; // arity 4: f(a,r,e,a) = f(r,a,r,e)
    bool is_injective() const;

    static OperationTable projection(int arity, int domain_size, int coordinate);

    auto operator<=>(const OperationTable&) const = default;
};

struct WeightedOperation {
    OperationTable op;
    Rational weight;
};

// Finitely supported probability distribution on operation tables.
struct FractionalOperation {
    int arity = 0;
    std::vector<WeightedOperation> support; // positive weights summing to 1

    void validate() const;
    static FractionalOperation identity(int arity, int domain_size); // Id_ℓ
};

// Improvement check, exact: for all ℓ-tuples of k-tuples,
// Σ_f ω(f)·R(f(a¹,…,a^ℓ)) ≤ (1/ℓ)·Σ_j R(a^j).
bool improves(const FractionalOperation& omega, const ValuedRelation& r,
    size_t family_cap = size_t(1) << 24);

bool is_fractional_polymorphism(const FractionalOperation& omega, const ValuedStructure& gamma);

enum class SearchOutcome { Found, None, CapExceeded };

struct CyclicSearch {
    SearchOutcome outcome = SearchOutcome::None;
    std::optional<FractionalOperation> omega; // re-verified exactly when present
};

// LP over the weights of all cyclic operation tables of the given arity.
CyclicSearch find_cyclic_fpol(const ValuedStructure& gamma, int ell, size_t op_cap = 70000);

// Maximize the total weight on Siggers operations over 4-ary fractional
// polymorphisms; true iff the optimum is positive.
bool siggers_in_support(const ValuedStructure& gamma, size_t op_cap = 70000);

// Shrinks along non-injective unary support operations until none is left.
ValuedStructure core_reduce(const ValuedStructure& gamma, size_t op_cap = 70000);

} // namespace rvc
