#pragma once

#include <set>
#include <string>
#include <vector>

#include "rvc/valued.hpp"

namespace rvc {

// One orbit of m-tuples in the free-amalgamation dual: an equality pattern on
// the m positions together with a query-avoiding structure on its blocks.
struct OrbitType {
    std::vector<int> block_of;    // restricted growth string, length m
    RelationalStructure quotient; // structure on the blocks, avoids every disjunct

    std::string name() const;
    bool operator==(const OrbitType&) const = default;
};

// Finite valued structure on the orbit types: a unary starred relation per
// source symbol and binary compatibility relations per coordinate projection
// pair.
struct TypeStructure {
    int m = 0;
    std::vector<OrbitType> types;
    ValuedStructure structure;

    static std::string star_name(const std::string& relation) { return relation + "*"; }
    static std::string compat_name(const std::vector<int>& i, const std::vector<int>& j);
};

// Default m and the bound under which the reduction theorem applies.
int default_type_arity(const UnionQuery& mu);
int theorem_type_arity(const UnionQuery& mu); // max(r+1, v, 3)

// All orbit types for queries whose disjuncts have complete Gaifman graphs;
// candidates are capped (partitions of m times all structures on the blocks).
std::vector<OrbitType> enumerate_orbit_types(const UnionQuery& mu, int m,
    size_t candidate_cap = size_t(4) << 20);

// `crisp` lists extra relation names priced 0/∞ like exogenous ones (used for
// per-tuple exogeneity companions; they read the base relation's name before
// the trailing '!').
TypeStructure build_type_structure(const UnionQuery& mu, const std::set<std::string>& sigma,
    int m, const std::set<std::string>& crisp = {}, size_t candidate_cap = size_t(4) << 20);

// Thm-style instance reduction: one type variable per m-tuple of expression
// variables, starred summands on padded tuples, compatibility summands where
// projected variable tuples coincide.
VcspInstance reduce_to_type_instance(const TauExpression& expr, const Rational& threshold,
    const TypeStructure& ts, size_t var_cap = 200000);

} // namespace rvc
