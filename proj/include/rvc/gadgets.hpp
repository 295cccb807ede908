#pragma once

#include <string>
#include <vector>

#include "rvc/query.hpp"
#include "rvc/valued.hpp"

namespace rvc {

struct GadgetCheck {
    std::string claim;
    bool pass = false;
    std::string detail; // counterexample or witness description
};

struct GadgetReport {
    std::vector<GadgetCheck> checks;
    bool all_pass() const;
    void add(const std::string& claim, bool pass, const std::string& detail = "");
};

// q() :- R(x,y), S(y,z), T(z,x).
UnionQuery triangle_query();
// q() :- S(x), R(x,y), R(y,x), R(y,y).
UnionQuery mu1_query();

// Expressing NAE over the max-cut structure: Opt(<(x,y)+<(y,z)+<(z,x)).
GadgetReport verify_nae_gadget();

// Triangle-free witness model rich enough to realize the gadget's designated
// membership patterns; deterministic construction.
RelationalStructure build_triangle_witness_model();

// The nine-variable expression whose optimum is 7 on triangle-free models;
// checks the cost, the expressed XOR/EQ relations, and the one-in-three
// behaviour of the derived six-ary relation on designated encodings.
GadgetReport verify_triangle_gadget(const RelationalStructure& model);

// Structural packing bound: seven variable-disjoint triangle images among the
// expression's atom copies.
bool triangle_packing_exists();

struct Mu1Product {
    RelationalStructure m;
    RelationalStructure n;
};

// The pairing construction on f²: product and disjunction rules, the
// one-directional additions, then deterministic completion; preconditions
// reported with witnesses.
Mu1Product build_mu1_product(const RelationalStructure& f);

GadgetReport verify_mu1_polymorphism(const RelationalStructure& f);

// Packaged small model meeting the preconditions, with representatives of the
// pair patterns (plain point, two marked points, two looped points).
RelationalStructure mu1_five_element_model();

// Precondition check used by the mu1 builders; empty string when fine.
std::string mu1_precondition_violation(const RelationalStructure& f);

} // namespace rvc
