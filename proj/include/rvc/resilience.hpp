#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rvc/bagdb.hpp"
#include "rvc/orbit.hpp"
#include "rvc/solve.hpp"
#include "rvc/valued.hpp"

namespace rvc {

struct HittingSetInstance {
    struct Vertex {
        TupleId id;
        long long weight = 1;
    };
    std::vector<Vertex> vertices;
    std::vector<std::vector<int>> hyperedges; // minimal, deduplicated, non-empty
    bool infeasible = false;                  // a fully exogenous homomorphism exists
};

struct HittingSetSolution {
    Cost weight = Cost::infinity();
    std::vector<int> chosen; // canonical (lexicographically least optimal set)
};

// One hyperedge per homomorphism per disjunct, restricted to endogenous tuple
// identities; duplicate edges removed, supersets pruned.
HittingSetInstance build_hitting_set(const BagDatabase& db, const UnionQuery& mu);

// Exact minimum-weight hitting set by branch and bound; optional decision
// threshold is only used to answer faster in reports, the value stays exact.
HittingSetSolution solve_hitting_set(const HittingSetInstance& inst);

// τ-expression with one summand per tuple copy over the database elements;
// tuples flagged exogenous inside an endogenous relation use the crisp
// companion symbol "<name>!".
TauExpression database_to_expression(const BagDatabase& db);
BagDatabase expression_to_database(const TauExpression& expr, const Signature& sig,
    const std::set<std::string>& sigma);

// Γ(B, σ) extended with crisp companion relations for the given base names.
ValuedStructure dual_structure(const RelationalStructure& b, const std::set<std::string>& sigma,
    const std::set<std::string>& companion_bases = {});

enum class Route { Auto, Hitting, Dual, Types };

struct ResilienceOptions {
    Route route = Route::Auto;
    std::optional<RelationalStructure> dual; // required for Route::Dual
    int type_arity = 0;                      // 0: default_type_arity(mu)
    size_t type_candidate_cap = size_t(4) << 20;
    size_t type_var_cap = 200000;
};

struct ResilienceResult {
    Cost value = Cost::infinity();
    std::vector<std::pair<TupleId, long long>> removed; // identity, multiplicity
    std::string route_used;
};

// Resilience of mu on db; finite results ship a removal set that is
// re-verified to falsify the query.
ResilienceResult resilience_solve(const BagDatabase& db, const UnionQuery& mu,
    const ResilienceOptions& options = {});

// Exhaustive oracle: minimum multiplicity-weight over subsets of endogenous
// tuple identities whose removal falsifies mu, by increasing cost.
Cost brute_force_resilience(const BagDatabase& db, const UnionQuery& mu,
    long long weight_cap = 24);

} // namespace rvc
