#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "rvc/bagdb.hpp"
#include "rvc/rational.hpp"
#include "rvc/resilience.hpp"

namespace rvc {

// Regular expression over {R, R^- : R binary in the signature}.
struct Rpq {
    enum class Kind { Symbol, Inverse, Empty, Epsilon, Union, Concat, Star };
    Kind kind = Kind::Empty;
    std::string symbol;                      // Symbol / Inverse
    std::vector<std::shared_ptr<Rpq>> child; // Union/Concat: 2, Star: 1
};

// `R;S`, `R^-`, `(R+S)*`, `eps`, `empty`; concatenation may be implicit.
Rpq parse_rpq(const std::string& text, const Signature& sig);

// ε-free automaton: transitions consume one database tuple each.
struct Nfa {
    struct Transition {
        int from;
        std::string symbol;
        bool inverse;
        int to;
    };
    int states = 0;
    std::vector<char> initial;
    std::vector<char> accepting;
    std::vector<Transition> transitions;
    bool accepts_epsilon = false;
};

Nfa rpq_to_nfa(const Rpq& q);

// All answer pairs via reachability in the product of the database graph with
// the automaton.
std::set<std::pair<int, int>> evaluate_rpq(const BagDatabase& db, const Rpq& q);

struct MDLogAtom {
    std::string pred; // relation, IDB predicate, "true", or "goal"
    std::vector<int> vars;
};

struct MDLogRule {
    MDLogAtom head;
    std::vector<MDLogAtom> body;
    int num_vars = 0;
};

struct MDLogProgram {
    std::vector<MDLogRule> rules;
};

// Simple monadic Datalog program equivalent to the query: S/E predicates per
// subexpression, plus true(x) -> S_root(x) and E_root(x) -> goal().
MDLogProgram rpq_to_mdlog(const Rpq& q);

// Every body is connected and contains at most one signature atom, with no
// repeated variables in it.
bool mdlog_is_simple(const MDLogProgram& p, const Signature& sig);

// Naive bottom-up evaluation; only used to check the translation.
bool mdlog_derives_goal(const MDLogProgram& p, const RelationalStructure& db);

struct RpqResilienceResult {
    Cost value = Cost::infinity();
    std::vector<std::pair<TupleId, long long>> removed;
    int iterations = 0;
};

// Exact resilience by lazy hyperedge generation: repeatedly extract a witness
// path, re-solve the weighted hitting set, and delete tentatively until no
// answer remains.
RpqResilienceResult rpq_resilience(const BagDatabase& db, const Rpq& q);

} // namespace rvc
