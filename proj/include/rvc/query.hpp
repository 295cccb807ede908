#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rvc/error.hpp"

namespace rvc {

struct RelationInfo {
    std::string name;
    int arity = 0;
    bool operator==(const RelationInfo&) const = default;
};

class Signature {
public:
    Signature() = default;

    void add(const std::string& name, int arity);
    bool contains(const std::string& name) const { return index_.count(name) > 0; }
    int arity(const std::string& name) const;
    const std::vector<RelationInfo>& relations() const { return relations_; }
    bool operator==(const Signature&) const = default;

private:
    std::vector<RelationInfo> relations_;
    std::map<std::string, int> index_;
};

struct Atom {
    std::string relation;
    std::vector<int> args; // indices into the query's variable list
    auto operator<=>(const Atom&) const = default;
};

// Boolean conjunctive query; variables in first-occurrence order, duplicate
// atoms preserved.
struct ConjunctiveQuery {
    std::vector<std::string> variables;
    std::vector<Atom> atoms;
};

struct UnionQuery {
    Signature signature;
    std::vector<ConjunctiveQuery> disjuncts;
};

using Tuple = std::vector<int>;

// Finite relational structure over elements 0..size-1 with element labels.
class RelationalStructure {
public:
    RelationalStructure() = default;
    RelationalStructure(Signature sig, std::vector<std::string> elements);

    int size() const { return static_cast<int>(elements_.size()); }
    const Signature& signature() const { return sig_; }
    const std::vector<std::string>& elements() const { return elements_; }
    int element_index(const std::string& name) const;

    void add_tuple(const std::string& relation, Tuple t);
    bool has_tuple(const std::string& relation, const Tuple& t) const;
    const std::set<Tuple>& tuples(const std::string& relation) const;

    // Induced substructure on the given elements (ascending order), relabeled
    // to 0..k-1 and keeping the original element labels.
    RelationalStructure induced(const std::vector<int>& keep) const;

    bool operator==(const RelationalStructure&) const = default;

private:
    Signature sig_;
    std::vector<std::string> elements_;
    std::map<std::string, std::set<Tuple>> relations_;
};

struct StructureReport {
    bool connected = false;
    bool incidence_acyclic = false;
    bool gaifman_complete = false;
};

struct QueryFile {
    Signature signature;
    UnionQuery query;
    std::set<std::string> exogenous;
};

// `q() :- A1, ..., An.` rules, one per line; rules with the same head form a
// union. Reports unknown relations, arity mismatches, and syntax errors with
// their position.
UnionQuery parse_union_query(const std::string& text, const Signature& sig);

// Full query file: `#relation Name/arity` and `#exogenous Name` declarations
// followed by rules.
QueryFile parse_query_file(const std::string& text);

RelationalStructure canonical_database(const Signature& sig, const ConjunctiveQuery& cq);
ConjunctiveQuery canonical_query(const RelationalStructure& s);

StructureReport analyze(const Signature& sig, const ConjunctiveQuery& cq);

// All homomorphisms src -> dst as element maps, sorted lexicographically.
// With a limit, at most `limit` maps are returned (search order).
std::vector<std::vector<int>> enumerate_homomorphisms(const RelationalStructure& src,
    const RelationalStructure& dst, std::optional<size_t> limit = std::nullopt);

bool has_homomorphism(const RelationalStructure& src, const RelationalStructure& dst);

// Minimum retract; deterministic representative (lexicographically least
// element subset of minimum size admitting a homomorphism from s).
RelationalStructure core_of(const RelationalStructure& s);

// a implies b iff canonical_database(b) maps homomorphically into
// canonical_database(a).
bool implies(const Signature& sig, const ConjunctiveQuery& a, const ConjunctiveQuery& b);

bool satisfies(const RelationalStructure& db, const UnionQuery& q);

// JSON: {"elements":[...], "relations":{"R":{"arity":2,"tuples":[["a","b"],...]}}}
RelationalStructure relational_structure_from_json(const std::string& json_text);
std::string relational_structure_to_json(const RelationalStructure& s);

} // namespace rvc
