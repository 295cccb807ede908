#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rvc/query.hpp"

namespace rvc {

struct TupleId {
    std::string relation;
    Tuple tuple;
    auto operator<=>(const TupleId&) const = default;
};

// Finite bag database: tuples carry positive multiplicities; a relation or an
// individual tuple may be exogenous (not removable).
class BagDatabase {
public:
    BagDatabase() = default;
    BagDatabase(Signature sig, std::vector<std::string> elements);

    const Signature& signature() const { return sig_; }
    const std::vector<std::string>& elements() const { return elements_; }
    int size() const { return static_cast<int>(elements_.size()); }
    int element_index(const std::string& name) const;

    // Adding an existing tuple accumulates multiplicity.
    void add_tuple(const std::string& relation, Tuple t, long long multiplicity = 1);
    void mark_relation_exogenous(const std::string& relation);
    void mark_tuple_exogenous(const std::string& relation, const Tuple& t);

    const std::map<Tuple, long long>& tuples(const std::string& relation) const;
    long long multiplicity(const std::string& relation, const Tuple& t) const; // 0 if absent
    const std::set<std::string>& exogenous_relations() const { return exogenous_; }
    bool relation_exogenous(const std::string& relation) const { return exogenous_.count(relation) > 0; }
    bool tuple_exogenous(const std::string& relation, const Tuple& t) const;
    bool has_flagged_tuples(const std::string& relation) const;

    long long total_weight() const;
    std::vector<TupleId> endogenous_ids() const; // deterministic order

    RelationalStructure set_structure() const;
    BagDatabase without(const std::vector<TupleId>& removed) const;

private:
    Signature sig_;
    std::vector<std::string> elements_;
    std::map<std::string, int> element_index_;
    std::map<std::string, std::map<Tuple, long long>> relations_;
    std::set<std::string> exogenous_;
    std::map<std::string, std::set<Tuple>> exogenous_tuples_;
};

// JSON format (README): {"elements":[...], "relations":{"R":[[["a","b"],3],...]},
// "exogenous":["S"], "exogenous_tuples":{"R":[["c","d"]]}}.
BagDatabase bag_database_from_json(const std::string& text, const Signature& sig,
    const std::set<std::string>& exogenous = {});

// One CSV file per relation (<dir>/<name>.csv), columns = tuple positions plus
// an optional trailing multiplicity; repeated rows accumulate.
BagDatabase bag_database_from_csv_dir(const std::string& dir, const Signature& sig,
    const std::set<std::string>& exogenous = {});

// Dispatch on path: directory -> CSV, file -> JSON.
BagDatabase load_bag_database(const std::string& path, const Signature& sig,
    const std::set<std::string>& exogenous = {});

} // namespace rvc
