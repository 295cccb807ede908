#include "rvc/bagdb.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rvc {

BagDatabase::BagDatabase(Signature sig, std::vector<std::string> elements)
    : sig_(std::move(sig)), elements_(std::move(elements))
{
    for (int i = 0; i < size(); ++i) {
        if (!element_index_.emplace(elements_[i], i).second)
            throw Error("duplicate element '" + elements_[i] + "'");
    }
    for (const auto& r : sig_.relations())
        relations_[r.name];
}

int BagDatabase::element_index(const std::string& name) const
{
    auto it = element_index_.find(name);
    if (it == element_index_.end())
        throw Error("unknown element '" + name + "'");
    return it->second;
}

void BagDatabase::add_tuple(const std::string& relation, Tuple t, long long multiplicity)
{
    if (multiplicity < 1)
        throw Error("multiplicity must be positive");
    int k = sig_.arity(relation);
    if (static_cast<int>(t.size()) != k)
        throw Error("arity mismatch for '" + relation + "'");
    for (int e : t)
        if (e < 0 || e >= size())
            throw Error("tuple element out of range");
    relations_[relation][std::move(t)] += multiplicity;
}

void BagDatabase::mark_relation_exogenous(const std::string& relation)
{
    if (!sig_.contains(relation))
        throw Error("unknown relation '" + relation + "'");
    exogenous_.insert(relation);
}

void BagDatabase::mark_tuple_exogenous(const std::string& relation, const Tuple& t)
{
    if (!sig_.contains(relation))
        throw Error("unknown relation '" + relation + "'");
    exogenous_tuples_[relation].insert(t);
}

const std::map<Tuple, long long>& BagDatabase::tuples(const std::string& relation) const
{
    auto it = relations_.find(relation);
    if (it == relations_.end())
        throw Error("unknown relation '" + relation + "'");
    return it->second;
}

long long BagDatabase::multiplicity(const std::string& relation, const Tuple& t) const
{
    const auto& m = tuples(relation);
    auto it = m.find(t);
    return it == m.end() ? 0 : it->second;
}

bool BagDatabase::tuple_exogenous(const std::string& relation, const Tuple& t) const
{
    if (exogenous_.count(relation))
        return true;
    auto it = exogenous_tuples_.find(relation);
    return it != exogenous_tuples_.end() && it->second.count(t) > 0;
}

bool BagDatabase::has_flagged_tuples(const std::string& relation) const
{
    auto it = exogenous_tuples_.find(relation);
    return it != exogenous_tuples_.end() && !it->second.empty();
}

long long BagDatabase::total_weight() const
{
    long long w = 0;
    for (const auto& [rel, tuples] : relations_)
        for (const auto& [t, mult] : tuples)
            w += mult;
    return w;
}

std::vector<TupleId> BagDatabase::endogenous_ids() const
{
    std::vector<TupleId> ids;
    for (const auto& [rel, tuples] : relations_)
        for (const auto& [t, mult] : tuples)
            if (!tuple_exogenous(rel, t))
                ids.push_back({rel, t});
    return ids;
}

RelationalStructure BagDatabase::set_structure() const
{
    RelationalStructure s(sig_, elements_);
    for (const auto& [rel, tuples] : relations_)
        for (const auto& [t, mult] : tuples)
            s.add_tuple(rel, t);
    return s;
}

BagDatabase BagDatabase::without(const std::vector<TupleId>& removed) const
{
    BagDatabase out(sig_, elements_);
    std::set<TupleId> drop(removed.begin(), removed.end());
    for (const auto& [rel, tuples] : relations_)
        for (const auto& [t, mult] : tuples)
            if (!drop.count({rel, t}))
                out.add_tuple(rel, t, mult);
    out.exogenous_ = exogenous_;
    out.exogenous_tuples_ = exogenous_tuples_;
    return out;
}

namespace {

    using nlohmann::json;

    std::vector<std::string> collect_elements(const json& j)
    {
        std::vector<std::string> elems;
        std::set<std::string> seen;
        auto push = [&](const std::string& e) {
            if (seen.insert(e).second)
                elems.push_back(e);
        };
        if (j.contains("elements"))
            for (const auto& e : j.at("elements"))
                push(e.get<std::string>());
        if (j.contains("relations"))
            for (const auto& [rel, rows] : j.at("relations").items())
                for (const auto& row : rows)
                    for (const auto& e : row.at(0))
                        push(e.get<std::string>());
        return elems;
    }

} // namespace

BagDatabase bag_database_from_json(const std::string& text, const Signature& sig,
    const std::set<std::string>& exogenous)
{
    json j = json::parse(text);
    BagDatabase db(sig, collect_elements(j));
    if (j.contains("relations")) {
        for (const auto& [rel, rows] : j.at("relations").items()) {
            if (!sig.contains(rel))
                throw Error("unknown relation '" + rel + "' in database");
            for (const auto& row : rows) {
                if (!row.is_array() || row.size() < 1 || row.size() > 2)
                    throw Error("relation row must be [[tuple...], mult?]");
                Tuple t;
                for (const auto& e : row.at(0))
                    t.push_back(db.element_index(e.get<std::string>()));
                long long mult = row.size() == 2 ? row.at(1).get<long long>() : 1;
                db.add_tuple(rel, std::move(t), mult);
            }
        }
    }
    for (const auto& rel : exogenous)
        db.mark_relation_exogenous(rel);
    if (j.contains("exogenous"))
        for (const auto& rel : j.at("exogenous"))
            db.mark_relation_exogenous(rel.get<std::string>());
    if (j.contains("exogenous_tuples")) {
        for (const auto& [rel, rows] : j.at("exogenous_tuples").items()) {
            for (const auto& row : rows) {
                Tuple t;
                for (const auto& e : row)
                    t.push_back(db.element_index(e.get<std::string>()));
                if (db.multiplicity(rel, t) == 0)
                    throw Error("exogenous tuple not present in relation '" + rel + "'");
                db.mark_tuple_exogenous(rel, t);
            }
        }
    }
    return db;
}

BagDatabase bag_database_from_csv_dir(const std::string& dir, const Signature& sig,
    const std::set<std::string>& exogenous)
{
    namespace fs = std::filesystem;
    struct Row {
        std::string relation;
        std::vector<std::string> fields;
        long long mult;
    };
    std::vector<Row> rows;
    std::vector<std::string> elems;
    std::set<std::string> seen;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".csv")
            continue;
        std::string rel = entry.path().stem().string();
        if (!sig.contains(rel))
            throw Error("unknown relation '" + rel + "' (file " + entry.path().string() + ")");
        int arity = sig.arity(rel);
        std::ifstream in(entry.path());
        if (!in)
            throw Error("cannot read " + entry.path().string());
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty())
                continue;
            std::vector<std::string> fields;
            std::stringstream ss(line);
            std::string field;
            while (std::getline(ss, field, ','))
                fields.push_back(field);
            long long mult = 1;
            if (static_cast<int>(fields.size()) == arity + 1) {
                try {
                    mult = std::stoll(fields.back());
                } catch (...) {
                    throw Error(entry.path().string() + ":" + std::to_string(lineno)
                        + ": bad multiplicity '" + fields.back() + "'");
                }
                fields.pop_back();
            }
            if (static_cast<int>(fields.size()) != arity)
                throw Error(entry.path().string() + ":" + std::to_string(lineno)
                    + ": expected " + std::to_string(arity) + " columns");
            for (const auto& e : fields)
                if (seen.insert(e).second)
                    elems.push_back(e);
            rows.push_back({rel, std::move(fields), mult});
        }
    }
    BagDatabase db(sig, elems);
    for (const auto& row : rows) {
        Tuple t;
        for (const auto& e : row.fields)
            t.push_back(db.element_index(e));
        db.add_tuple(row.relation, std::move(t), row.mult);
    }
    for (const auto& rel : exogenous)
        db.mark_relation_exogenous(rel);
    return db;
}

BagDatabase load_bag_database(const std::string& path, const Signature& sig,
    const std::set<std::string>& exogenous)
{
    if (std::filesystem::is_directory(path))
        return bag_database_from_csv_dir(path, sig, exogenous);
    std::ifstream in(path);
    if (!in)
        throw Error("cannot read " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return bag_database_from_json(buffer.str(), sig, exogenous);
}

} // namespace rvc
