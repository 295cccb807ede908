#include "rvc/query.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include <json.hpp>

namespace rvc {

void Signature::add(const std::string& name, int arity)
{
    if (name.empty())
        throw Error("empty relation name");
    if (arity < 1)
        throw Error("relation '" + name + "' must have arity >= 1");
    if (index_.count(name))
        throw Error("duplicate relation '" + name + "'");
    index_[name] = static_cast<int>(relations_.size());
    relations_.push_back({name, arity});
}

int Signature::arity(const std::string& name) const
{
    auto it = index_.find(name);
    if (it == index_.end())
        throw Error("unknown relation '" + name + "'");
    return relations_[it->second].arity;
}

RelationalStructure::RelationalStructure(Signature sig, std::vector<std::string> elements)
    : sig_(std::move(sig)), elements_(std::move(elements))
{
    for (const auto& r : sig_.relations())
        relations_[r.name];
}

int RelationalStructure::element_index(const std::string& name) const
{
    for (int i = 0; i < size(); ++i)
        if (elements_[i] == name)
            return i;
    throw Error("unknown element '" + name + "'");
}

void RelationalStructure::add_tuple(const std::string& relation, Tuple t)
{
    int k = sig_.arity(relation);
    if (static_cast<int>(t.size()) != k)
        throw Error("arity mismatch for '" + relation + "'");
    for (int e : t)
        if (e < 0 || e >= size())
            throw Error("tuple element out of range in '" + relation + "'");
    relations_[relation].insert(std::move(t));
}

bool RelationalStructure::has_tuple(const std::string& relation, const Tuple& t) const
{
    return tuples(relation).count(t) > 0;
}

const std::set<Tuple>& RelationalStructure::tuples(const std::string& relation) const
{
    auto it = relations_.find(relation);
    if (it == relations_.end())
        throw Error("unknown relation '" + relation + "'");
    return it->second;
}

RelationalStructure RelationalStructure::induced(const std::vector<int>& keep) const
{
    std::vector<int> old_to_new(size(), -1);
    std::vector<std::string> names;
    for (int e : keep) {
        old_to_new[e] = static_cast<int>(names.size());
        names.push_back(elements_[e]);
    }
    RelationalStructure out(sig_, names);
    for (const auto& [rel, tuples] : relations_) {
        for (const auto& t : tuples) {
            Tuple mapped;
            mapped.reserve(t.size());
            bool inside = true;
            for (int e : t) {
                if (old_to_new[e] < 0) {
                    inside = false;
                    break;
                }
                mapped.push_back(old_to_new[e]);
            }
            if (inside)
                out.add_tuple(rel, std::move(mapped));
        }
    }
    return out;
}

namespace {

    struct Cursor {
        const std::string& text;
        size_t pos = 0;
        int line = 1;
        int col = 1;

        bool done() const { return pos >= text.size(); }
        char peek() const { return done() ? '\0' : text[pos]; }

        char next()
        {
            char c = text[pos++];
            if (c == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            return c;
        }

        void skip_ws_and_comments()
        {
            while (!done()) {
                char c = peek();
                if (std::isspace(static_cast<unsigned char>(c))) {
                    next();
                } else if (c == '%') { // comment to end of line
                    while (!done() && peek() != '\n')
                        next();
                } else {
                    break;
                }
            }
        }

        [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line, col); }

        void expect(char c)
        {
            if (peek() != c)
                fail(std::string("expected '") + c + "'");
            next();
        }

        bool try_consume(char c)
        {
            if (peek() == c) {
                next();
                return true;
            }
            return false;
        }

        std::string identifier()
        {
            if (!std::isalpha(static_cast<unsigned char>(peek())) && peek() != '_')
                fail("expected identifier");
            std::string s;
            while (!done()
                && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
                s += next();
            return s;
        }
    };

    ConjunctiveQuery parse_rule_body(Cursor& cur, const Signature& sig)
    {
        ConjunctiveQuery cq;
        std::map<std::string, int> var_index;
        auto var_id = [&](const std::string& v) {
            auto it = var_index.find(v);
            if (it != var_index.end())
                return it->second;
            int id = static_cast<int>(cq.variables.size());
            var_index[v] = id;
            cq.variables.push_back(v);
            return id;
        };
        for (;;) {
            cur.skip_ws_and_comments();
            int at_line = cur.line, at_col = cur.col;
            std::string rel = cur.identifier();
            if (!sig.contains(rel))
                throw ParseError("unknown relation '" + rel + "'", at_line, at_col);
            cur.skip_ws_and_comments();
            cur.expect('(');
            Atom atom{rel, {}};
            for (;;) {
                cur.skip_ws_and_comments();
                atom.args.push_back(var_id(cur.identifier()));
                cur.skip_ws_and_comments();
                if (cur.try_consume(','))
                    continue;
                cur.expect(')');
                break;
            }
            if (static_cast<int>(atom.args.size()) != sig.arity(rel))
                throw ParseError("arity mismatch: '" + rel + "' expects "
                        + std::to_string(sig.arity(rel)) + " arguments, got "
                        + std::to_string(atom.args.size()),
                    at_line, at_col);
            cq.atoms.push_back(std::move(atom));
            cur.skip_ws_and_comments();
            if (cur.try_consume(','))
                continue;
            cur.expect('.');
            break;
        }
        return cq;
    }

    // Returns the disjunct for one rule `q() :- body.`; all heads must agree.
    ConjunctiveQuery parse_rule(Cursor& cur, const Signature& sig, std::string& head)
    {
        std::string h = cur.identifier();
        cur.skip_ws_and_comments();
        cur.expect('(');
        cur.skip_ws_and_comments();
        cur.expect(')');
        if (head.empty())
            head = h;
        else if (head != h)
            cur.fail("all rules must share one head, saw '" + h + "' after '" + head + "'");
        cur.skip_ws_and_comments();
        cur.expect(':');
        cur.expect('-');
        return parse_rule_body(cur, sig);
    }

} // namespace

UnionQuery parse_union_query(const std::string& text, const Signature& sig)
{
    Cursor cur{text};
    UnionQuery uq;
    uq.signature = sig;
    std::string head;
    cur.skip_ws_and_comments();
    while (!cur.done()) {
        uq.disjuncts.push_back(parse_rule(cur, sig, head));
        cur.skip_ws_and_comments();
    }
    if (uq.disjuncts.empty())
        cur.fail("no rules");
    return uq;
}

QueryFile parse_query_file(const std::string& text)
{
    Cursor cur{text};
    QueryFile out;
    std::string head;
    cur.skip_ws_and_comments();
    while (!cur.done()) {
        if (cur.try_consume('#')) {
            std::string keyword = cur.identifier();
            cur.skip_ws_and_comments();
            if (keyword == "relation") {
                std::string name = cur.identifier();
                cur.skip_ws_and_comments();
                cur.expect('/');
                cur.skip_ws_and_comments();
                std::string digits;
                while (std::isdigit(static_cast<unsigned char>(cur.peek())))
                    digits += cur.next();
                if (digits.empty())
                    cur.fail("expected arity");
                out.signature.add(name, std::stoi(digits));
            } else if (keyword == "exogenous") {
                std::string name = cur.identifier();
                if (!out.signature.contains(name))
                    cur.fail("exogenous declaration for unknown relation '" + name + "'");
                out.exogenous.insert(name);
            } else {
                cur.fail("unknown declaration '#" + keyword + "'");
            }
        } else {
            out.query.disjuncts.push_back(parse_rule(cur, out.signature, head));
        }
        cur.skip_ws_and_comments();
    }
    if (out.query.disjuncts.empty())
        throw ParseError("no rules", cur.line, cur.col);
    out.query.signature = out.signature;
    return out;
}

RelationalStructure canonical_database(const Signature& sig, const ConjunctiveQuery& cq)
{
    RelationalStructure db(sig, cq.variables);
    for (const auto& atom : cq.atoms)
        db.add_tuple(atom.relation, atom.args);
    return db;
}

ConjunctiveQuery canonical_query(const RelationalStructure& s)
{
    ConjunctiveQuery cq;
    cq.variables = s.elements();
    for (const auto& r : s.signature().relations())
        for (const auto& t : s.tuples(r.name))
            cq.atoms.push_back({r.name, t});
    return cq;
}

namespace {

    struct UnionFind {
        std::vector<int> parent;
        explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
        int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
        // Returns false if x and y were already joined.
        bool unite(int x, int y)
        {
            x = find(x);
            y = find(y);
            if (x == y)
                return false;
            parent[x] = y;
            return true;
        }
    };

} // namespace

StructureReport analyze(const Signature& sig, const ConjunctiveQuery& cq)
{
    StructureReport rep;
    RelationalStructure db = canonical_database(sig, cq);
    int n = db.size();

    // Connectivity: elements joined through shared tuples.
    UnionFind uf(n);
    int components = n;
    for (const auto& r : sig.relations())
        for (const auto& t : db.tuples(r.name))
            for (size_t i = 1; i < t.size(); ++i)
                if (uf.unite(t[0], t[i]))
                    --components;
    rep.connected = components <= 1;

    // Incidence multigraph on variables and distinct tuples: one edge per
    // position, so a variable repeated within one tuple is already a cycle.
    int tuple_nodes = 0;
    bool cycle = false;
    UnionFind inc(n + static_cast<int>(cq.atoms.size()));
    for (const auto& r : sig.relations()) {
        for (const auto& t : db.tuples(r.name)) {
            int node = n + tuple_nodes++;
            for (int e : t)
                if (!inc.unite(e, node))
                    cycle = true;
        }
    }
    rep.incidence_acyclic = !cycle;

    std::set<std::pair<int, int>> cooccur;
    for (const auto& r : sig.relations())
        for (const auto& t : db.tuples(r.name))
            for (size_t i = 0; i < t.size(); ++i)
                for (size_t j = i + 1; j < t.size(); ++j)
                    if (t[i] != t[j])
                        cooccur.insert({std::min(t[i], t[j]), std::max(t[i], t[j])});
    rep.gaifman_complete
        = static_cast<int>(cooccur.size()) == n * (n - 1) / 2;
    return rep;
}

namespace {

    struct HomSearch {
        const RelationalStructure& src;
        const RelationalStructure& dst;
        std::optional<size_t> limit;
        std::vector<std::vector<int>> out;

        std::vector<int> order; // src elements, descending tuple-degree
        std::vector<int> assignment;
        // Tuples indexed by the earliest position in `order` at which all of
        // their elements are assigned.
        std::vector<std::vector<std::pair<const std::string*, const Tuple*>>> checks;

        explicit HomSearch(const RelationalStructure& s, const RelationalStructure& d,
            std::optional<size_t> lim)
            : src(s), dst(d), limit(lim)
        {
            int n = src.size();
            std::vector<int> degree(n, 0);
            for (const auto& r : src.signature().relations())
                for (const auto& t : src.tuples(r.name))
                    for (int e : t)
                        ++degree[e];
            order.resize(n);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                [&](int a, int b) { return degree[a] > degree[b]; });
            std::vector<int> depth_of(n);
            for (int i = 0; i < n; ++i)
                depth_of[order[i]] = i;
            checks.resize(n + 1);
            for (const auto& r : src.signature().relations()) {
                for (const auto& t : src.tuples(r.name)) {
                    int last = 0;
                    for (int e : t)
                        last = std::max(last, depth_of[e] + 1);
                    checks[last].push_back({&r.name, &t});
                }
            }
            assignment.assign(n, -1);
        }

        bool consistent(int depth) const
        {
            for (auto [rel, t] : checks[depth]) {
                Tuple image;
                image.reserve(t->size());
                for (int e : *t)
                    image.push_back(assignment[e]);
                if (!dst.has_tuple(*rel, image))
                    return false;
            }
            return true;
        }

        bool run(int depth) // returns true when the limit is reached
        {
            if (depth == static_cast<int>(order.size())) {
                out.push_back(assignment);
                return limit && out.size() >= *limit;
            }
            int v = order[depth];
            for (int b = 0; b < dst.size(); ++b) {
                assignment[v] = b;
                if (consistent(depth + 1) && run(depth + 1))
                    return true;
            }
            assignment[v] = -1;
            return false;
        }
    };

} // namespace

std::vector<std::vector<int>> enumerate_homomorphisms(const RelationalStructure& src,
    const RelationalStructure& dst, std::optional<size_t> limit)
{
    if (!(src.signature() == dst.signature()))
        throw Error("homomorphism requires equal signatures");
    if (src.size() == 0)
        return {{}};
    if (dst.size() == 0)
        return {};
    HomSearch search(src, dst, limit);
    // Tuples with no variables cannot occur (arities >= 1), so depth-0 checks
    // are always empty and the search starts unconstrained.
    search.run(0);
    std::sort(search.out.begin(), search.out.end());
    return search.out;
}

bool has_homomorphism(const RelationalStructure& src, const RelationalStructure& dst)
{
    return !enumerate_homomorphisms(src, dst, 1).empty();
}

RelationalStructure core_of(const RelationalStructure& s)
{
    int n = s.size();
    if (n <= 1)
        return s;
    // Smallest induced substructure receiving a homomorphism from s; subsets
    // of a given size are tried in lexicographic order for determinism.
    for (int k = 1; k <= n; ++k) {
        std::vector<int> pick(k);
        std::iota(pick.begin(), pick.end(), 0);
        for (;;) {
            RelationalStructure candidate = s.induced(pick);
            if (has_homomorphism(s, candidate))
                return candidate;
            int i = k - 1;
            while (i >= 0 && pick[i] == n - k + i)
                --i;
            if (i < 0)
                break;
            ++pick[i];
            for (int j = i + 1; j < k; ++j)
                pick[j] = pick[j - 1] + 1;
        }
    }
    return s; // k == n always succeeds via the identity
}

bool implies(const Signature& sig, const ConjunctiveQuery& a, const ConjunctiveQuery& b)
{
    return has_homomorphism(canonical_database(sig, b), canonical_database(sig, a));
}

bool satisfies(const RelationalStructure& db, const UnionQuery& q)
{
    for (const auto& cq : q.disjuncts)
        if (has_homomorphism(canonical_database(q.signature, cq), db))
            return true;
    return false;
}

RelationalStructure relational_structure_from_json(const std::string& json_text)
{
    nlohmann::json j = nlohmann::json::parse(json_text);
    Signature sig;
    for (auto& [name, rj] : j.at("relations").items())
        sig.add(name, rj.at("arity").get<int>());
    std::vector<std::string> elements = j.at("elements").get<std::vector<std::string>>();
    RelationalStructure s(sig, elements);
    std::map<std::string, int> index;
    for (int i = 0; i < s.size(); ++i)
        if (!index.emplace(elements[i], i).second)
            throw Error("duplicate element '" + elements[i] + "'");
    for (auto& [name, rj] : j.at("relations").items()) {
        if (!rj.contains("tuples"))
            continue;
        for (auto& row : rj.at("tuples")) {
            Tuple t;
            for (auto& e : row) {
                auto it = index.find(e.get<std::string>());
                if (it == index.end())
                    throw Error("unknown element '" + e.get<std::string>() + "'");
                t.push_back(it->second);
            }
            s.add_tuple(name, std::move(t));
        }
    }
    return s;
}

std::string relational_structure_to_json(const RelationalStructure& s)
{
    nlohmann::json j;
    j["elements"] = s.elements();
    nlohmann::json rels = nlohmann::json::object();
    for (const auto& rinfo : s.signature().relations()) {
        nlohmann::json rj;
        rj["arity"] = rinfo.arity;
        nlohmann::json tuples = nlohmann::json::array();
        for (const auto& t : s.tuples(rinfo.name)) {
            nlohmann::json row = nlohmann::json::array();
            for (int e : t)
                row.push_back(s.elements()[e]);
            tuples.push_back(std::move(row));
        }
        rj["tuples"] = std::move(tuples);
        rels[rinfo.name] = std::move(rj);
    }
    j["relations"] = std::move(rels);
    return j.dump(2);
}

} // namespace rvc
