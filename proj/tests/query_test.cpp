#include <doctest.h>

#include <algorithm>

#include "rvc/query.hpp"

using namespace rvc;

namespace {

Signature sig_rs()
{
    Signature sig;
    sig.add("R", 2);
    sig.add("S", 2);
    return sig;
}

// Union-find oracle for connectivity, independent of analyze().
bool connected_oracle(const Signature& sig, const ConjunctiveQuery& cq)
{
    RelationalStructure db = canonical_database(sig, cq);
    int n = db.size();
    if (n <= 1)
        return true;
    std::vector<int> comp(n);
    for (int i = 0; i < n; ++i)
        comp[i] = i;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : sig.relations())
            for (const auto& t : db.tuples(r.name))
                for (size_t i = 1; i < t.size(); ++i) {
                    int a = std::min(comp[t[0]], comp[t[i]]);
                    int b = std::max(comp[t[0]], comp[t[i]]);
                    if (a != b) {
                        for (int& c : comp)
                            if (c == b)
                                c = a;
                        changed = true;
                    }
                }
    }
    for (int i = 0; i < n; ++i)
        if (comp[i] != comp[0])
            return false;
    return true;
}

} // namespace

TEST_CASE("parse_union_query basic rules")
{
    Signature sig = sig_rs();
    UnionQuery q = parse_union_query("q() :- R(x,y), S(y,z).", sig);
    REQUIRE(q.disjuncts.size() == 1);
    CHECK(q.disjuncts[0].variables == std::vector<std::string>{"x", "y", "z"});
    REQUIRE(q.disjuncts[0].atoms.size() == 2);
    CHECK(q.disjuncts[0].atoms[0].relation == "R");
    CHECK(q.disjuncts[0].atoms[1].args == std::vector<int>{1, 2});

    Signature sig1;
    sig1.add("R", 2);
    sig1.add("S", 1);
    UnionQuery u = parse_union_query("q() :- R(x,y). q() :- S(x).", sig1);
    CHECK(u.disjuncts.size() == 2);
}

TEST_CASE("parse_union_query reports errors with positions")
{
    Signature sig = sig_rs();
    CHECK_THROWS_AS(parse_union_query("q() :- R(x,y,z).", sig), ParseError);
    CHECK_THROWS_AS(parse_union_query("q() :- Q(x,y).", sig), ParseError);
    CHECK_THROWS_AS(parse_union_query("q() :- R(x,y)", sig), ParseError);
    CHECK_THROWS_AS(parse_union_query("q() :- R(x,y), S(y", sig), ParseError);
}

TEST_CASE("parse_query_file declarations")
{
    QueryFile qf = parse_query_file(
        "#relation R/2\n#relation S/2\n#exogenous S\nq() :- R(x,y), S(y,z).\n");
    CHECK(qf.signature.arity("R") == 2);
    CHECK(qf.exogenous == std::set<std::string>{"S"});
    CHECK(qf.query.disjuncts.size() == 1);
    CHECK_THROWS_AS(parse_query_file("#exogenous R\n"), ParseError);
}

TEST_CASE("parser keeps duplicate atoms")
{
    Signature sig = sig_rs();
    UnionQuery q = parse_union_query("q() :- R(x,y), R(x,y).", sig);
    CHECK(q.disjuncts[0].atoms.size() == 2);
}

TEST_CASE("canonical_database collapses duplicates and keeps loops")
{
    Signature sig = sig_rs();
    UnionQuery q = parse_union_query("q() :- R(x,y), S(y,z).", sig);
    RelationalStructure db = canonical_database(sig, q.disjuncts[0]);
    CHECK(db.size() == 3);
    CHECK(db.tuples("R") == std::set<Tuple>{{0, 1}});
    CHECK(db.tuples("S") == std::set<Tuple>{{1, 2}});

    UnionQuery loop = parse_union_query("q() :- R(x,x).", sig);
    RelationalStructure loop_db = canonical_database(sig, loop.disjuncts[0]);
    CHECK(loop_db.tuples("R") == std::set<Tuple>{{0, 0}});

    UnionQuery dup = parse_union_query("q() :- R(x,y), R(x,y).", sig);
    CHECK(canonical_database(sig, dup.disjuncts[0]).tuples("R").size() == 1);
}

TEST_CASE("canonical database and canonical query are mutually inverse")
{
    Signature sig = sig_rs();
    UnionQuery q = parse_union_query("q() :- R(x,y), S(y,z), R(z,x).", sig);
    RelationalStructure db = canonical_database(sig, q.disjuncts[0]);
    ConjunctiveQuery back = canonical_query(db);
    RelationalStructure again = canonical_database(sig, back);
    CHECK(again == db);
}

TEST_CASE("analyze: triangle, path, and the paper's complete-Gaifman query")
{
    Signature sig3;
    sig3.add("R", 2);
    sig3.add("S", 2);
    sig3.add("T", 2);
    UnionQuery tri = parse_union_query("q() :- R(x,y), S(y,z), T(z,x).", sig3);
    StructureReport rep = analyze(sig3, tri.disjuncts[0]);
    CHECK(rep.connected);
    CHECK(!rep.incidence_acyclic);
    CHECK(rep.gaifman_complete);

    Signature sig = sig_rs();
    UnionQuery path = parse_union_query("q() :- R(x,y), S(y,z).", sig);
    rep = analyze(sig, path.disjuncts[0]);
    CHECK(rep.connected);
    CHECK(rep.incidence_acyclic);
    CHECK(!rep.gaifman_complete);

    Signature sigm;
    sigm.add("R", 2);
    sigm.add("S", 1);
    UnionQuery mu = parse_union_query("q() :- S(x), R(x,y), R(y,x), R(y,y).", sigm);
    CHECK(analyze(sigm, mu.disjuncts[0]).gaifman_complete);
}

TEST_CASE("a repeated variable in one atom breaks incidence-acyclicity")
{
    Signature sig = sig_rs();
    UnionQuery loop = parse_union_query("q() :- R(x,x).", sig);
    CHECK(!analyze(sig, loop.disjuncts[0]).incidence_acyclic);
}

TEST_CASE("analyze.connected matches a union-find oracle on small queries")
{
    Signature sig = sig_rs();
    // All queries with up to 4 atoms over variables x1..x4, sampled
    // structurally: enumerate atom shapes deterministically.
    std::vector<std::pair<std::string, std::pair<int, int>>> shapes;
    for (int r = 0; r < 2; ++r)
        for (int u = 0; u < 4; ++u)
            for (int v = 0; v < 4; ++v)
                shapes.push_back({r ? "S" : "R", {u, v}});
    for (size_t s1 = 0; s1 < shapes.size(); s1 += 3) {
        for (size_t s2 = s1; s2 < shapes.size(); s2 += 5) {
            ConjunctiveQuery cq;
            std::map<int, int> vars;
            auto var = [&](int raw) {
                if (!vars.count(raw)) {
                    int id = static_cast<int>(cq.variables.size());
                    vars[raw] = id;
                    cq.variables.push_back("v" + std::to_string(raw));
                }
                return vars[raw];
            };
            for (size_t s : {s1, s2})
                cq.atoms.push_back(
                    {shapes[s].first, {var(shapes[s].second.first), var(shapes[s].second.second)}});
            CHECK(analyze(sig, cq).connected == connected_oracle(sig, cq));
        }
    }
}

TEST_CASE("enumerate_homomorphisms: dual examples")
{
    Signature sig = sig_rs();
    // The two-element dual of exists x,y,z. R(x,y) and S(y,z).
    RelationalStructure b(sig, {"0", "1"});
    b.add_tuple("R", {0, 1});
    b.add_tuple("R", {1, 1});
    b.add_tuple("S", {0, 0});
    b.add_tuple("S", {0, 1});

    UnionQuery mu = parse_union_query("q() :- R(x,y), S(y,z).", sig);
    RelationalStructure cdb = canonical_database(sig, mu.disjuncts[0]);
    CHECK(enumerate_homomorphisms(cdb, b).empty());

    RelationalStructure edge(sig, {"a", "b"});
    edge.add_tuple("R", {0, 1});
    auto homs = enumerate_homomorphisms(edge, b);
    // Exhaustive oracle over the 4 candidate maps.
    std::vector<std::vector<int>> expected;
    for (int fa = 0; fa < 2; ++fa)
        for (int fb = 0; fb < 2; ++fb)
            if (b.has_tuple("R", {fa, fb}))
                expected.push_back({fa, fb});
    std::sort(expected.begin(), expected.end());
    CHECK(homs == expected);

    // Identity homomorphism present on any structure.
    auto endos = enumerate_homomorphisms(b, b);
    std::vector<int> identity{0, 1};
    CHECK(std::find(endos.begin(), endos.end(), identity) != endos.end());
}

TEST_CASE("core_of shrinks duplicated components and keeps rigid paths")
{
    Signature sig;
    sig.add("R", 2);
    RelationalStructure two_edges(sig, {"a", "b", "c", "d"});
    two_edges.add_tuple("R", {0, 1});
    two_edges.add_tuple("R", {2, 3});
    RelationalStructure core = core_of(two_edges);
    CHECK(core.size() == 2);
    CHECK(core.tuples("R").size() == 1);

    RelationalStructure path(sig, {"a", "b", "c"});
    path.add_tuple("R", {0, 1});
    path.add_tuple("R", {1, 2});
    CHECK(core_of(path).size() == 3);

    RelationalStructure point(sig, {"a"});
    CHECK(core_of(point).size() == 1);
}

TEST_CASE("core_of is idempotent and homomorphically equivalent to the input")
{
    Signature sig;
    sig.add("R", 2);
    // All structures on up to 3 elements with up to 3 edges, sampled coarsely.
    for (int n = 1; n <= 3; ++n) {
        std::vector<std::pair<int, int>> pairs;
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                pairs.push_back({u, v});
        for (size_t mask = 0; mask < (size_t(1) << pairs.size()); mask += 2) {
            std::vector<std::string> names;
            for (int i = 0; i < n; ++i)
                names.push_back("e" + std::to_string(i));
            RelationalStructure s(sig, names);
            for (size_t i = 0; i < pairs.size(); ++i)
                if (mask & (size_t(1) << i))
                    s.add_tuple("R", {pairs[i].first, pairs[i].second});
            RelationalStructure c = core_of(s);
            CHECK(has_homomorphism(s, c));
            CHECK(has_homomorphism(c, s));
            RelationalStructure cc = core_of(c);
            CHECK(cc.size() == c.size());
        }
    }
}

TEST_CASE("implies: basic examples, reflexivity, transitivity")
{
    Signature sig;
    sig.add("R", 2);
    UnionQuery a = parse_union_query("q() :- R(x,y), R(y,z).", sig);
    UnionQuery b = parse_union_query("q() :- R(u,v).", sig);
    UnionQuery c = parse_union_query("q() :- R(u,u).", sig);
    CHECK(implies(sig, a.disjuncts[0], b.disjuncts[0]));
    CHECK(!implies(sig, b.disjuncts[0], c.disjuncts[0]));
    CHECK(implies(sig, a.disjuncts[0], a.disjuncts[0]));

    // Reflexive and transitive over a small query set.
    std::vector<ConjunctiveQuery> qs = {
        a.disjuncts[0],
        b.disjuncts[0],
        c.disjuncts[0],
        parse_union_query("q() :- R(x,y), R(y,x).", sig).disjuncts[0],
        parse_union_query("q() :- R(x,x), R(x,y).", sig).disjuncts[0],
    };
    for (const auto& q1 : qs)
        CHECK(implies(sig, q1, q1));
    for (const auto& q1 : qs)
        for (const auto& q2 : qs)
            for (const auto& q3 : qs)
                if (implies(sig, q1, q2) && implies(sig, q2, q3))
                    CHECK(implies(sig, q1, q3));
}

TEST_CASE("relational structure JSON round trip")
{
    Signature sig = sig_rs();
    RelationalStructure b(sig, {"0", "1"});
    b.add_tuple("R", {0, 1});
    b.add_tuple("S", {0, 0});
    RelationalStructure back = relational_structure_from_json(relational_structure_to_json(b));
    CHECK(back == b);
}
