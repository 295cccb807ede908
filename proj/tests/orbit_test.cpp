#include <doctest.h>

#include "rvc/gadgets.hpp"
#include "rvc/orbit.hpp"
#include "rvc/resilience.hpp"

using namespace rvc;

namespace {

UnionQuery mu2_query()
{
    Signature sig;
    sig.add("R", 2);
    return parse_union_query("q() :- R(x,y), R(y,x).", sig);
}

} // namespace

TEST_CASE("orbit types of the symmetric-edge query")
{
    UnionQuery mu2 = mu2_query();
    auto types2 = enumerate_orbit_types(mu2, 2);
    // Merged point without a loop; two points with no edge, forward edge,
    // backward edge.
    CHECK(types2.size() == 4);
    auto types1 = enumerate_orbit_types(mu2, 1);
    CHECK(types1.size() == 1);
}

TEST_CASE("orbit types of the triangle query at m=1")
{
    auto types = enumerate_orbit_types(triangle_query(), 1);
    // All loop subsets except all three (x=y=z would realize the triangle).
    CHECK(types.size() == 7);
}

TEST_CASE("orbit type count is monotone in m")
{
    UnionQuery mu2 = mu2_query();
    size_t prev = 0;
    for (int m = 1; m <= 3; ++m) {
        size_t count = enumerate_orbit_types(mu2, m).size();
        CHECK(count >= prev);
        prev = count;
    }
}

TEST_CASE("orbit enumeration needs Gaifman-complete disjuncts")
{
    Signature sig;
    sig.add("R", 2);
    sig.add("S", 2);
    UnionQuery path = parse_union_query("q() :- R(x,y), S(y,z).", sig);
    CHECK_THROWS_WITH_AS(static_cast<void>(enumerate_orbit_types(path, 2)),
        doctest::Contains("disjunct 1"), Error);
}

TEST_CASE("type structure prices starred relations and compatibility")
{
    UnionQuery mu2 = mu2_query();
    TypeStructure ts = build_type_structure(mu2, {}, 2);
    REQUIRE(ts.types.size() == 4);

    int forward = -1, empty_type = -1;
    for (size_t t = 0; t < ts.types.size(); ++t) {
        if (ts.types[t].block_of == std::vector<int>{0, 1}) {
            if (ts.types[t].quotient.tuples("R") == std::set<Tuple>{{0, 1}})
                forward = static_cast<int>(t);
            if (ts.types[t].quotient.tuples("R").empty())
                empty_type = static_cast<int>(t);
        }
    }
    REQUIRE(forward >= 0);
    REQUIRE(empty_type >= 0);
    const ValuedRelation& rstar = ts.structure.relation("R*");
    CHECK(rstar.at({forward}) == Cost(0));
    CHECK(rstar.at({empty_type}) == Cost(1));

    // Identity projections are reflexively compatible.
    const ValuedRelation& c_id = ts.structure.relation(
        TypeStructure::compat_name({1, 2}, {1, 2}));
    for (int t = 0; t < static_cast<int>(ts.types.size()); ++t)
        CHECK(c_id.at({t, t}) == Cost(0));

    // Exogenous pricing: misses become infinite.
    TypeStructure ts_exo = build_type_structure(mu2, {"R"}, 2);
    CHECK(ts_exo.structure.relation("R*").at({empty_type}).is_infinite());
}

TEST_CASE("compatibility relations are symmetric and transitive across projections")
{
    UnionQuery mu2 = mu2_query();
    TypeStructure ts = build_type_structure(mu2, {}, 2);
    int nt = static_cast<int>(ts.types.size());
    std::vector<std::vector<int>> maps{{1}, {2}, {1, 1}, {1, 2}, {2, 1}, {2, 2}};
    for (const auto& i : maps) {
        for (const auto& j : maps) {
            if (i.size() != j.size())
                continue;
            const ValuedRelation& cij = ts.structure.relation(TypeStructure::compat_name(i, j));
            const ValuedRelation& cji = ts.structure.relation(TypeStructure::compat_name(j, i));
            for (int t1 = 0; t1 < nt; ++t1)
                for (int t2 = 0; t2 < nt; ++t2)
                    CHECK((cij.at({t1, t2}) == Cost(0)) == (cji.at({t2, t1}) == Cost(0)));
            // Transitivity through a chained middle type.
            for (const auto& k : maps) {
                if (k.size() != i.size())
                    continue;
                const ValuedRelation& cjk
                    = ts.structure.relation(TypeStructure::compat_name(j, k));
                const ValuedRelation& cik
                    = ts.structure.relation(TypeStructure::compat_name(i, k));
                for (int t1 = 0; t1 < nt; ++t1)
                    for (int t2 = 0; t2 < nt; ++t2)
                        for (int t3 = 0; t3 < nt; ++t3)
                            if (cij.at({t1, t2}) == Cost(0) && cjk.at({t2, t3}) == Cost(0))
                                CHECK(cik.at({t1, t3}) == Cost(0));
            }
        }
    }
}

TEST_CASE("reduce_to_type_instance shapes")
{
    UnionQuery mu2 = mu2_query();
    TypeStructure ts = build_type_structure(mu2, {}, 2);
    TauExpression expr;
    expr.variables = {"a", "b", "c"};
    expr.summands = {{"R", {0, 1}}};
    VcspInstance inst = reduce_to_type_instance(expr, 5, ts);
    CHECK(inst.expr.variables.size() == 9); // n^m
    CHECK(inst.threshold == Rational(5));
    int starred = 0;
    for (const auto& atom : inst.expr.summands)
        if (atom.relation == "R*")
            ++starred;
    CHECK(starred == 1);
}

TEST_CASE("types route equals the oracle for the symmetric-edge query")
{
    UnionQuery mu2 = mu2_query();
    Signature sig = mu2.signature;

    // The paper's little example: R = {(a,b):1, (b,a):2} has resilience 1.
    BagDatabase db(sig, {"a", "b"});
    db.add_tuple("R", {0, 1}, 1);
    db.add_tuple("R", {1, 0}, 2);
    ResilienceOptions opts;
    opts.route = Route::Types;
    ResilienceResult res = resilience_solve(db, mu2, opts);
    CHECK(res.value == Cost(1));
    CHECK(brute_force_resilience(db, mu2) == Cost(1));

    // Oracle agreement across small databases, at the default m and at m = 3.
    struct Rng {
        uint64_t s;
        int below(int n)
        {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            return static_cast<int>(s % n);
        }
    } rng{12345};
    for (int trial = 0; trial < 40; ++trial) {
        int n = 1 + rng.below(3);
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i)
            names.push_back("e" + std::to_string(i));
        BagDatabase d(sig, names);
        int tuples = rng.below(5);
        for (int t = 0; t < tuples; ++t)
            d.add_tuple("R", {rng.below(n), rng.below(n)}, 1 + rng.below(2));
        Cost oracle = brute_force_resilience(d, mu2);
        for (int m : {2, 3}) {
            ResilienceOptions o;
            o.route = Route::Types;
            o.type_arity = m;
            CHECK(resilience_solve(d, mu2, o).value == oracle);
        }
    }
}
