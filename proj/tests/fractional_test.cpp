#include <doctest.h>

#include "rvc/fractional.hpp"
#include "rvc/solve.hpp"

using namespace rvc;

namespace {

OperationTable table_from(int arity, int domain, std::vector<int> values)
{
    OperationTable op;
    op.arity = arity;
    op.domain_size = domain;
    op.table = std::move(values);
    return op;
}

OperationTable min_op_2()
{
    return table_from(2, 2, {0, 0, 0, 1}); // rows (0,0),(0,1),(1,0),(1,1)
}

OperationTable max_op_2()
{
    return table_from(2, 2, {0, 1, 1, 1});
}

ValuedStructure findual_gamma()
{
    Signature sig;
    sig.add("R", 2);
    sig.add("S", 2);
    RelationalStructure b(sig, {"0", "1"});
    b.add_tuple("R", {0, 1});
    b.add_tuple("R", {1, 1});
    b.add_tuple("S", {0, 0});
    b.add_tuple("S", {0, 1});
    return dual_to_valued(b, {});
}

} // namespace

TEST_CASE("min/max with weight 1/2 improves the finite-dual relations")
{
    FractionalOperation omega;
    omega.arity = 2;
    omega.support = {{min_op_2(), Rational(1, 2)}, {max_op_2(), Rational(1, 2)}};
    omega.validate();
    ValuedStructure g = findual_gamma();
    CHECK(improves(omega, g.relation("R")));
    CHECK(improves(omega, g.relation("S")));
    CHECK(is_fractional_polymorphism(omega, g));
}

TEST_CASE("min alone does not improve the max-cut relation")
{
    FractionalOperation omega;
    omega.arity = 2;
    omega.support = {{min_op_2(), Rational(1)}};
    ValuedStructure g = gamma_less();
    CHECK(!improves(omega, g.relation("lt")));
}

TEST_CASE("the uniform projection distribution improves every relation")
{
    ValuedStructure g = gamma_less();
    for (int ell = 1; ell <= 3; ++ell) {
        FractionalOperation id = FractionalOperation::identity(ell, 2);
        CHECK(is_fractional_polymorphism(id, g));
    }
    ValuedStructure gd = findual_gamma();
    CHECK(is_fractional_polymorphism(FractionalOperation::identity(2, 2), gd));
}

TEST_CASE("a table-preserving permutation with weight 1 is a fractional polymorphism")
{
    // Structures on domains up to 4 whose tables are preserved by swapping.
    Signature sig;
    sig.add("E", 2);
    for (int n = 2; n <= 4; ++n) {
        std::vector<std::string> names;
        for (int i = 0; i < n; ++i)
            names.push_back(std::to_string(i));
        ValuedStructure g(sig, names);
        ValuedRelation e(2, n);
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                e.at({x, y}) = x == y ? Cost(0) : Cost(1);
        g.set_relation("E", std::move(e));
        // Every permutation preserves the equality-pattern table.
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i)
            perm[i] = (i + 1) % n;
        FractionalOperation omega;
        omega.arity = 1;
        omega.support = {{table_from(1, n, perm), Rational(1)}};
        CHECK(is_fractional_polymorphism(omega, g));
    }
}

TEST_CASE("improvement is preserved under shifting and scaling")
{
    ValuedStructure g = findual_gamma();
    FractionalOperation omega;
    omega.arity = 2;
    omega.support = {{min_op_2(), Rational(1, 2)}, {max_op_2(), Rational(1, 2)}};
    for (const char* rel : {"R", "S"}) {
        ValuedRelation base = g.relation(rel);
        REQUIRE(improves(omega, base));
        CHECK(improves(omega, shift(base, Rational(5, 3))));
        CHECK(improves(omega, shift(base, Rational(-2))));
        CHECK(improves(omega, scale(base, Rational(7, 2))));
        CHECK(improves(omega, scale(shift(base, Rational(1, 2)), Rational(3))));
    }
}

TEST_CASE("find_cyclic_fpol: min-cut yes, max-cut no")
{
    CyclicSearch ge = find_cyclic_fpol(gamma_geq(), 2);
    REQUIRE(ge.outcome == SearchOutcome::Found);
    CHECK(is_fractional_polymorphism(*ge.omega, gamma_geq()));
    for (const auto& [op, w] : ge.omega->support)
        CHECK(op.is_cyclic());

    CyclicSearch lt = find_cyclic_fpol(gamma_less(), 2);
    CHECK(lt.outcome == SearchOutcome::None);
}

TEST_CASE("find_cyclic_fpol: all-zero structure accepts any cyclic table")
{
    Signature sig;
    sig.add("Z", 2);
    ValuedStructure g(sig, {"0", "1"});
    g.set_relation("Z", ValuedRelation(2, 2, Cost(0)));
    CyclicSearch res = find_cyclic_fpol(g, 2);
    REQUIRE(res.outcome == SearchOutcome::Found);
    CHECK(is_fractional_polymorphism(*res.omega, g));
}

TEST_CASE("find_cyclic_fpol respects the operation cap")
{
    Signature sig;
    sig.add("Z", 2);
    std::vector<std::string> names{"0", "1", "2", "3"};
    ValuedStructure g(sig, names);
    g.set_relation("Z", ValuedRelation(2, 4, Cost(0)));
    // 4^10 cyclic binary tables on a 4-element domain exceed the default cap.
    CHECK(find_cyclic_fpol(g, 2).outcome == SearchOutcome::CapExceeded);
}

TEST_CASE("the min/max certificate is feasible for the min-cut search")
{
    FractionalOperation omega;
    omega.arity = 2;
    omega.support = {{min_op_2(), Rational(1, 2)}, {max_op_2(), Rational(1, 2)}};
    CHECK(is_fractional_polymorphism(omega, gamma_geq()));
}

TEST_CASE("siggers_in_support separates min-cut from max-cut")
{
    CHECK(siggers_in_support(gamma_geq()));
    CHECK(!siggers_in_support(gamma_less()));
}

TEST_CASE("siggers_in_support: all-zero structure and cap")
{
    Signature sig;
    sig.add("Z", 1);
    ValuedStructure g(sig, {"0", "1"});
    g.set_relation("Z", ValuedRelation(1, 2, Cost(0)));
    CHECK(siggers_in_support(g));

    std::vector<std::string> names{"0", "1", "2"};
    ValuedStructure g3(sig, names);
    g3.set_relation("Z", ValuedRelation(1, 3, Cost(0)));
    CHECK_THROWS_AS(siggers_in_support(g3), CapExceeded);
}

TEST_CASE("core_reduce: collapsible unary structure and rigid max-cut")
{
    Signature sig;
    sig.add("U", 1);
    ValuedStructure g(sig, {"0", "1", "2"});
    ValuedRelation u(1, 3);
    u.at({0}) = Cost(0);
    u.at({1}) = Cost(0);
    u.at({2}) = Cost::infinity();
    g.set_relation("U", std::move(u));
    // The map 2 -> 0 is in the support, so the first restriction drops 2;
    // with both remaining costs 0, collapsing 1 into 0 stays improving, so
    // the fixpoint is a single element.
    ValuedStructure core = core_reduce(g);
    CHECK(core.domain_size() == 1);
    CHECK(core.domain()[0] == "0");

    ValuedStructure lt_core = core_reduce(gamma_less());
    CHECK(lt_core.domain_size() == 2);

    Signature s1;
    s1.add("U", 1);
    ValuedStructure one(s1, {"only"});
    one.set_relation("U", ValuedRelation(1, 1, Cost(0)));
    CHECK(core_reduce(one).domain_size() == 1);
}

TEST_CASE("core_reduce first step keeps the two finite-cost elements")
{
    // Intermediate behaviour of the same structure: the infinite element goes
    // first; verify via the per-operation LP reasoning that 2 -> 0 improves.
    Signature sig;
    sig.add("U", 1);
    ValuedStructure g(sig, {"0", "1", "2"});
    ValuedRelation u(1, 3);
    u.at({0}) = Cost(0);
    u.at({1}) = Cost(0);
    u.at({2}) = Cost::infinity();
    g.set_relation("U", std::move(u));
    OperationTable collapse = table_from(1, 3, {0, 1, 0});
    FractionalOperation omega;
    omega.arity = 1;
    omega.support = {{collapse, Rational(1)}};
    CHECK(is_fractional_polymorphism(omega, g));
}

TEST_CASE("cyclic fpol existence aligns with BLP exactness on submodular instances")
{
    // Sanity linkage: gamma_geq has a binary cyclic fractional polymorphism and
    // BLP matches the exact optimum on its instances (checked in solve tests);
    // here we spot-check a couple of instances end to end.
    REQUIRE(find_cyclic_fpol(gamma_geq(), 2).outcome == SearchOutcome::Found);
    ValuedStructure g = gamma_geq();
    TauExpression e;
    e.variables = {"x", "y", "z"};
    e.summands = {{"geq", {0, 1}}, {"geq", {1, 2}}, {"geq", {2, 0}}, {"geq", {0, 2}}};
    CHECK(solve_blp(e, g).bound == solve_exact(e, g).cost);
}
