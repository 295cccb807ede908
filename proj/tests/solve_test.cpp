#include <doctest.h>

#include "rvc/solve.hpp"

using namespace rvc;

namespace {

struct Rng {
    uint64_t state;
    explicit Rng(uint64_t seed) : state(seed) {}
    uint64_t next()
    {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    }
    int below(int n) { return static_cast<int>(next() % n); }
};

// Exhaustive oracle for the optimum, independent of the branch-and-bound.
Cost enumerate_min(const TauExpression& expr, const ValuedStructure& gamma)
{
    int n = static_cast<int>(expr.variables.size());
    int nd = gamma.domain_size();
    Assignment a(n, 0);
    Cost best = Cost::infinity();
    for (;;) {
        Cost c = evaluate(expr, gamma, a);
        if (c < best)
            best = c;
        int p = n - 1;
        while (p >= 0 && a[p] == nd - 1)
            a[p--] = 0;
        if (p < 0)
            break;
        ++a[p];
    }
    return best;
}

ValuedStructure random_structure(Rng& rng, int domain, int relations, bool allow_inf)
{
    Signature sig;
    for (int r = 0; r < relations; ++r)
        sig.add("A" + std::to_string(r), 1 + rng.below(2));
    std::vector<std::string> names;
    for (int i = 0; i < domain; ++i)
        names.push_back(std::to_string(i));
    ValuedStructure g(sig, names);
    for (const auto& rinfo : sig.relations()) {
        ValuedRelation rel(rinfo.arity, domain);
        for (size_t i = 0; i < rel.table_size(); ++i) {
            int roll = rng.below(allow_inf ? 5 : 4);
            rel.at_index(i) = roll == 4 ? Cost::infinity() : Cost(rng.below(4));
        }
        g.set_relation(rinfo.name, std::move(rel));
    }
    return g;
}

TauExpression random_expression(Rng& rng, const ValuedStructure& g, int vars, int summands)
{
    TauExpression e;
    for (int v = 0; v < vars; ++v)
        e.variables.push_back("x" + std::to_string(v));
    const auto& rels = g.signature().relations();
    for (int s = 0; s < summands; ++s) {
        const auto& rinfo = rels[rng.below(static_cast<int>(rels.size()))];
        TauAtom atom{rinfo.name, {}};
        for (int p = 0; p < rinfo.arity; ++p)
            atom.vars.push_back(rng.below(vars));
        e.summands.push_back(std::move(atom));
    }
    return e;
}

bool has_solution(const VcspInstance& inst, const ValuedStructure& g)
{
    OptResult r = solve_exact(inst.expr, g);
    return r.cost <= Cost(inst.threshold);
}

} // namespace

TEST_CASE("solve_exact: directed 3-cycle max-cut costs 2")
{
    ValuedStructure g = gamma_less();
    TauExpression e;
    e.variables = {"x", "y", "z"};
    e.summands = {{"lt", {0, 1}}, {"lt", {1, 2}}, {"lt", {2, 0}}};
    // Oracle: enumerate all 8 assignments.
    CHECK(enumerate_min(e, g) == Cost(2));
    OptResult r = solve_exact(e, g);
    CHECK(r.cost == Cost(2));
    REQUIRE(r.witness);
    CHECK(evaluate(e, g, *r.witness) == Cost(2));
    // Lexicographically least optimal assignment.
    CHECK(*r.witness == Assignment{0, 0, 0});
}

TEST_CASE("solve_exact: min-cut chain has a zero assignment and empty relation blocks")
{
    ValuedStructure g = gamma_geq();
    TauExpression e;
    e.variables = {"x", "y"};
    e.summands = {{"geq", {0, 1}}, {"geq", {1, 0}}};
    OptResult r = solve_exact(e, g);
    CHECK(r.cost == Cost(0));
    CHECK(*r.witness == Assignment{0, 0});

    TauExpression blocked;
    blocked.variables = {"x"};
    blocked.summands = {{kEmptySymbol, {0}}};
    OptResult rb = solve_exact(blocked, g);
    CHECK(rb.cost.is_infinite());
    CHECK(!rb.witness);
}

TEST_CASE("solve_exact is invariant under summand reordering and variable renaming")
{
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        ValuedStructure g = random_structure(rng, 2 + rng.below(2), 2, true);
        TauExpression e = random_expression(rng, g, 2 + rng.below(3), 1 + rng.below(5));
        Cost direct = solve_exact(e, g).cost;
        TauExpression shuffled = e;
        std::reverse(shuffled.summands.begin(), shuffled.summands.end());
        CHECK(solve_exact(shuffled, g).cost == direct);
        // Rename variables by reversing their order.
        TauExpression renamed = e;
        int n = static_cast<int>(e.variables.size());
        std::reverse(renamed.variables.begin(), renamed.variables.end());
        for (auto& atom : renamed.summands)
            for (int& v : atom.vars)
                v = n - 1 - v;
        CHECK(solve_exact(renamed, g).cost == direct);
    }
}

TEST_CASE("solve_blp: 3-cycle relaxation is 3/2, strictly below exact")
{
    ValuedStructure g = gamma_less();
    TauExpression e;
    e.variables = {"x", "y", "z"};
    e.summands = {{"lt", {0, 1}}, {"lt", {1, 2}}, {"lt", {2, 0}}};
    BlpResult blp = solve_blp(e, g);
    REQUIRE(blp.bound.is_finite());
    CHECK(blp.bound.value() == Rational(3, 2));
    // Certificate feasibility: uniform marginals support the relaxation value.
    for (const auto& lambda : blp.marginals) {
        Rational total = 0;
        for (const auto& v : lambda)
            total += v;
        CHECK(total == 1);
    }
}

TEST_CASE("solve_blp equals solve_exact on chains of geq constraints")
{
    Rng rng(17);
    ValuedStructure g = gamma_geq();
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + rng.below(3);
        TauExpression e;
        for (int v = 0; v < n; ++v)
            e.variables.push_back("x" + std::to_string(v));
        int m = 1 + rng.below(4);
        for (int s = 0; s < m; ++s)
            e.summands.push_back({"geq", {rng.below(n), rng.below(n)}});
        CHECK(solve_blp(e, g).bound == solve_exact(e, g).cost);
    }
}

TEST_CASE("solve_blp: single summand yields the minimum finite entry")
{
    Rng rng(23);
    ValuedStructure g = random_structure(rng, 3, 1, true);
    const auto& rinfo = g.signature().relations()[0];
    TauExpression e;
    e.variables = {"x", "y"};
    TauAtom atom{rinfo.name, {}};
    for (int p = 0; p < rinfo.arity; ++p)
        atom.vars.push_back(p);
    e.summands = {atom};
    Cost expect = g.relation(rinfo.name).min_value();
    CHECK(solve_blp(e, g).bound == expect);
}

TEST_CASE("solve_blp is a lower bound for solve_exact (fuzz)")
{
    Rng rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        ValuedStructure g = random_structure(rng, 2 + rng.below(2), 2, true);
        TauExpression e = random_expression(rng, g, 2 + rng.below(2), 1 + rng.below(6));
        Cost exact = solve_exact(e, g).cost;
        Cost bound = solve_blp(e, g).bound;
        CHECK(bound <= exact);
    }
}

TEST_CASE("rewrite: equality case merges variables")
{
    ValuedStructure g = gamma_less();
    VcspInstance inst;
    inst.expr.variables = {"x", "y", "z"};
    inst.expr.summands = {{kEqualitySymbol, {0, 1}}, {"lt", {1, 2}}};
    inst.threshold = 0;
    RewriteContext ctx;
    ctx.symbol = kEqualitySymbol;
    VcspInstance out = rewrite_instance(inst, g, RewriteCase::Equality, ctx);
    CHECK(out.expr.variables.size() == 2);
    CHECK(out.expr.summands.size() == 1);
    CHECK(has_solution(inst, g) == has_solution(out, g));
}

TEST_CASE("rewrite: scale/shift threshold arithmetic from the proof")
{
    // r = 1/2, s = 1, one eliminated summand, u = 3 -> u' = 2*(3-1) = 4.
    Signature sig;
    sig.add("S", 1);
    sig.add("Rd", 1);
    std::vector<std::string> names{"0", "1"};
    ValuedStructure delta(sig, names);
    ValuedRelation s_rel(1, 2);
    s_rel.at({0}) = Cost(2);
    s_rel.at({1}) = Cost(4);
    delta.set_relation("S", s_rel);
    ValuedRelation r_rel(1, 2);
    r_rel.at({0}) = Cost(2); // (1/2)*2 + 1
    r_rel.at({1}) = Cost(3); // (1/2)*4 + 1
    delta.set_relation("Rd", r_rel);

    VcspInstance inst;
    inst.expr.variables = {"x"};
    inst.expr.summands = {{"Rd", {0}}};
    inst.threshold = 3;
    RewriteContext ctx;
    ctx.symbol = "Rd";
    ctx.source = "S";
    ctx.r = Rational(1, 2);
    ctx.s = 1;
    VcspInstance out = rewrite_instance(inst, delta, RewriteCase::ScaleShift, ctx);
    CHECK(out.threshold == Rational(4));
    CHECK(out.expr.summands.size() == 1); // p = 1 copy of the substituted atom
    CHECK(has_solution(inst, delta) == has_solution(out, delta));
}

TEST_CASE("rewrite: feas case copy count from the proof formula")
{
    // k = 2 eliminated atoms, max finite weight w = 3, integral tables so the
    // gap underestimate is 1: each kept atom is copied t = ceil(6/1)+1 = 7
    // times and the threshold becomes t*u + k*w.
    Signature sig;
    sig.add("S", 1);
    sig.add("P", 1);
    sig.add("F", 1);
    ValuedStructure delta(sig, {"0", "1", "2"});
    ValuedRelation s_rel(1, 3);
    s_rel.at({0}) = Cost(0);
    s_rel.at({1}) = Cost(3);
    s_rel.at({2}) = Cost::infinity();
    delta.set_relation("S", s_rel);
    ValuedRelation p_rel(1, 3);
    p_rel.at({0}) = Cost(1);
    p_rel.at({1}) = Cost(0);
    p_rel.at({2}) = Cost(2);
    delta.set_relation("P", p_rel);
    delta.set_relation("F", feas(s_rel));

    VcspInstance inst;
    inst.expr.variables = {"x", "y"};
    inst.expr.summands = {{"F", {0}}, {"F", {1}}, {"P", {0}}};
    inst.threshold = 1;
    RewriteContext ctx;
    ctx.symbol = "F";
    ctx.source = "S";
    VcspInstance out = rewrite_instance(inst, delta, RewriteCase::Feas, ctx);
    // t copies of the single non-eliminated atom plus the two substitutions.
    CHECK(out.expr.summands.size() == 7 + 2);
    CHECK(out.threshold == Rational(7) * 1 + Rational(2) * 3);
    CHECK(has_solution(inst, delta) == has_solution(out, delta));
}

TEST_CASE("rewrite soundness fuzz per case")
{
    Rng rng(2024);
    int checked[6] = {0, 0, 0, 0, 0, 0};
    for (int trial = 0; trial < 400; ++trial) {
        int domain = 2 + rng.below(2);
        Signature sig;
        sig.add("A", 2);
        sig.add("B", 1);
        std::vector<std::string> names;
        for (int i = 0; i < domain; ++i)
            names.push_back(std::to_string(i));
        ValuedStructure gamma(sig, names);
        {
            ValuedRelation a(2, domain), b(1, domain);
            for (size_t i = 0; i < a.table_size(); ++i)
                a.at_index(i) = rng.below(5) == 4 ? Cost::infinity() : Cost(rng.below(3));
            for (size_t i = 0; i < b.table_size(); ++i)
                b.at_index(i) = rng.below(5) == 4 ? Cost::infinity() : Cost(rng.below(3));
            gamma.set_relation("A", std::move(a));
            gamma.set_relation("B", std::move(b));
        }
        int which = trial % 6;
        RewriteCase op = static_cast<RewriteCase>(which);
        RewriteContext ctx;
        Signature dsig = sig;
        ValuedStructure delta = gamma;
        switch (op) {
        case RewriteCase::Equality:
            ctx.symbol = kEqualitySymbol;
            break;
        case RewriteCase::EmptyRelation:
            ctx.symbol = kEmptySymbol;
            break;
        case RewriteCase::Expressibility: {
            ctx.symbol = "D";
            dsig.add("D", 2);
            ctx.definition.variables = {"x", "y", "w"};
            ctx.definition.summands = {{"A", {0, 2}}, {"A", {2, 1}}};
            ValuedStructure d2(dsig, names);
            d2.set_relation("A", gamma.relation("A"));
            d2.set_relation("B", gamma.relation("B"));
            d2.set_relation("D", express(gamma, ctx.definition, {0, 1}));
            delta = d2;
            break;
        }
        case RewriteCase::ScaleShift: {
            ctx.symbol = "D";
            ctx.source = "A";
            ctx.r = Rational(rng.below(3), 1 + rng.below(2));
            ctx.s = Rational(rng.below(5) - 2);
            dsig.add("D", 2);
            ValuedStructure d2(dsig, names);
            d2.set_relation("A", gamma.relation("A"));
            d2.set_relation("B", gamma.relation("B"));
            d2.set_relation("D", shift(scale(gamma.relation("A"), ctx.r), ctx.s));
            delta = d2;
            break;
        }
        case RewriteCase::Feas: {
            ctx.symbol = "D";
            ctx.source = "A";
            dsig.add("D", 2);
            ValuedStructure d2(dsig, names);
            d2.set_relation("A", gamma.relation("A"));
            d2.set_relation("B", gamma.relation("B"));
            d2.set_relation("D", feas(gamma.relation("A")));
            delta = d2;
            break;
        }
        case RewriteCase::Opt: {
            ctx.symbol = "D";
            ctx.source = "A";
            dsig.add("D", 2);
            ValuedStructure d2(dsig, names);
            d2.set_relation("A", gamma.relation("A"));
            d2.set_relation("B", gamma.relation("B"));
            d2.set_relation("D", opt(gamma.relation("A")));
            delta = d2;
            break;
        }
        }
        VcspInstance inst;
        int vars = 2 + rng.below(2);
        for (int v = 0; v < vars; ++v)
            inst.expr.variables.push_back("x" + std::to_string(v));
        int summands = 1 + rng.below(4);
        for (int s = 0; s < summands; ++s) {
            int pick = rng.below(3);
            if (pick == 0 && op != RewriteCase::Equality && op != RewriteCase::EmptyRelation) {
                inst.expr.summands.push_back({"D", {rng.below(vars), rng.below(vars)}});
            } else if (pick == 0 && op == RewriteCase::Equality) {
                inst.expr.summands.push_back(
                    {kEqualitySymbol, {rng.below(vars), rng.below(vars)}});
            } else if (pick == 0) {
                inst.expr.summands.push_back({kEmptySymbol, {rng.below(vars)}});
            } else if (pick == 1) {
                inst.expr.summands.push_back({"A", {rng.below(vars), rng.below(vars)}});
            } else {
                inst.expr.summands.push_back({"B", {rng.below(vars)}});
            }
        }
        inst.threshold = Rational(rng.below(9) - 1);
        VcspInstance out = rewrite_instance(inst, delta, op, ctx);
        bool before = has_solution(inst, delta);
        bool after = has_solution(out, delta);
        CHECK(before == after);
        if (before != after)
            FAIL("rewrite case ", which, " broke solvability at trial ", trial);
        ++checked[which];
    }
    for (int c : checked)
        CHECK(c > 0);
}

TEST_CASE("reduce_pp_instance: identity power and round trips")
{
    ValuedStructure g = gamma_less();
    std::map<std::string, PpDefinition> defs;
    PpDefinition def;
    def.arity = 2;
    def.expr.variables = {"x", "y"};
    def.expr.summands = {{"lt", {0, 1}}};
    defs["lt"] = def;

    VcspInstance inst;
    inst.expr.variables = {"u", "v"};
    inst.expr.summands = {{"lt", {0, 1}}, {"lt", {1, 0}}};
    inst.threshold = 1;
    VcspInstance reduced = reduce_pp_instance(inst, g, 1, defs);
    CHECK(reduced.expr.summands.size() == 2);
    CHECK(solve_exact(reduced.expr, g).cost == solve_exact(inst.expr, g).cost);

    // Dimension 2 round trip against brute force on the power structure.
    std::map<std::string, PpDefinition> defs2;
    PpDefinition pair;
    pair.arity = 2;
    pair.expr.variables = {"x1", "x2", "y1", "y2"};
    pair.expr.summands = {{"lt", {0, 2}}, {"lt", {1, 3}}};
    defs2["S"] = pair;
    ValuedStructure power = pp_power(g, 2, defs2);

    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        VcspInstance pinst;
        int vars = 2 + rng.below(2);
        for (int v = 0; v < vars; ++v)
            pinst.expr.variables.push_back("z" + std::to_string(v));
        int m = 1 + rng.below(3);
        for (int s = 0; s < m; ++s)
            pinst.expr.summands.push_back({"S", {rng.below(vars), rng.below(vars)}});
        pinst.threshold = Rational(rng.below(4));
        VcspInstance red = reduce_pp_instance(pinst, g, 2, defs2);
        CHECK(solve_exact(red.expr, g).cost == solve_exact(pinst.expr, power).cost);
    }
}
