#include "rvc/solve.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "rvc/lp.hpp"

namespace rvc {

namespace {

    struct BnB {
        const TauExpression& expr;
        const ValuedStructure& gamma;
        int n;
        int nd;
        std::vector<int> order;
        Assignment assignment;
        std::vector<char> fixed;
        Cost best = Cost::infinity();
        std::optional<Assignment> incumbent;
        std::optional<Cost> stop_at; // early exit once this value is reached
        long long nodes = 0;

        BnB(const TauExpression& e, const ValuedStructure& g) : expr(e), gamma(g)
        {
            n = static_cast<int>(expr.variables.size());
            nd = gamma.domain_size();
            std::vector<int> degree(n, 0);
            for (const auto& atom : expr.summands)
                for (int v : atom.vars)
                    ++degree[v];
            order.resize(n);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                [&](int a, int b) { return degree[a] > degree[b]; });
            assignment.assign(n, -1);
            fixed.assign(n, 0);
        }

        // Minimum of one summand over completions of its unassigned variables.
        Cost summand_min(const TauAtom& atom) const
        {
            std::vector<int> open;
            Tuple t(atom.vars.size());
            for (size_t p = 0; p < atom.vars.size(); ++p) {
                int a = assignment[atom.vars[p]];
                t[p] = a;
                if (a < 0)
                    open.push_back(static_cast<int>(p));
            }
            if (open.empty())
                return gamma.cost(atom.relation, t);
            // Positions sharing one unassigned variable must stay equal.
            Cost bestv = Cost::infinity();
            std::vector<int> choice(open.size(), 0);
            for (;;) {
                for (size_t i = 0; i < open.size(); ++i)
                    t[open[i]] = choice[i];
                bool ok = true;
                for (size_t i = 0; i < open.size() && ok; ++i)
                    for (size_t j = i + 1; j < open.size() && ok; ++j)
                        if (atom.vars[open[i]] == atom.vars[open[j]]
                            && choice[i] != choice[j])
                            ok = false;
                if (ok) {
                    Cost c = gamma.cost(atom.relation, t);
                    if (c < bestv)
                        bestv = c;
                }
                size_t p = 0;
                while (p < open.size() && choice[p] == nd - 1)
                    choice[p++] = 0;
                if (p == open.size())
                    break;
                ++choice[p];
            }
            return bestv;
        }

        Cost lower_bound() const
        {
            Cost lb(0);
            for (const auto& atom : expr.summands) {
                lb += summand_min(atom);
                if (lb.is_infinite())
                    break;
            }
            return lb;
        }

        bool done() const
        {
            return stop_at && incumbent && best == *stop_at;
        }

        void dfs(int depth)
        {
            if (done())
                return;
            ++nodes;
            Cost lb = lower_bound();
            if (lb.is_infinite())
                return;
            if (incumbent && lb >= best)
                return;
            if (depth == n) {
                if (!incumbent || lb < best) {
                    best = lb;
                    incumbent = assignment;
                }
                return;
            }
            int v = order[depth];
            if (fixed[v]) {
                dfs(depth + 1);
                return;
            }
            for (int a = 0; a < nd; ++a) {
                assignment[v] = a;
                dfs(depth + 1);
                if (done())
                    return;
            }
            assignment[v] = -1;
        }
    };

    OptResult run_bnb(const TauExpression& expr, const ValuedStructure& gamma,
        const Assignment& pinned, std::optional<Cost> stop_at, long long& nodes)
    {
        BnB search(expr, gamma);
        for (int v = 0; v < search.n; ++v) {
            if (v < static_cast<int>(pinned.size()) && pinned[v] >= 0) {
                search.assignment[v] = pinned[v];
                search.fixed[v] = 1;
            }
        }
        search.stop_at = stop_at;
        search.dfs(0);
        nodes += search.nodes;
        OptResult out;
        out.cost = search.incumbent ? search.best : Cost::infinity();
        if (search.incumbent)
            out.witness = *search.incumbent;
        return out;
    }

} // namespace

OptResult solve_exact_pinned(const TauExpression& expr, const ValuedStructure& gamma,
    const Assignment& pinned)
{
    if (gamma.domain_size() == 0)
        throw Error("solve_exact requires a non-empty domain");
    long long nodes = 0;
    OptResult first = run_bnb(expr, gamma, pinned, std::nullopt, nodes);
    OptResult out;
    out.cost = first.cost;
    out.nodes_explored = nodes;
    if (first.cost.is_infinite())
        return out;

    // Canonicalize: fix variables in original order to the least value that
    // keeps the optimum attainable.
    int n = static_cast<int>(expr.variables.size());
    Assignment canon = pinned;
    canon.resize(n, -1);
    for (int v = 0; v < n; ++v) {
        if (canon[v] >= 0)
            continue;
        for (int a = 0; a < gamma.domain_size(); ++a) {
            canon[v] = a;
            OptResult probe = run_bnb(expr, gamma, canon, first.cost, nodes);
            if (probe.cost == first.cost)
                break;
            canon[v] = -1;
        }
        if (canon[v] < 0)
            throw Error("internal: lost the optimum while canonicalizing");
    }
    out.witness = canon;
    out.nodes_explored = nodes;
    return out;
}

OptResult solve_exact(const TauExpression& expr, const ValuedStructure& gamma)
{
    return solve_exact_pinned(expr, gamma, {});
}

BlpResult solve_blp(const TauExpression& expr, const ValuedStructure& gamma)
{
    BlpResult out;
    int n = static_cast<int>(expr.variables.size());
    int nd = gamma.domain_size();
    int m = static_cast<int>(expr.summands.size());

    // Finite-cost support per summand.
    std::vector<std::vector<std::pair<Tuple, Cost>>> support(m);
    for (int s = 0; s < m; ++s) {
        const auto& atom = expr.summands[s];
        int k = static_cast<int>(atom.vars.size());
        Tuple t(k, 0);
        for (;;) {
            bool ok = true;
            for (int i = 0; i < k && ok; ++i)
                for (int j = i + 1; j < k && ok; ++j)
                    if (atom.vars[i] == atom.vars[j] && t[i] != t[j])
                        ok = false;
            if (ok) {
                Cost c = gamma.cost(atom.relation, t);
                if (c.is_finite())
                    support[s].push_back({t, c});
            }
            int p = k - 1;
            while (p >= 0 && t[p] == nd - 1)
                t[p--] = 0;
            if (p < 0)
                break;
            ++t[p];
        }
        if (support[s].empty())
            return out; // some summand is never finite: relaxation value is ∞
    }

    // Rows: one normalization per variable, then one marginal-matching row per
    // (summand, position, value).
    std::vector<RowSense> senses;
    std::vector<Rational> rhs;
    auto var_row = [&](int v) { return v; };
    for (int v = 0; v < n; ++v) {
        senses.push_back(RowSense::Equal);
        rhs.push_back(1);
    }
    std::vector<std::vector<int>> match_row(m);
    for (int s = 0; s < m; ++s) {
        int k = static_cast<int>(expr.summands[s].vars.size());
        match_row[s].resize(k);
        for (int p = 0; p < k; ++p) {
            match_row[s][p] = static_cast<int>(senses.size());
            for (int a = 0; a < nd; ++a) {
                senses.push_back(RowSense::Equal);
                rhs.push_back(0);
            }
        }
    }
    int rows = static_cast<int>(senses.size());

    // Columns: lambda_{v,a}, then mu_{s,t} over each summand's support.
    std::vector<std::vector<Rational>> cols;
    std::vector<Rational> obj;
    for (int v = 0; v < n; ++v) {
        for (int a = 0; a < nd; ++a) {
            std::vector<Rational> col(rows, 0);
            col[var_row(v)] = 1;
            for (int s = 0; s < m; ++s) {
                const auto& vars = expr.summands[s].vars;
                for (size_t p = 0; p < vars.size(); ++p)
                    if (vars[p] == v)
                        col[match_row[s][p] + a] -= 1;
            }
            cols.push_back(std::move(col));
            obj.push_back(0);
        }
    }
    size_t first_mu = cols.size();
    for (int s = 0; s < m; ++s) {
        for (const auto& [t, c] : support[s]) {
            std::vector<Rational> col(rows, 0);
            for (size_t p = 0; p < t.size(); ++p)
                col[match_row[s][p] + t[p]] += 1;
            cols.push_back(std::move(col));
            obj.push_back(c.value());
        }
    }
    (void)first_mu;

    DenseColumns source(rows, std::move(cols), std::move(obj));
    LpResult lp = solve_lp(LpSense::Minimize, senses, rhs, source);
    if (lp.status == LpStatus::Infeasible)
        return out; // crisp conflict: no fractional solution either
    if (lp.status != LpStatus::Optimal)
        throw Error("blp: unexpected LP status");
    out.bound = Cost(lp.objective);
    out.marginals.assign(n, std::vector<Rational>(nd, 0));
    for (const auto& [j, val] : lp.solution)
        if (j < static_cast<size_t>(n) * nd)
            out.marginals[j / nd][j % nd] = val;
    return out;
}

namespace {

    std::string fresh_name(const std::string& base, int counter)
    {
        return base + "#" + std::to_string(counter);
    }

    // Grid-step lower bound on the gap between the threshold and the next
    // achievable value of the non-eliminated summands: every achievable sum is
    // a multiple of 1/D for D = lcm of the table denominators.
    Rational gap_underestimate(const VcspInstance& inst, const ValuedStructure& delta,
        const std::string& skip_symbol)
    {
        Integer d_lcm = 1;
        for (const auto& atom : inst.expr.summands) {
            if (atom.relation == skip_symbol)
                continue;
            int arity = delta.symbol_arity(atom.relation);
            Tuple t(arity, 0);
            int nd = delta.domain_size();
            for (;;) {
                Cost c = delta.cost(atom.relation, t);
                if (c.is_finite())
                    d_lcm = boost::multiprecision::lcm(d_lcm, denominator(c.value()));
                int p = arity - 1;
                while (p >= 0 && t[p] == nd - 1)
                    t[p--] = 0;
                if (p < 0)
                    break;
                ++t[p];
            }
        }
        // Smallest grid point strictly above u, minus u.
        const Rational& u = inst.threshold;
        Integer scaled_floor = numerator(u) * d_lcm / denominator(u);
        if (Rational(scaled_floor, d_lcm) > u)
            scaled_floor -= 1; // integer division rounded toward zero on negatives
        return Rational(scaled_floor + 1, d_lcm) - u;
    }

    Integer ceil_rational(const Rational& r)
    {
        Integer q = numerator(r) / denominator(r);
        if (Rational(q) < r)
            q += 1;
        return q;
    }

    // One atom of some base symbol with a threshold below all of its values.
    VcspInstance never_true_instance(const ValuedStructure& delta, const std::string& exclude)
    {
        for (const auto& rinfo : delta.signature().relations()) {
            if (rinfo.name == exclude)
                continue;
            VcspInstance out;
            for (int i = 0; i < rinfo.arity; ++i)
                out.expr.variables.push_back("x" + std::to_string(i + 1));
            TauAtom atom{rinfo.name, {}};
            for (int i = 0; i < rinfo.arity; ++i)
                atom.vars.push_back(i);
            out.expr.summands.push_back(std::move(atom));
            Cost lo = delta.relation(rinfo.name).min_value();
            out.threshold = lo.is_finite() ? lo.value() - 1 : Rational(0);
            return out;
        }
        throw Error("rewrite needs another symbol in the signature");
    }

} // namespace

VcspInstance rewrite_instance(const VcspInstance& inst, const ValuedStructure& delta,
    RewriteCase op, const RewriteContext& ctx)
{
    const std::string& rsym = ctx.symbol;
    int krs = 0;
    for (const auto& atom : inst.expr.summands)
        if (atom.relation == rsym)
            ++krs;

    switch (op) {
    case RewriteCase::Equality: {
        int n = static_cast<int>(inst.expr.variables.size());
        std::vector<int> rep(n);
        std::iota(rep.begin(), rep.end(), 0);
        std::function<int(int)> find = [&](int x) {
            return rep[x] == x ? x : rep[x] = find(rep[x]);
        };
        for (const auto& atom : inst.expr.summands) {
            if (atom.relation != rsym)
                continue;
            if (atom.vars.size() != 2)
                throw Error("equality rewrite expects a binary symbol");
            int a = find(atom.vars[0]), b = find(atom.vars[1]);
            if (a != b)
                rep[std::max(a, b)] = std::min(a, b);
        }
        VcspInstance out;
        out.threshold = inst.threshold;
        std::vector<int> new_id(n, -1);
        for (int v = 0; v < n; ++v) {
            if (find(v) == v) {
                new_id[v] = static_cast<int>(out.expr.variables.size());
                out.expr.variables.push_back(inst.expr.variables[v]);
            }
        }
        for (const auto& atom : inst.expr.summands) {
            if (atom.relation == rsym)
                continue;
            TauAtom mapped = atom;
            for (int& v : mapped.vars)
                v = new_id[find(v)];
            out.expr.summands.push_back(std::move(mapped));
        }
        return out;
    }

    case RewriteCase::EmptyRelation: {
        if (krs == 0)
            return inst; // unchanged, reinterpreted over the base structure
        return never_true_instance(delta, rsym);
    }

    case RewriteCase::Expressibility: {
        int arity = static_cast<int>(delta.symbol_arity(rsym));
        int def_vars = static_cast<int>(ctx.definition.variables.size());
        if (def_vars < arity)
            throw Error("defining expression must have at least arity-many variables");
        VcspInstance out;
        out.threshold = inst.threshold;
        out.expr.variables = inst.expr.variables;
        int fresh = 0;
        for (const auto& atom : inst.expr.summands) {
            if (atom.relation != rsym) {
                out.expr.summands.push_back(atom);
                continue;
            }
            std::vector<int> var_map(def_vars);
            for (int i = 0; i < arity; ++i)
                var_map[i] = atom.vars[i];
            for (int i = arity; i < def_vars; ++i) {
                var_map[i] = static_cast<int>(out.expr.variables.size());
                out.expr.variables.push_back(
                    fresh_name(ctx.definition.variables[i], fresh));
            }
            ++fresh;
            for (const auto& datom : ctx.definition.summands) {
                TauAtom mapped = datom;
                for (int& v : mapped.vars)
                    v = var_map[v];
                out.expr.summands.push_back(std::move(mapped));
            }
        }
        return out;
    }

    case RewriteCase::ScaleShift: {
        if (ctx.r < 0)
            throw Error("scale factor must be non-negative");
        Integer p = numerator(ctx.r), q = denominator(ctx.r);
        VcspInstance out;
        out.expr.variables = inst.expr.variables;
        for (const auto& atom : inst.expr.summands) {
            if (atom.relation == rsym) {
                TauAtom sub = atom;
                sub.relation = ctx.source;
                for (Integer i = 0; i < p; ++i)
                    out.expr.summands.push_back(sub);
            } else {
                for (Integer i = 0; i < q; ++i)
                    out.expr.summands.push_back(atom);
            }
        }
        out.threshold = Rational(q) * (inst.threshold - Rational(krs) * ctx.s);
        return out;
    }

    case RewriteCase::Feas: {
        if (krs == 0)
            return inst;
        const ValuedRelation& src = delta.relation(ctx.source);
        Cost w = src.max_finite_value();
        if (w.is_infinite()) // Feas of an empty relation is the empty relation
            return never_true_instance(delta, rsym);
        Rational d = gap_underestimate(inst, delta, rsym);
        Rational kw = Rational(krs) * w.value();
        Integer t = ceil_rational(kw / d) + 1;
        if (t < 1)
            t = 1;
        VcspInstance out;
        out.expr.variables = inst.expr.variables;
        for (const auto& atom : inst.expr.summands) {
            if (atom.relation == rsym) {
                TauAtom sub = atom;
                sub.relation = ctx.source;
                out.expr.summands.push_back(std::move(sub));
            } else {
                for (Integer i = 0; i < t; ++i)
                    out.expr.summands.push_back(atom);
            }
        }
        out.threshold = Rational(t) * inst.threshold + kw;
        return out;
    }

    case RewriteCase::Opt: {
        if (krs == 0)
            return inst;
        const ValuedRelation& src = delta.relation(ctx.source);
        Cost src_min = src.min_value();
        if (src_min.is_infinite())
            return never_true_instance(delta, rsym);
        // Smallest positive jump above the minimum of the source table.
        Cost second = Cost::infinity();
        for (size_t i = 0; i < src.table_size(); ++i) {
            const Cost& c = src.at_index(i);
            if (c.is_finite() && src_min < c && c < second)
                second = c;
        }
        auto substitute_all = [&](Integer copies) {
            VcspInstance out;
            out.expr.variables = inst.expr.variables;
            for (const auto& atom : inst.expr.summands) {
                if (atom.relation == rsym) {
                    TauAtom sub = atom;
                    sub.relation = ctx.source;
                    for (Integer i = 0; i < copies; ++i)
                        out.expr.summands.push_back(sub);
                } else {
                    out.expr.summands.push_back(atom);
                }
            }
            return out;
        };
        if (second.is_infinite()) {
            // The source only takes its minimum and ∞, so Opt is a plain
            // substitution up to the constant minimum per eliminated atom.
            VcspInstance out = substitute_all(1);
            out.threshold = inst.threshold + Rational(krs) * src_min.value();
            return out;
        }

        int k_total = static_cast<int>(inst.expr.summands.size());
        bool normalized = src_min == Cost(0);
        Cost big = Cost(0);
        for (const auto& rinfo : delta.signature().relations()) {
            Cost mn = delta.relation(rinfo.name).min_value();
            if (mn.is_finite() && mn < Cost(0))
                normalized = false;
            Cost mx = delta.relation(rinfo.name).max_finite_value();
            if (mx.is_finite() && big < mx)
                big = mx;
        }
        if (normalized) {
            Rational m = second.value();
            Rational big_m = big.value();
            Integer copies = Integer(k_total) * ceil_rational(big_m / m) + 1;
            VcspInstance out = substitute_all(copies);
            Rational cap = Rational(k_total) * big_m;
            out.threshold = std::min(cap, inst.threshold);
            return out;
        }
        // General tables: enough copies that any non-minimal source value
        // overshoots the threshold even against the most negative rest.
        // With T copies, a violated eliminated atom forces
        //   phi' >= rest_min + T*krs*src_min + T*gap,
        // so T*gap > u - rest_min suffices; solutions keep
        //   phi' = (sum of others) + T*krs*src_min.
        Rational rest_min = 0;
        for (const auto& atom : inst.expr.summands) {
            if (atom.relation == rsym)
                continue;
            Cost mn = delta.relation(atom.relation).min_value();
            if (mn.is_infinite()) // an always-infinite summand: never satisfiable
                return never_true_instance(delta, rsym);
            rest_min += mn.value();
        }
        Rational gap = second.value() - src_min.value();
        Integer copies = ceil_rational((inst.threshold - rest_min) / gap) + 1;
        if (copies < 1)
            copies = 1;
        VcspInstance out = substitute_all(copies);
        out.threshold = inst.threshold + Rational(copies) * Rational(krs) * src_min.value();
        return out;
    }
    }
    throw Error("unknown rewrite case");
}

VcspInstance reduce_pp_instance(const VcspInstance& inst, const ValuedStructure& gamma,
    int d, const std::map<std::string, PpDefinition>& defs)
{
    (void)gamma;
    if (d < 1)
        throw Error("pp-power dimension must be positive");
    VcspInstance out;
    out.threshold = inst.threshold;
    int n = static_cast<int>(inst.expr.variables.size());
    for (int v = 0; v < n; ++v)
        for (int q = 0; q < d; ++q)
            out.expr.variables.push_back(inst.expr.variables[v] + "_" + std::to_string(q + 1));
    int fresh = 0;
    for (const auto& atom : inst.expr.summands) {
        auto it = defs.find(atom.relation);
        if (it == defs.end())
            throw Error("no pp-power definition for '" + atom.relation + "'");
        const PpDefinition& def = it->second;
        int k = def.arity;
        int kd = k * d;
        int def_vars = static_cast<int>(def.expr.variables.size());
        std::vector<int> var_map(def_vars);
        for (int p = 0; p < k; ++p)
            for (int q = 0; q < d; ++q)
                var_map[p * d + q] = atom.vars[p] * d + q;
        for (int i = kd; i < def_vars; ++i) {
            var_map[i] = static_cast<int>(out.expr.variables.size());
            out.expr.variables.push_back(fresh_name(def.expr.variables[i], fresh));
        }
        ++fresh;
        for (const auto& datom : def.expr.summands) {
            TauAtom mapped = datom;
            for (int& v : mapped.vars)
                v = var_map[v];
            out.expr.summands.push_back(std::move(mapped));
        }
    }
    return out;
}

} // namespace rvc
