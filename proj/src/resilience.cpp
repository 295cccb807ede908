#include "rvc/resilience.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace rvc {

HittingSetInstance build_hitting_set(const BagDatabase& db, const UnionQuery& mu)
{
    HittingSetInstance inst;
    std::map<TupleId, int> vertex_of;
    for (const auto& id : db.endogenous_ids()) {
        vertex_of[id] = static_cast<int>(inst.vertices.size());
        inst.vertices.push_back({id, db.multiplicity(id.relation, id.tuple)});
    }

    RelationalStructure data = db.set_structure();
    std::set<std::vector<int>> edges;
    for (const auto& cq : mu.disjuncts) {
        RelationalStructure cdb = canonical_database(mu.signature, cq);
        for (const auto& hom : enumerate_homomorphisms(cdb, data)) {
            std::set<int> edge;
            bool all_exogenous = true;
            for (const auto& atom : cq.atoms) {
                Tuple image;
                for (int v : atom.args)
                    image.push_back(hom[v]);
                TupleId id{atom.relation, image};
                if (db.tuple_exogenous(id.relation, id.tuple))
                    continue;
                all_exogenous = false;
                edge.insert(vertex_of.at(id));
            }
            if (all_exogenous) {
                inst.infeasible = true;
                continue;
            }
            edges.insert(std::vector<int>(edge.begin(), edge.end()));
        }
    }
    // Prune supersets: an edge containing another edge is never binding.
    std::vector<std::vector<int>> sorted(edges.begin(), edges.end());
    std::stable_sort(sorted.begin(), sorted.end(),
        [](const auto& a, const auto& b) { return a.size() < b.size(); });
    for (const auto& e : sorted) {
        bool redundant = false;
        for (const auto& kept : inst.hyperedges) {
            if (std::includes(e.begin(), e.end(), kept.begin(), kept.end())) {
                redundant = true;
                break;
            }
        }
        if (!redundant)
            inst.hyperedges.push_back(e);
    }
    return inst;
}

namespace {

    struct HittingSearch {
        const HittingSetInstance& inst;
        std::vector<char> chosen;
        long long weight = 0;
        long long best = -1;
        std::vector<int> best_set;

        explicit HittingSearch(const HittingSetInstance& i)
            : inst(i), chosen(i.vertices.size(), 0)
        {
        }

        // Greedy disjoint-edge packing lower bound on the remaining weight.
        long long lower_bound(const std::vector<const std::vector<int>*>& uncovered) const
        {
            long long lb = 0;
            std::vector<char> blocked(inst.vertices.size(), 0);
            for (const auto* e : uncovered) {
                bool free_edge = true;
                long long cheapest = -1;
                for (int v : *e) {
                    if (blocked[v]) {
                        free_edge = false;
                        break;
                    }
                    long long w = inst.vertices[v].weight;
                    if (cheapest < 0 || w < cheapest)
                        cheapest = w;
                }
                if (free_edge) {
                    lb += cheapest;
                    for (int v : *e)
                        blocked[v] = 1;
                }
            }
            return lb;
        }

        void dfs()
        {
            std::vector<const std::vector<int>*> uncovered;
            for (const auto& e : inst.hyperedges) {
                bool hit = false;
                for (int v : e)
                    if (chosen[v]) {
                        hit = true;
                        break;
                    }
                if (!hit)
                    uncovered.push_back(&e);
            }
            if (uncovered.empty()) {
                if (best < 0 || weight < best) {
                    best = weight;
                    best_set.clear();
                    for (size_t v = 0; v < chosen.size(); ++v)
                        if (chosen[v])
                            best_set.push_back(static_cast<int>(v));
                }
                return;
            }
            if (best >= 0 && weight + lower_bound(uncovered) >= best)
                return;
            const std::vector<int>* branch = uncovered[0];
            for (const auto* e : uncovered)
                if (e->size() < branch->size())
                    branch = e;
            for (int v : *branch) {
                chosen[v] = 1;
                weight += inst.vertices[v].weight;
                dfs();
                weight -= inst.vertices[v].weight;
                chosen[v] = 0;
            }
        }
    };

    // Lexicographically least vertex set of the given weight that hits all
    // edges, via include-first DFS in vertex order.
    bool canonical_hitting(const HittingSetInstance& inst, long long budget, size_t from,
        std::vector<char>& chosen, std::vector<int>& out)
    {
        bool all_hit = true;
        for (const auto& e : inst.hyperedges) {
            bool hit = false;
            for (int v : e)
                if (chosen[v]) {
                    hit = true;
                    break;
                }
            if (!hit) {
                all_hit = false;
                break;
            }
        }
        if (all_hit && budget == 0)
            return true;
        if (from >= inst.vertices.size())
            return false;
        for (size_t v = from; v < inst.vertices.size(); ++v) {
            if (inst.vertices[v].weight > budget)
                continue;
            chosen[v] = 1;
            out.push_back(static_cast<int>(v));
            if (canonical_hitting(inst, budget - inst.vertices[v].weight, v + 1, chosen, out))
                return true;
            out.pop_back();
            chosen[v] = 0;
        }
        return false;
    }

} // namespace

HittingSetSolution solve_hitting_set(const HittingSetInstance& inst)
{
    HittingSetSolution sol;
    if (inst.infeasible)
        return sol; // ∞: the query cannot be falsified
    HittingSearch search(inst);
    search.dfs();
    sol.weight = Cost(Rational(search.best));
    if (search.best == 0) {
        sol.chosen.clear();
        return sol;
    }
    std::vector<char> chosen(inst.vertices.size(), 0);
    std::vector<int> out;
    if (!canonical_hitting(inst, search.best, 0, chosen, out))
        throw Error("internal: optimal hitting weight not reproducible");
    sol.chosen = out;
    return sol;
}

TauExpression database_to_expression(const BagDatabase& db)
{
    TauExpression expr;
    expr.variables = db.elements();
    for (const auto& rinfo : db.signature().relations()) {
        for (const auto& [t, mult] : db.tuples(rinfo.name)) {
            std::string symbol = rinfo.name;
            if (!db.relation_exogenous(rinfo.name) && db.tuple_exogenous(rinfo.name, t))
                symbol += "!";
            for (long long c = 0; c < mult; ++c)
                expr.summands.push_back({symbol, t});
        }
    }
    return expr;
}

BagDatabase expression_to_database(const TauExpression& expr, const Signature& sig,
    const std::set<std::string>& sigma)
{
    BagDatabase db(sig, expr.variables);
    for (const auto& atom : expr.summands) {
        std::string rel = atom.relation;
        bool flagged = false;
        if (!rel.empty() && rel.back() == '!') {
            rel.pop_back();
            flagged = true;
        }
        db.add_tuple(rel, atom.vars, 1);
        if (flagged)
            db.mark_tuple_exogenous(rel, atom.vars);
    }
    for (const auto& rel : sigma)
        db.mark_relation_exogenous(rel);
    return db;
}

ValuedStructure dual_structure(const RelationalStructure& b, const std::set<std::string>& sigma,
    const std::set<std::string>& companion_bases)
{
    ValuedStructure base = dual_to_valued(b, sigma);
    if (companion_bases.empty())
        return base;
    Signature sig;
    for (const auto& rinfo : b.signature().relations())
        sig.add(rinfo.name, rinfo.arity);
    for (const auto& rel : companion_bases)
        sig.add(rel + "!", b.signature().arity(rel));
    ValuedStructure out(sig, b.elements());
    for (const auto& rinfo : b.signature().relations())
        out.set_relation(rinfo.name, base.relation(rinfo.name));
    for (const auto& rel : companion_bases) {
        ValuedRelation crisp(b.signature().arity(rel), b.size(), Cost::infinity());
        for (const auto& t : b.tuples(rel))
            crisp.at(t) = Cost(0);
        out.set_relation(rel + "!", std::move(crisp));
    }
    return out;
}

namespace {

    std::vector<ConjunctiveQuery> connected_components(const Signature& sig,
        const ConjunctiveQuery& cq)
    {
        int n = static_cast<int>(cq.variables.size());
        std::vector<int> comp(n);
        std::iota(comp.begin(), comp.end(), 0);
        std::function<int(int)> find = [&](int x) {
            return comp[x] == x ? x : comp[x] = find(comp[x]);
        };
        for (const auto& atom : cq.atoms)
            for (size_t i = 1; i < atom.args.size(); ++i) {
                int a = find(atom.args[0]), b = find(atom.args[i]);
                if (a != b)
                    comp[std::max(a, b)] = std::min(a, b);
            }
        std::map<int, ConjunctiveQuery> parts;
        std::map<int, std::map<int, int>> var_maps;
        for (int v = 0; v < n; ++v) {
            int root = find(v);
            auto& part = parts[root];
            var_maps[root][v] = static_cast<int>(part.variables.size());
            part.variables.push_back(cq.variables[v]);
        }
        for (const auto& atom : cq.atoms) {
            int root = find(atom.args[0]);
            Atom mapped{atom.relation, {}};
            for (int v : atom.args)
                mapped.args.push_back(var_maps[root][v]);
            parts[root].atoms.push_back(std::move(mapped));
        }
        (void)sig;
        std::vector<ConjunctiveQuery> out;
        for (auto& [root, part] : parts)
            out.push_back(std::move(part));
        return out;
    }

    bool verify_removal(const BagDatabase& db, const UnionQuery& mu,
        const std::vector<std::pair<TupleId, long long>>& removed)
    {
        std::vector<TupleId> ids;
        for (const auto& [id, mult] : removed)
            ids.push_back(id);
        return !satisfies(db.without(ids).set_structure(), mu);
    }

    ResilienceResult solve_single(const BagDatabase& db, const UnionQuery& mu,
        const ResilienceOptions& options);

    ResilienceResult solve_hitting_route(const BagDatabase& db, const UnionQuery& mu)
    {
        HittingSetInstance inst = build_hitting_set(db, mu);
        HittingSetSolution sol = solve_hitting_set(inst);
        ResilienceResult res;
        res.route_used = "hitting";
        res.value = sol.weight;
        for (int v : sol.chosen)
            res.removed.push_back({inst.vertices[v].id, inst.vertices[v].weight});
        return res;
    }

    ResilienceResult solve_dual_route(const BagDatabase& db, const UnionQuery& mu,
        const RelationalStructure& dual)
    {
        if (!(dual.signature() == mu.signature))
            throw Error("dual route: dual signature differs from the query signature");
        std::set<std::string> companions;
        for (const auto& rinfo : db.signature().relations())
            if (!db.relation_exogenous(rinfo.name) && db.has_flagged_tuples(rinfo.name))
                companions.insert(rinfo.name);
        ValuedStructure gamma = dual_structure(dual, db.exogenous_relations(), companions);
        TauExpression expr = database_to_expression(db);
        OptResult opt = solve_exact(expr, gamma);
        ResilienceResult res;
        res.route_used = "dual";
        res.value = opt.cost;
        if (opt.witness) {
            const Assignment& h = *opt.witness;
            for (const auto& id : db.endogenous_ids()) {
                Tuple image;
                for (int v : id.tuple)
                    image.push_back(h[v]);
                if (!dual.has_tuple(id.relation, image))
                    res.removed.push_back({id, db.multiplicity(id.relation, id.tuple)});
            }
        }
        return res;
    }

    ResilienceResult solve_types_route(const BagDatabase& db, const UnionQuery& mu,
        const ResilienceOptions& options)
    {
        int m = options.type_arity > 0 ? options.type_arity : default_type_arity(mu);
        std::set<std::string> companions;
        for (const auto& rinfo : db.signature().relations())
            if (!db.relation_exogenous(rinfo.name) && db.has_flagged_tuples(rinfo.name))
                companions.insert(rinfo.name + "!");
        TypeStructure ts = build_type_structure(mu, db.exogenous_relations(), m, companions,
            options.type_candidate_cap);
        TauExpression expr = database_to_expression(db);
        if (expr.variables.empty()) {
            ResilienceResult res;
            res.route_used = "types(m=" + std::to_string(m) + ")";
            res.value = Cost(0);
            return res;
        }
        VcspInstance inst = reduce_to_type_instance(expr, Rational(0), ts, options.type_var_cap);
        OptResult opt = solve_exact(inst.expr, ts.structure);
        ResilienceResult res;
        res.route_used = "types(m=" + std::to_string(m) + ")";
        res.value = opt.cost;
        if (opt.witness) {
            // A summand was paid for iff its identity's padded type misses it.
            const Assignment& w = *opt.witness;
            size_t summand = 0;
            std::set<TupleId> removed;
            for (const auto& atom : expr.summands) {
                const TauAtom& starred = inst.expr.summands[summand++];
                int type = w[starred.vars[0]];
                std::string base = atom.relation;
                if (!base.empty() && base.back() == '!')
                    base.pop_back();
                Tuple blocks(atom.vars.size());
                for (size_t p = 0; p < atom.vars.size(); ++p)
                    blocks[p] = ts.types[type].block_of[p];
                if (!ts.types[type].quotient.has_tuple(base, blocks))
                    removed.insert({base, atom.vars});
            }
            for (const auto& id : removed)
                res.removed.push_back({id, db.multiplicity(id.relation, id.tuple)});
        }
        return res;
    }

    ResilienceResult solve_single(const BagDatabase& db, const UnionQuery& mu,
        const ResilienceOptions& options)
    {
        switch (options.route) {
        case Route::Auto:
        case Route::Hitting:
            return solve_hitting_route(db, mu);
        case Route::Dual:
            if (!options.dual)
                throw Error("dual route requires a dual structure");
            return solve_dual_route(db, mu, *options.dual);
        case Route::Types:
            return solve_types_route(db, mu, options);
        }
        throw Error("unknown route");
    }

} // namespace

ResilienceResult resilience_solve(const BagDatabase& db, const UnionQuery& mu,
    const ResilienceOptions& options)
{
    ResilienceResult res;
    // A single disconnected conjunctive query splits: falsifying any connected
    // component (least resilient, implied components dropped) falsifies it.
    if (mu.disjuncts.size() == 1 && options.route != Route::Dual) {
        auto components = connected_components(mu.signature, mu.disjuncts[0]);
        if (components.size() > 1) {
            std::vector<ConjunctiveQuery> kept;
            for (const auto& cand : components) {
                bool dominated = false;
                for (auto it = kept.begin(); it != kept.end();) {
                    if (implies(mu.signature, *it, cand)) {
                        dominated = true; // falsifying *it is at most as costly
                        break;
                    }
                    if (implies(mu.signature, cand, *it))
                        it = kept.erase(it);
                    else
                        ++it;
                }
                if (!dominated)
                    kept.push_back(cand);
            }
            std::optional<ResilienceResult> best;
            for (const auto& part : kept) {
                UnionQuery sub{mu.signature, {part}};
                ResilienceResult r = solve_single(db, sub, options);
                if (!best || r.value < best->value)
                    best = std::move(r);
            }
            best->route_used += "+components";
            res = std::move(*best);
            if (res.value.is_finite() && !verify_removal(db, mu, res.removed))
                throw Error("internal: removal set fails to falsify the query");
            return res;
        }
    }
    res = solve_single(db, mu, options);
    if (res.value.is_finite() && !verify_removal(db, mu, res.removed))
        throw Error("internal: removal set fails to falsify the query");
    return res;
}

Cost brute_force_resilience(const BagDatabase& db, const UnionQuery& mu, long long weight_cap)
{
    if (db.total_weight() > weight_cap)
        throw CapExceeded("brute force: total weight exceeds the cap");
    if (!satisfies(db.set_structure(), mu))
        return Cost(0);
    std::vector<TupleId> ids = db.endogenous_ids();
    std::vector<long long> weights;
    for (const auto& id : ids)
        weights.push_back(db.multiplicity(id.relation, id.tuple));
    long long total = std::accumulate(weights.begin(), weights.end(), 0LL);

    // Increasing-cost sweep: try every subset of exact weight w before w+1.
    std::vector<TupleId> picked;
    std::function<bool(size_t, long long)> dfs = [&](size_t from, long long remaining) {
        if (remaining == 0)
            return !satisfies(db.without(picked).set_structure(), mu);
        for (size_t i = from; i < ids.size(); ++i) {
            if (weights[i] > remaining)
                continue;
            picked.push_back(ids[i]);
            if (dfs(i + 1, remaining - weights[i]))
                return true;
            picked.pop_back();
        }
        return false;
    };
    for (long long w = 1; w <= total; ++w) {
        picked.clear();
        if (dfs(0, w))
            return Cost(Rational(w));
    }
    return Cost::infinity();
}

} // namespace rvc
