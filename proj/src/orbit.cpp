#include "rvc/orbit.hpp"

#include <algorithm>
#include <cmath>

namespace rvc {

std::string OrbitType::name() const
{
    std::string s = "[";
    for (size_t i = 0; i < block_of.size(); ++i)
        s += (i ? "," : "") + std::to_string(block_of[i]);
    s += "|";
    bool first_rel = true;
    for (const auto& rinfo : quotient.signature().relations()) {
        if (!first_rel)
            s += ";";
        first_rel = false;
        s += rinfo.name + ":";
        bool first = true;
        for (const auto& t : quotient.tuples(rinfo.name)) {
            if (!first)
                s += " ";
            first = false;
            for (size_t p = 0; p < t.size(); ++p)
                s += (p ? "." : "") + std::to_string(t[p]);
        }
    }
    return s + "]";
}

std::string TypeStructure::compat_name(const std::vector<int>& i, const std::vector<int>& j)
{
    std::string s = "C_";
    for (int v : i)
        s += std::to_string(v);
    s += "_";
    for (int v : j)
        s += std::to_string(v);
    return s;
}

int default_type_arity(const UnionQuery& mu)
{
    int r = 0;
    for (const auto& rinfo : mu.signature.relations())
        r = std::max(r, rinfo.arity);
    return std::max(r, 2);
}

int theorem_type_arity(const UnionQuery& mu)
{
    int r = 0;
    for (const auto& rinfo : mu.signature.relations())
        r = std::max(r, rinfo.arity);
    int v = 0;
    for (const auto& cq : mu.disjuncts)
        v = std::max(v, static_cast<int>(cq.variables.size()));
    return std::max({r + 1, v, 3});
}

namespace {

    std::vector<std::vector<int>> partitions_rgs(int m)
    {
        std::vector<std::vector<int>> out;
        std::vector<int> b(m, 0);
        for (;;) {
            out.push_back(b);
            int i = m - 1;
            for (; i > 0; --i) {
                int mx = 0;
                for (int j = 0; j < i; ++j)
                    mx = std::max(mx, b[j]);
                if (b[i] <= mx) {
                    ++b[i];
                    for (int j = i + 1; j < m; ++j)
                        b[j] = 0;
                    break;
                }
            }
            if (i == 0)
                break;
        }
        return out;
    }

    bool avoids_query(const RelationalStructure& s, const UnionQuery& mu,
        const std::vector<RelationalStructure>& canonical_dbs)
    {
        (void)mu;
        for (const auto& cdb : canonical_dbs)
            if (has_homomorphism(cdb, s))
                return false;
        return true;
    }

    // Projection of an orbit type along 1-based coordinate map `sel`:
    // the induced equality pattern plus the induced structure on the touched
    // blocks, in first-occurrence order.
    std::pair<std::vector<int>, RelationalStructure> project_type(const OrbitType& type,
        const std::vector<int>& sel)
    {
        std::vector<int> pattern(sel.size());
        std::vector<int> blocks; // first-occurrence order
        for (size_t q = 0; q < sel.size(); ++q) {
            int b = type.block_of[sel[q] - 1];
            auto it = std::find(blocks.begin(), blocks.end(), b);
            if (it == blocks.end()) {
                pattern[q] = static_cast<int>(blocks.size());
                blocks.push_back(b);
            } else {
                pattern[q] = static_cast<int>(it - blocks.begin());
            }
        }
        return {std::move(pattern), type.quotient.induced(blocks)};
    }

    std::vector<std::vector<int>> coordinate_maps(int p, int m)
    {
        std::vector<std::vector<int>> out;
        std::vector<int> sel(p, 1);
        for (;;) {
            out.push_back(sel);
            int i = p - 1;
            while (i >= 0 && sel[i] == m)
                sel[i--] = 1;
            if (i < 0)
                break;
            ++sel[i];
        }
        return out;
    }

} // namespace

std::vector<OrbitType> enumerate_orbit_types(const UnionQuery& mu, int m, size_t candidate_cap)
{
    if (m < 1)
        throw Error("type arity must be positive");
    for (size_t d = 0; d < mu.disjuncts.size(); ++d) {
        StructureReport rep = analyze(mu.signature, mu.disjuncts[d]);
        if (!rep.gaifman_complete)
            throw Error("orbit types need Gaifman-complete disjuncts; disjunct "
                + std::to_string(d + 1) + " is not");
    }
    for (const auto& rinfo : mu.signature.relations())
        if (rinfo.arity > m)
            throw Error("type arity must be at least the maximal relation arity");

    std::vector<RelationalStructure> canonical_dbs;
    for (const auto& cq : mu.disjuncts)
        canonical_dbs.push_back(canonical_database(mu.signature, cq));

    auto partitions = partitions_rgs(m);
    // Candidate count: per partition, all structures on its blocks.
    size_t total_candidates = 0;
    for (const auto& part : partitions) {
        int nb = *std::max_element(part.begin(), part.end()) + 1;
        double bits = 0;
        for (const auto& rinfo : mu.signature.relations())
            bits += std::pow(static_cast<double>(nb), rinfo.arity);
        double cand = std::pow(2.0, bits);
        if (cand > static_cast<double>(candidate_cap)) {
            throw CapExceeded("orbit type enumeration: " + std::to_string(cand)
                + " candidate structures on " + std::to_string(nb)
                + " blocks exceed the cap (" + std::to_string(candidate_cap) + ")");
        }
        total_candidates += static_cast<size_t>(cand);
        if (total_candidates > candidate_cap)
            throw CapExceeded("orbit type enumeration exceeds the candidate cap");
    }

    std::vector<OrbitType> out;
    for (const auto& part : partitions) {
        int nb = *std::max_element(part.begin(), part.end()) + 1;
        std::vector<std::string> names;
        for (int b = 0; b < nb; ++b)
            names.push_back("b" + std::to_string(b));
        // All tuples per relation, in table order.
        std::vector<std::pair<std::string, Tuple>> slots;
        for (const auto& rinfo : mu.signature.relations()) {
            Tuple t(rinfo.arity, 0);
            for (;;) {
                slots.push_back({rinfo.name, t});
                int p = rinfo.arity - 1;
                while (p >= 0 && t[p] == nb - 1)
                    t[p--] = 0;
                if (p < 0)
                    break;
                ++t[p];
            }
        }
        std::vector<char> pick(slots.size(), 0);
        for (;;) {
            RelationalStructure s(mu.signature, names);
            for (size_t i = 0; i < slots.size(); ++i)
                if (pick[i])
                    s.add_tuple(slots[i].first, slots[i].second);
            if (avoids_query(s, mu, canonical_dbs))
                out.push_back({part, std::move(s)});
            size_t p = slots.size();
            while (p > 0 && pick[p - 1] == 1)
                pick[--p] = 0;
            if (p == 0)
                break;
            pick[p - 1] = 1;
        }
    }
    return out;
}

TypeStructure build_type_structure(const UnionQuery& mu, const std::set<std::string>& sigma,
    int m, const std::set<std::string>& crisp, size_t candidate_cap)
{
    if (m > 9)
        throw CapExceeded("type arity above 9 is not supported");
    TypeStructure ts;
    ts.m = m;
    ts.types = enumerate_orbit_types(mu, m, candidate_cap);
    int nt = static_cast<int>(ts.types.size());

    Signature sig;
    for (const auto& rinfo : mu.signature.relations())
        sig.add(TypeStructure::star_name(rinfo.name), 1);
    for (const auto& rel : crisp)
        sig.add(TypeStructure::star_name(rel), 1);
    std::vector<std::pair<std::vector<int>, std::vector<int>>> compat_maps;
    for (int p = 1; p <= m; ++p) {
        auto maps = coordinate_maps(p, m);
        for (const auto& i : maps)
            for (const auto& j : maps) {
                sig.add(TypeStructure::compat_name(i, j), 2);
                compat_maps.push_back({i, j});
            }
    }

    std::vector<std::string> domain;
    for (const auto& t : ts.types)
        domain.push_back(t.name());
    ValuedStructure vs(sig, domain);

    // Starred relations read the leading coordinates of the represented tuple.
    auto starred = [&](const std::string& rel, int arity, bool infinite_miss) {
        ValuedRelation r(1, nt);
        for (int t = 0; t < nt; ++t) {
            Tuple blocks(arity);
            for (int p = 0; p < arity; ++p)
                blocks[p] = ts.types[t].block_of[p];
            bool in = ts.types[t].quotient.has_tuple(rel, blocks);
            r.at({t}) = in ? Cost(0) : (infinite_miss ? Cost::infinity() : Cost(1));
        }
        return r;
    };
    for (const auto& rinfo : mu.signature.relations())
        vs.set_relation(TypeStructure::star_name(rinfo.name),
            starred(rinfo.name, rinfo.arity, sigma.count(rinfo.name) > 0));
    for (const auto& rel : crisp) {
        if (rel.empty() || rel.back() != '!')
            throw Error("crisp companion names must end in '!'");
        std::string base = rel.substr(0, rel.size() - 1);
        vs.set_relation(TypeStructure::star_name(rel),
            starred(base, mu.signature.arity(base), true));
    }

    // Compatibility: projections along i and j must have the same type.
    std::vector<std::vector<std::pair<std::vector<int>, RelationalStructure>>> proj_cache;
    proj_cache.resize(nt);
    std::map<std::vector<int>, int> map_index;
    std::vector<std::vector<int>> all_maps;
    for (const auto& [i, j] : compat_maps) {
        for (const auto& sel : {i, j}) {
            if (!map_index.count(sel)) {
                map_index[sel] = static_cast<int>(all_maps.size());
                all_maps.push_back(sel);
            }
        }
    }
    for (int t = 0; t < nt; ++t) {
        proj_cache[t].reserve(all_maps.size());
        for (const auto& sel : all_maps)
            proj_cache[t].push_back(project_type(ts.types[t], sel));
    }
    for (const auto& [i, j] : compat_maps) {
        int ii = map_index[i], jj = map_index[j];
        ValuedRelation r(2, nt, Cost::infinity());
        for (int t1 = 0; t1 < nt; ++t1)
            for (int t2 = 0; t2 < nt; ++t2)
                if (proj_cache[t1][ii] == proj_cache[t2][jj])
                    r.at({t1, t2}) = Cost(0);
        vs.set_relation(TypeStructure::compat_name(i, j), std::move(r));
    }
    ts.structure = std::move(vs);
    return ts;
}

VcspInstance reduce_to_type_instance(const TauExpression& expr, const Rational& threshold,
    const TypeStructure& ts, size_t var_cap)
{
    int n = static_cast<int>(expr.variables.size());
    int m = ts.m;
    if (n == 0)
        throw Error("type reduction needs at least one variable");
    size_t count = 1;
    for (int i = 0; i < m; ++i) {
        count *= static_cast<size_t>(n);
        if (count > var_cap)
            throw CapExceeded("type reduction: n^m exceeds the variable cap");
    }

    VcspInstance out;
    out.threshold = threshold;
    std::vector<Tuple> bars; // all m-tuples over the variables, mixed-radix order
    Tuple cur(m, 0);
    for (;;) {
        bars.push_back(cur);
        std::string name = "y(";
        for (int p = 0; p < m; ++p)
            name += (p ? "," : "") + expr.variables[cur[p]];
        out.expr.variables.push_back(name + ")");
        int p = m - 1;
        while (p >= 0 && cur[p] == n - 1)
            cur[p--] = 0;
        if (p < 0)
            break;
        ++cur[p];
    }
    auto bar_index = [&](const Tuple& bar) {
        size_t idx = 0;
        for (int p = 0; p < m; ++p)
            idx = idx * n + bar[p];
        return static_cast<int>(idx);
    };

    for (const auto& atom : expr.summands) {
        int k = static_cast<int>(atom.vars.size());
        if (k > m)
            throw Error("summand arity exceeds the type arity");
        Tuple bar(m, atom.vars.empty() ? 0 : atom.vars.back());
        for (int p = 0; p < k; ++p)
            bar[p] = atom.vars[p];
        out.expr.summands.push_back(
            {TypeStructure::star_name(atom.relation), {bar_index(bar)}});
    }

    // Compatibility summands where the projected variable tuples coincide.
    std::set<std::pair<std::string, std::pair<int, int>>> added;
    for (int p = 1; p <= m; ++p) {
        std::vector<std::vector<int>> maps;
        {
            std::vector<int> sel(p, 1);
            for (;;) {
                maps.push_back(sel);
                int q = p - 1;
                while (q >= 0 && sel[q] == m)
                    sel[q--] = 1;
                if (q < 0)
                    break;
                ++sel[q];
            }
        }
        for (size_t b1 = 0; b1 < bars.size(); ++b1) {
            for (size_t b2 = 0; b2 < bars.size(); ++b2) {
                for (const auto& i : maps) {
                    for (const auto& j : maps) {
                        bool match = true;
                        for (int q = 0; q < p && match; ++q)
                            match = bars[b1][i[q] - 1] == bars[b2][j[q] - 1];
                        if (!match)
                            continue;
                        auto key = std::make_pair(TypeStructure::compat_name(i, j),
                            std::make_pair(static_cast<int>(b1), static_cast<int>(b2)));
                        if (added.insert(key).second)
                            out.expr.summands.push_back({key.first,
                                {static_cast<int>(b1), static_cast<int>(b2)}});
                    }
                }
            }
        }
    }
    return out;
}

} // namespace rvc
