#include "rvc/valued.hpp"

#include <algorithm>

#include <json.hpp>

namespace rvc {

ValuedRelation::ValuedRelation(int arity, int domain_size, Cost fill)
    : arity_(arity), domain_size_(domain_size)
{
    if (arity < 0 || domain_size < 0)
        throw Error("bad valued relation dimensions");
    size_t n = 1;
    for (int i = 0; i < arity; ++i)
        n *= static_cast<size_t>(domain_size);
    table_.assign(n, fill);
}

size_t ValuedRelation::index(const Tuple& t) const
{
    if (static_cast<int>(t.size()) != arity_)
        throw Error("tuple arity mismatch");
    size_t idx = 0;
    for (int v : t) {
        if (v < 0 || v >= domain_size_)
            throw Error("tuple element out of domain");
        idx = idx * static_cast<size_t>(domain_size_) + static_cast<size_t>(v);
    }
    return idx;
}

Tuple ValuedRelation::tuple_of_index(size_t i) const
{
    Tuple t(arity_);
    for (int p = arity_ - 1; p >= 0; --p) {
        t[p] = static_cast<int>(i % domain_size_);
        i /= domain_size_;
    }
    return t;
}

Cost ValuedRelation::min_value() const
{
    Cost best = Cost::infinity();
    for (const auto& c : table_)
        if (c < best)
            best = c;
    return best;
}

Cost ValuedRelation::max_finite_value() const
{
    Cost best = Cost::infinity();
    bool seen = false;
    for (const auto& c : table_) {
        if (c.is_finite() && (!seen || best < c)) {
            best = c;
            seen = true;
        }
    }
    return seen ? best : Cost::infinity();
}

ValuedRelation feas(const ValuedRelation& r)
{
    ValuedRelation out(r.arity(), r.domain_size());
    for (size_t i = 0; i < r.table_size(); ++i)
        out.at_index(i) = r.at_index(i).is_finite() ? Cost(0) : Cost::infinity();
    return out;
}

ValuedRelation opt(const ValuedRelation& r)
{
    Cost m = r.min_value();
    ValuedRelation out(r.arity(), r.domain_size());
    for (size_t i = 0; i < r.table_size(); ++i)
        out.at_index(i) = (r.at_index(i).is_finite() && r.at_index(i) == m)
            ? Cost(0)
            : Cost::infinity();
    return out;
}

ValuedRelation shift(const ValuedRelation& r, const Rational& s)
{
    ValuedRelation out = r;
    for (size_t i = 0; i < out.table_size(); ++i)
        out.at_index(i) += Cost(s);
    return out;
}

ValuedRelation scale(const ValuedRelation& r, const Rational& factor)
{
    if (factor < 0)
        throw Error("negative scale factor");
    ValuedRelation out = r;
    for (size_t i = 0; i < out.table_size(); ++i)
        out.at_index(i) = factor * out.at_index(i);
    return out;
}

ValuedStructure::ValuedStructure(Signature sig, std::vector<std::string> domain)
    : sig_(std::move(sig)), domain_(std::move(domain))
{
}

int ValuedStructure::element_index(const std::string& name) const
{
    for (int i = 0; i < domain_size(); ++i)
        if (domain_[i] == name)
            return i;
    throw Error("unknown domain element '" + name + "'");
}

void ValuedStructure::set_relation(const std::string& name, ValuedRelation r)
{
    if (r.arity() != sig_.arity(name))
        throw Error("arity mismatch for '" + name + "'");
    if (r.domain_size() != domain_size())
        throw Error("domain size mismatch for '" + name + "'");
    relations_[name] = std::move(r);
}

const ValuedRelation& ValuedStructure::relation(const std::string& name) const
{
    auto it = relations_.find(name);
    if (it == relations_.end())
        throw Error("relation '" + name + "' has no cost table");
    return it->second;
}

Cost ValuedStructure::cost(const std::string& rel, const Tuple& t) const
{
    if (!sig_.contains(rel)) {
        if (rel == kEqualitySymbol) {
            if (t.size() != 2)
                throw Error("EQ is binary");
            return t[0] == t[1] ? Cost(0) : Cost::infinity();
        }
        if (rel == kEmptySymbol) {
            if (t.size() != 1)
                throw Error("EMPTY is unary");
            return Cost::infinity();
        }
    }
    return relation(rel).at(t);
}

int ValuedStructure::symbol_arity(const std::string& rel) const
{
    if (sig_.contains(rel))
        return sig_.arity(rel);
    if (rel == kEqualitySymbol)
        return 2;
    if (rel == kEmptySymbol)
        return 1;
    throw Error("unknown relation '" + rel + "'");
}

ValuedStructure ValuedStructure::restrict(const std::vector<int>& keep) const
{
    std::vector<std::string> names;
    names.reserve(keep.size());
    for (int e : keep)
        names.push_back(domain_[e]);
    ValuedStructure out(sig_, names);
    int k = static_cast<int>(keep.size());
    for (const auto& [name, rel] : relations_) {
        ValuedRelation r(rel.arity(), k);
        Tuple sub(rel.arity()), orig(rel.arity());
        for (size_t i = 0; i < r.table_size(); ++i) {
            sub = r.tuple_of_index(i);
            for (int p = 0; p < rel.arity(); ++p)
                orig[p] = keep[sub[p]];
            r.at_index(i) = rel.at(orig);
        }
        out.set_relation(name, std::move(r));
    }
    return out;
}

Cost evaluate(const TauExpression& expr, const ValuedStructure& gamma, const Assignment& a)
{
    if (a.size() != expr.variables.size())
        throw Error("assignment must cover all expression variables");
    Cost total(0);
    Tuple t;
    for (const auto& atom : expr.summands) {
        t.clear();
        for (int v : atom.vars)
            t.push_back(a.at(v));
        total += gamma.cost(atom.relation, t);
        if (total.is_infinite())
            return total;
    }
    return total;
}

ValuedRelation express(const ValuedStructure& gamma, const TauExpression& expr,
    const std::vector<int>& free, size_t cap)
{
    int n = static_cast<int>(expr.variables.size());
    int nd = gamma.domain_size();
    size_t total = 1;
    for (int i = 0; i < n; ++i) {
        total *= static_cast<size_t>(nd);
        if (total > cap)
            throw CapExceeded("express: assignment space exceeds cap");
    }
    ValuedRelation out(static_cast<int>(free.size()), nd, Cost::infinity());
    Assignment a(n, 0);
    Tuple proj(free.size());
    for (size_t it = 0;; ++it) {
        Cost c = evaluate(expr, gamma, a);
        for (size_t i = 0; i < free.size(); ++i)
            proj[i] = a[free[i]];
        Cost& cell = out.at(proj);
        if (c < cell)
            cell = c;
        int p = n - 1;
        while (p >= 0 && a[p] == nd - 1)
            a[p--] = 0;
        if (p < 0)
            break;
        ++a[p];
    }
    // An expression with no summands is constant 0, including with n == 0.
    return out;
}

ValuedStructure pp_power(const ValuedStructure& gamma, int d,
    const std::map<std::string, PpDefinition>& defs)
{
    if (d < 1)
        throw Error("pp-power dimension must be positive");
    int n = gamma.domain_size();
    size_t dn = 1;
    for (int i = 0; i < d; ++i)
        dn *= static_cast<size_t>(n);
    std::vector<std::string> domain;
    domain.reserve(dn);
    std::vector<Tuple> elems;
    Tuple cur(d, 0);
    for (;;) {
        std::string label = "(";
        for (int i = 0; i < d; ++i)
            label += (i ? "," : "") + gamma.domain()[cur[i]];
        label += ")";
        domain.push_back(label);
        elems.push_back(cur);
        int p = d - 1;
        while (p >= 0 && cur[p] == n - 1)
            cur[p--] = 0;
        if (p < 0)
            break;
        ++cur[p];
    }

    Signature sig;
    for (const auto& [name, def] : defs)
        sig.add(name, def.arity);
    ValuedStructure out(sig, domain);
    for (const auto& [name, def] : defs) {
        int k = def.arity;
        int kd = k * d;
        if (static_cast<int>(def.expr.variables.size()) < kd)
            throw Error("pp-power definition of '" + name + "' needs at least "
                + std::to_string(kd) + " variables");
        std::vector<int> free(kd);
        for (int i = 0; i < kd; ++i)
            free[i] = i;
        ValuedRelation flat = express(gamma, def.expr, free);
        ValuedRelation rel(k, static_cast<int>(dn));
        Tuple args(k), flat_args(kd);
        for (size_t i = 0; i < rel.table_size(); ++i) {
            args = rel.tuple_of_index(i);
            for (int p = 0; p < k; ++p)
                for (int q = 0; q < d; ++q)
                    flat_args[p * d + q] = elems[args[p]][q];
            rel.at_index(i) = flat.at(flat_args);
        }
        out.set_relation(name, std::move(rel));
    }
    return out;
}

ValuedStructure ell_power(const ValuedStructure& gamma, int ell)
{
    if (ell < 1)
        throw Error("power must be positive");
    int n = gamma.domain_size();
    size_t dn = 1;
    for (int i = 0; i < ell; ++i)
        dn *= static_cast<size_t>(n);
    std::vector<std::string> domain;
    std::vector<Tuple> elems;
    Tuple cur(ell, 0);
    for (;;) {
        std::string label = "(";
        for (int i = 0; i < ell; ++i)
            label += (i ? "," : "") + gamma.domain()[cur[i]];
        label += ")";
        domain.push_back(label);
        elems.push_back(cur);
        int p = ell - 1;
        while (p >= 0 && cur[p] == n - 1)
            cur[p--] = 0;
        if (p < 0)
            break;
        ++cur[p];
    }
    ValuedStructure out(gamma.signature(), domain);
    Rational inv_ell = Rational(1, ell);
    for (const auto& rinfo : gamma.signature().relations()) {
        const ValuedRelation& base = gamma.relation(rinfo.name);
        int k = rinfo.arity;
        ValuedRelation rel(k, static_cast<int>(dn));
        Tuple args(k), slice(k);
        for (size_t i = 0; i < rel.table_size(); ++i) {
            args = rel.tuple_of_index(i);
            Cost sum(0);
            for (int q = 0; q < ell; ++q) {
                for (int p = 0; p < k; ++p)
                    slice[p] = elems[args[p]][q];
                sum += base.at(slice);
            }
            rel.at_index(i) = inv_ell * sum;
        }
        out.set_relation(rinfo.name, std::move(rel));
    }
    return out;
}

ValuedStructure dual_to_valued(const RelationalStructure& b, const std::set<std::string>& sigma)
{
    for (const auto& name : sigma)
        if (!b.signature().contains(name))
            throw Error("exogenous relation '" + name + "' not in signature");
    ValuedStructure out(b.signature(), b.elements());
    for (const auto& rinfo : b.signature().relations()) {
        bool exo = sigma.count(rinfo.name) > 0;
        Cost miss = exo ? Cost::infinity() : Cost(1);
        ValuedRelation rel(rinfo.arity, b.size(), miss);
        for (const auto& t : b.tuples(rinfo.name))
            rel.at(t) = Cost(0);
        out.set_relation(rinfo.name, std::move(rel));
    }
    return out;
}

namespace {

    using nlohmann::json;

    Cost cost_from_json(const json& j)
    {
        if (j.is_number_integer())
            return Cost(Rational(j.get<long long>()));
        if (j.is_string())
            return Cost::parse(j.get<std::string>());
        throw Error("cost must be an integer or a string like \"p/q\" or \"inf\"");
    }

} // namespace

ValuedStructure valued_structure_from_json(const std::string& json_text)
{
    json j = json::parse(json_text);
    std::vector<std::string> domain = j.at("domain").get<std::vector<std::string>>();
    Signature sig;
    for (auto& [name, rj] : j.at("relations").items())
        sig.add(name, rj.at("arity").get<int>());
    ValuedStructure out(sig, domain);
    std::map<std::string, int> elem_index;
    for (int i = 0; i < static_cast<int>(domain.size()); ++i) {
        if (!elem_index.emplace(domain[i], i).second)
            throw Error("duplicate domain element '" + domain[i] + "'");
    }
    for (auto& [name, rj] : j.at("relations").items()) {
        Cost fill = rj.contains("default") ? cost_from_json(rj.at("default")) : Cost(0);
        ValuedRelation rel(sig.arity(name), static_cast<int>(domain.size()), fill);
        if (rj.contains("entries")) {
            for (auto& entry : rj.at("entries")) {
                if (!entry.is_array() || entry.size() != 2)
                    throw Error("entry must be [[tuple...], cost]");
                Tuple t;
                for (auto& e : entry[0]) {
                    auto it = elem_index.find(e.get<std::string>());
                    if (it == elem_index.end())
                        throw Error("unknown element '" + e.get<std::string>() + "' in relation '" + name + "'");
                    t.push_back(it->second);
                }
                rel.at(t) = cost_from_json(entry[1]);
            }
        }
        out.set_relation(name, std::move(rel));
    }
    return out;
}

std::string valued_structure_to_json(const ValuedStructure& gamma)
{
    json j;
    j["domain"] = gamma.domain();
    json rels = json::object();
    for (const auto& rinfo : gamma.signature().relations()) {
        const ValuedRelation& rel = gamma.relation(rinfo.name);
        json rj;
        rj["arity"] = rinfo.arity;
        rj["default"] = "0";
        json entries = json::array();
        for (size_t i = 0; i < rel.table_size(); ++i) {
            const Cost& c = rel.at_index(i);
            if (c == Cost(0))
                continue;
            Tuple t = rel.tuple_of_index(i);
            json names = json::array();
            for (int e : t)
                names.push_back(gamma.domain()[e]);
            entries.push_back(json::array({names, c.str()}));
        }
        rj["entries"] = std::move(entries);
        rels[rinfo.name] = std::move(rj);
    }
    j["relations"] = std::move(rels);
    return j.dump(2);
}

TauExpression instance_expression_from_json(const std::string& json_text, const ValuedStructure& gamma)
{
    json j = json::parse(json_text);
    TauExpression expr;
    expr.variables = j.at("variables").get<std::vector<std::string>>();
    std::map<std::string, int> var_index;
    for (int i = 0; i < static_cast<int>(expr.variables.size()); ++i)
        if (!var_index.emplace(expr.variables[i], i).second)
            throw Error("duplicate variable '" + expr.variables[i] + "'");
    for (auto& sj : j.at("summands")) {
        if (!sj.is_array() || sj.size() != 2)
            throw Error("summand must be [relation, [vars...]]");
        TauAtom atom;
        atom.relation = sj[0].get<std::string>();
        int arity = gamma.symbol_arity(atom.relation);
        for (auto& vj : sj[1]) {
            auto it = var_index.find(vj.get<std::string>());
            if (it == var_index.end())
                throw Error("unknown variable '" + vj.get<std::string>() + "'");
            atom.vars.push_back(it->second);
        }
        if (static_cast<int>(atom.vars.size()) != arity)
            throw Error("arity mismatch for summand '" + atom.relation + "'");
        expr.summands.push_back(std::move(atom));
    }
    return expr;
}

ValuedStructure gamma_less()
{
    Signature sig;
    sig.add("lt", 2);
    ValuedStructure g(sig, {"0", "1"});
    ValuedRelation r(2, 2, Cost(1));
    r.at({0, 1}) = Cost(0);
    g.set_relation("lt", std::move(r));
    return g;
}

ValuedStructure gamma_geq()
{
    Signature sig;
    sig.add("geq", 2);
    ValuedStructure g(sig, {"0", "1"});
    ValuedRelation r(2, 2, Cost(1));
    r.at({0, 0}) = Cost(0);
    r.at({1, 0}) = Cost(0);
    r.at({1, 1}) = Cost(0);
    g.set_relation("geq", std::move(r));
    return g;
}

} // namespace rvc
