#include "rvc/rpq.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <optional>

namespace rvc {

namespace {

    struct RpqParser {
        const std::string& text;
        const Signature& sig;
        size_t pos = 0;

        [[noreturn]] void fail(const std::string& what) const
        {
            throw ParseError(what, 1, static_cast<int>(pos) + 1);
        }

        void skip_ws()
        {
            while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
                ++pos;
        }

        bool eat(const std::string& s)
        {
            skip_ws();
            if (text.compare(pos, s.size(), s) == 0) {
                pos += s.size();
                return true;
            }
            return false;
        }

        char peek()
        {
            skip_ws();
            return pos < text.size() ? text[pos] : '\0';
        }

        std::shared_ptr<Rpq> make(Rpq node) { return std::make_shared<Rpq>(std::move(node)); }

        Rpq parse_union()
        {
            Rpq left = parse_concat();
            while (eat("+")) {
                Rpq right = parse_concat();
                Rpq u;
                u.kind = Rpq::Kind::Union;
                u.child = {make(std::move(left)), make(std::move(right))};
                left = std::move(u);
            }
            return left;
        }

        bool atom_ahead()
        {
            char c = peek();
            return c == '(' || std::isalpha(static_cast<unsigned char>(c)) || c == '_'
                || text.compare(pos, 3, "\xE2\x88\x85") == 0  // ∅
                || text.compare(pos, 2, "\xCE\xB5") == 0;     // ε
        }

        Rpq parse_concat()
        {
            Rpq left = parse_star();
            for (;;) {
                if (eat(";")) {
                    Rpq right = parse_star();
                    Rpq c;
                    c.kind = Rpq::Kind::Concat;
                    c.child = {make(std::move(left)), make(std::move(right))};
                    left = std::move(c);
                } else if (atom_ahead()) { // implicit concatenation
                    Rpq right = parse_star();
                    Rpq c;
                    c.kind = Rpq::Kind::Concat;
                    c.child = {make(std::move(left)), make(std::move(right))};
                    left = std::move(c);
                } else {
                    return left;
                }
            }
        }

        Rpq parse_star()
        {
            Rpq base = parse_atom();
            while (eat("*")) {
                Rpq s;
                s.kind = Rpq::Kind::Star;
                s.child = {make(std::move(base))};
                base = std::move(s);
            }
            return base;
        }

        Rpq parse_atom()
        {
            skip_ws();
            if (eat("(")) {
                Rpq inner = parse_union();
                if (!eat(")"))
                    fail("expected ')'");
                return inner;
            }
            if (eat("\xE2\x88\x85")) { // ∅
                Rpq q;
                q.kind = Rpq::Kind::Empty;
                return q;
            }
            if (eat("\xCE\xB5")) { // ε
                Rpq q;
                q.kind = Rpq::Kind::Epsilon;
                return q;
            }
            if (!std::isalpha(static_cast<unsigned char>(peek())) && peek() != '_')
                fail("expected a symbol");
            std::string name;
            while (pos < text.size()
                && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
                name += text[pos++];
            if (name == "eps") {
                Rpq q;
                q.kind = Rpq::Kind::Epsilon;
                return q;
            }
            if (name == "empty") {
                Rpq q;
                q.kind = Rpq::Kind::Empty;
                return q;
            }
            if (!sig.contains(name))
                fail("unknown relation '" + name + "'");
            if (sig.arity(name) != 2)
                fail("'" + name + "' is not binary");
            Rpq q;
            q.kind = Rpq::Kind::Symbol;
            q.symbol = name;
            if (eat("^-") || eat("\xE2\x81\xBB")) // ⁻
                q.kind = Rpq::Kind::Inverse;
            return q;
        }
    };

    struct ThompsonNfa {
        struct Trans {
            int from;
            int to;
            bool epsilon;
            std::string symbol;
            bool inverse;
        };
        int states = 0;
        std::vector<Trans> transitions;

        int fresh() { return states++; }
        void eps(int a, int b) { transitions.push_back({a, b, true, "", false}); }
        void sym(int a, int b, const std::string& s, bool inv)
        {
            transitions.push_back({a, b, false, s, inv});
        }
    };

    // Returns (start, accept).
    std::pair<int, int> thompson(const Rpq& q, ThompsonNfa& nfa)
    {
        int s = nfa.fresh(), t = nfa.fresh();
        switch (q.kind) {
        case Rpq::Kind::Empty:
            break;
        case Rpq::Kind::Epsilon:
            nfa.eps(s, t);
            break;
        case Rpq::Kind::Symbol:
            nfa.sym(s, t, q.symbol, false);
            break;
        case Rpq::Kind::Inverse:
            nfa.sym(s, t, q.symbol, true);
            break;
        case Rpq::Kind::Union: {
            auto [s1, t1] = thompson(*q.child[0], nfa);
            auto [s2, t2] = thompson(*q.child[1], nfa);
            nfa.eps(s, s1);
            nfa.eps(s, s2);
            nfa.eps(t1, t);
            nfa.eps(t2, t);
            break;
        }
        case Rpq::Kind::Concat: {
            auto [s1, t1] = thompson(*q.child[0], nfa);
            auto [s2, t2] = thompson(*q.child[1], nfa);
            nfa.eps(s, s1);
            nfa.eps(t1, s2);
            nfa.eps(t2, t);
            break;
        }
        case Rpq::Kind::Star: {
            auto [s1, t1] = thompson(*q.child[0], nfa);
            nfa.eps(s, t);
            nfa.eps(s, s1);
            nfa.eps(t1, s1);
            nfa.eps(t1, t);
            break;
        }
        }
        return {s, t};
    }

} // namespace

Rpq parse_rpq(const std::string& text, const Signature& sig)
{
    RpqParser parser{text, sig};
    Rpq q = parser.parse_union();
    parser.skip_ws();
    if (parser.pos != text.size())
        parser.fail("trailing input");
    return q;
}

Nfa rpq_to_nfa(const Rpq& q)
{
    ThompsonNfa t;
    auto [start, accept] = thompson(q, t);

    // ε-closures.
    std::vector<std::vector<int>> eps_next(t.states);
    for (const auto& tr : t.transitions)
        if (tr.epsilon)
            eps_next[tr.from].push_back(tr.to);
    auto closure = [&](int s) {
        std::vector<char> seen(t.states, 0);
        std::deque<int> queue{s};
        seen[s] = 1;
        std::vector<int> out;
        while (!queue.empty()) {
            int cur = queue.front();
            queue.pop_front();
            out.push_back(cur);
            for (int nxt : eps_next[cur])
                if (!seen[nxt]) {
                    seen[nxt] = 1;
                    queue.push_back(nxt);
                }
        }
        return out;
    };

    Nfa out;
    out.states = t.states;
    out.initial.assign(t.states, 0);
    out.accepting.assign(t.states, 0);
    out.initial[start] = 1;
    // A state accepts if its closure reaches the Thompson accept state.
    std::vector<std::vector<int>> closures(t.states);
    for (int s = 0; s < t.states; ++s) {
        closures[s] = closure(s);
        for (int c : closures[s])
            if (c == accept)
                out.accepting[s] = 1;
    }
    out.accepts_epsilon = out.accepting[start];
    // Symbol transitions from anywhere in the closure.
    std::set<std::tuple<int, std::string, bool, int>> dedup;
    for (int s = 0; s < t.states; ++s)
        for (int c : closures[s])
            for (const auto& tr : t.transitions)
                if (!tr.epsilon && tr.from == c)
                    dedup.insert({s, tr.symbol, tr.inverse, tr.to});
    for (const auto& [from, sym, inv, to] : dedup)
        out.transitions.push_back({from, sym, inv, to});
    return out;
}

namespace {

    struct ProductStep {
        int element;
        int state;
        TupleId via;     // tuple consumed to get here
        int parent = -1; // index into the BFS arena
        bool has_via = false;
    };

    // Shortest witness path (fewest tuples) to any accepting product state.
    // Returns the consumed tuples, or nullopt when there is no answer. Sets
    // `epsilon_answer` when some (a,a) is an answer with an empty path.
    std::optional<std::vector<TupleId>> find_witness(const RelationalStructure& data,
        const Nfa& nfa, bool& epsilon_answer)
    {
        epsilon_answer = false;
        int n = data.size();
        if (n == 0)
            return std::nullopt;
        if (nfa.accepts_epsilon) {
            epsilon_answer = true;
            return std::vector<TupleId>{};
        }
        // Transitions indexed by state.
        std::vector<std::vector<const Nfa::Transition*>> by_state(nfa.states);
        for (const auto& tr : nfa.transitions)
            by_state[tr.from].push_back(&tr);

        std::vector<ProductStep> arena;
        std::deque<int> queue;
        std::vector<char> seen(static_cast<size_t>(n) * nfa.states, 0);
        auto push = [&](int elem, int state, int parent, const TupleId& via, bool has_via) {
            size_t key = static_cast<size_t>(elem) * nfa.states + state;
            if (seen[key])
                return;
            seen[key] = 1;
            arena.push_back({elem, state, via, parent, has_via});
            queue.push_back(static_cast<int>(arena.size()) - 1);
        };
        for (int a = 0; a < n; ++a)
            for (int s = 0; s < nfa.states; ++s)
                if (nfa.initial[s])
                    push(a, s, -1, {}, false);
        while (!queue.empty()) {
            int cur = queue.front();
            queue.pop_front();
            if (nfa.accepting[arena[cur].state] && arena[cur].has_via) {
                std::vector<TupleId> path;
                for (int i = cur; i >= 0 && arena[i].has_via; i = arena[i].parent)
                    path.push_back(arena[i].via);
                return path;
            }
            int x = arena[cur].element;
            for (const auto* tr : by_state[arena[cur].state]) {
                const auto& tuples = data.tuples(tr->symbol);
                for (const auto& t : tuples) {
                    int from = tr->inverse ? t[1] : t[0];
                    int to = tr->inverse ? t[0] : t[1];
                    if (from == x)
                        push(to, tr->to, cur, {tr->symbol, t}, true);
                }
            }
        }
        return std::nullopt;
    }

} // namespace

std::set<std::pair<int, int>> evaluate_rpq(const BagDatabase& db, const Rpq& q)
{
    Nfa nfa = rpq_to_nfa(q);
    RelationalStructure data = db.set_structure();
    int n = data.size();
    std::set<std::pair<int, int>> answers;
    std::vector<std::vector<const Nfa::Transition*>> by_state(nfa.states);
    for (const auto& tr : nfa.transitions)
        by_state[tr.from].push_back(&tr);
    for (int a = 0; a < n; ++a) {
        std::vector<char> seen(static_cast<size_t>(n) * nfa.states, 0);
        std::deque<std::pair<int, int>> queue;
        auto push = [&](int elem, int state) {
            size_t key = static_cast<size_t>(elem) * nfa.states + state;
            if (!seen[key]) {
                seen[key] = 1;
                queue.push_back({elem, state});
            }
        };
        for (int s = 0; s < nfa.states; ++s)
            if (nfa.initial[s])
                push(a, s);
        while (!queue.empty()) {
            auto [x, s] = queue.front();
            queue.pop_front();
            if (nfa.accepting[s])
                answers.insert({a, x});
            for (const auto* tr : by_state[s])
                for (const auto& t : data.tuples(tr->symbol)) {
                    int from = tr->inverse ? t[1] : t[0];
                    int to = tr->inverse ? t[0] : t[1];
                    if (from == x)
                        push(to, tr->to);
                }
        }
    }
    return answers;
}

namespace {

    void build_mdlog(const Rpq& q, MDLogProgram& prog, int& counter, int id)
    {
        auto s_pred = [](int i) { return "S" + std::to_string(i); };
        auto e_pred = [](int i) { return "E" + std::to_string(i); };
        auto unary_rule = [&](const std::string& from, const std::string& to) {
            prog.rules.push_back({{to, {0}}, {{from, {0}}}, 1});
        };
        switch (q.kind) {
        case Rpq::Kind::Empty:
            break; // no rule derives E
        case Rpq::Kind::Epsilon:
            unary_rule(s_pred(id), e_pred(id));
            break;
        case Rpq::Kind::Symbol:
            prog.rules.push_back(
                {{e_pred(id), {1}}, {{s_pred(id), {0}}, {q.symbol, {0, 1}}}, 2});
            break;
        case Rpq::Kind::Inverse:
            prog.rules.push_back(
                {{e_pred(id), {0}}, {{s_pred(id), {1}}, {q.symbol, {0, 1}}}, 2});
            break;
        case Rpq::Kind::Union: {
            int a = ++counter, b = ++counter;
            build_mdlog(*q.child[0], prog, counter, a);
            build_mdlog(*q.child[1], prog, counter, b);
            unary_rule(s_pred(id), s_pred(a));
            unary_rule(s_pred(id), s_pred(b));
            unary_rule(e_pred(a), e_pred(id));
            unary_rule(e_pred(b), e_pred(id));
            break;
        }
        case Rpq::Kind::Concat: {
            int a = ++counter, b = ++counter;
            build_mdlog(*q.child[0], prog, counter, a);
            build_mdlog(*q.child[1], prog, counter, b);
            unary_rule(s_pred(id), s_pred(a));
            unary_rule(e_pred(a), s_pred(b));
            unary_rule(e_pred(b), e_pred(id));
            break;
        }
        case Rpq::Kind::Star: {
            int a = ++counter;
            build_mdlog(*q.child[0], prog, counter, a);
            unary_rule(s_pred(id), e_pred(id));
            unary_rule(s_pred(id), s_pred(a));
            unary_rule(e_pred(a), s_pred(id));
            break;
        }
        }
    }

} // namespace

MDLogProgram rpq_to_mdlog(const Rpq& q)
{
    MDLogProgram prog;
    int counter = 0;
    build_mdlog(q, prog, counter, 0);
    prog.rules.push_back({{"S0", {0}}, {{"true", {0}}}, 1});
    prog.rules.push_back({{"goal", {}}, {{"E0", {0}}}, 1});
    return prog;
}

bool mdlog_is_simple(const MDLogProgram& p, const Signature& sig)
{
    for (const auto& rule : p.rules) {
        int edb_atoms = 0;
        // Connectivity of the body via shared variables.
        std::vector<int> comp(rule.num_vars);
        std::iota(comp.begin(), comp.end(), 0);
        std::function<int(int)> find = [&](int x) {
            return comp[x] == x ? x : comp[x] = find(comp[x]);
        };
        for (const auto& atom : rule.body) {
            if (sig.contains(atom.pred)) {
                ++edb_atoms;
                std::set<int> distinct(atom.vars.begin(), atom.vars.end());
                if (distinct.size() != atom.vars.size())
                    return false; // repeated variable in the signature atom
            }
            for (size_t i = 1; i < atom.vars.size(); ++i) {
                int a = find(atom.vars[0]), b = find(atom.vars[i]);
                if (a != b)
                    comp[std::max(a, b)] = std::min(a, b);
            }
        }
        if (edb_atoms > 1)
            return false;
        int roots = 0;
        for (int v = 0; v < rule.num_vars; ++v)
            if (find(v) == v)
                ++roots;
        if (rule.num_vars > 0 && roots != 1)
            return false;
    }
    return true;
}

bool mdlog_derives_goal(const MDLogProgram& p, const RelationalStructure& db)
{
    int n = db.size();
    std::map<std::string, std::vector<char>> derived;
    for (const auto& rule : p.rules)
        for (const auto& atom : rule.body)
            if (!db.signature().contains(atom.pred) && atom.pred != "true"
                && atom.pred != "goal")
                derived[atom.pred].assign(n, 0);
    for (const auto& rule : p.rules)
        if (rule.head.pred != "goal")
            derived[rule.head.pred].assign(n, 0);

    bool goal = false;
    auto atom_holds = [&](const MDLogAtom& atom, const std::vector<int>& env) {
        if (atom.pred == "true")
            return true;
        if (db.signature().contains(atom.pred)) {
            Tuple t;
            for (int v : atom.vars)
                t.push_back(env[v]);
            return db.has_tuple(atom.pred, t);
        }
        return derived[atom.pred][env[atom.vars[0]]] != 0;
    };
    bool changed = true;
    while (changed && !goal) {
        changed = false;
        for (const auto& rule : p.rules) {
            if (rule.num_vars > 0 && n == 0)
                continue;
            std::vector<int> env(rule.num_vars, 0);
            for (;;) {
                bool all = true;
                for (const auto& atom : rule.body)
                    if (!atom_holds(atom, env)) {
                        all = false;
                        break;
                    }
                if (all) {
                    if (rule.head.pred == "goal") {
                        goal = true;
                    } else {
                        char& cell = derived[rule.head.pred][env[rule.head.vars[0]]];
                        if (!cell) {
                            cell = 1;
                            changed = true;
                        }
                    }
                }
                int p2 = rule.num_vars - 1;
                while (p2 >= 0 && env[p2] == n - 1)
                    env[p2--] = 0;
                if (p2 < 0)
                    break;
                ++env[p2];
            }
        }
    }
    return goal;
}

RpqResilienceResult rpq_resilience(const BagDatabase& db, const Rpq& q)
{
    Nfa nfa = rpq_to_nfa(q);
    RpqResilienceResult res;

    HittingSetInstance inst;
    std::map<TupleId, int> vertex_of;
    for (const auto& id : db.endogenous_ids()) {
        vertex_of[id] = static_cast<int>(inst.vertices.size());
        inst.vertices.push_back({id, db.multiplicity(id.relation, id.tuple)});
    }

    std::vector<TupleId> removed;
    for (;;) {
        ++res.iterations;
        bool epsilon_answer = false;
        auto witness = find_witness(db.without(removed).set_structure(), nfa, epsilon_answer);
        if (!witness) {
            res.value = removed.empty() ? Cost(0) : res.value;
            break;
        }
        std::set<int> edge;
        bool all_exogenous = true;
        for (const auto& id : *witness) {
            if (db.tuple_exogenous(id.relation, id.tuple))
                continue;
            all_exogenous = false;
            edge.insert(vertex_of.at(id));
        }
        if (epsilon_answer || all_exogenous) {
            res.value = Cost::infinity();
            res.removed.clear();
            return res;
        }
        inst.hyperedges.push_back(std::vector<int>(edge.begin(), edge.end()));
        HittingSetSolution sol = solve_hitting_set(inst);
        removed.clear();
        res.removed.clear();
        for (int v : sol.chosen) {
            removed.push_back(inst.vertices[v].id);
            res.removed.push_back({inst.vertices[v].id, inst.vertices[v].weight});
        }
        res.value = sol.weight;
    }
    if (removed.empty())
        res.value = Cost(0);
    return res;
}

} // namespace rvc
