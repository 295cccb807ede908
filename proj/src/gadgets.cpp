#include "rvc/gadgets.hpp"

#include <algorithm>
#include <array>
#include <map>

namespace rvc {

bool GadgetReport::all_pass() const
{
    for (const auto& c : checks)
        if (!c.pass)
            return false;
    return true;
}

void GadgetReport::add(const std::string& claim, bool pass, const std::string& detail)
{
    checks.push_back({claim, pass, detail});
}

UnionQuery triangle_query()
{
    Signature sig;
    sig.add("R", 2);
    sig.add("S", 2);
    sig.add("T", 2);
    UnionQuery q;
    q.signature = sig;
    return parse_union_query("q() :- R(x,y), S(y,z), T(z,x).", sig);
}

UnionQuery mu1_query()
{
    Signature sig;
    sig.add("R", 2);
    sig.add("S", 1);
    return parse_union_query("q() :- S(x), R(x,y), R(y,x), R(y,y).", sig);
}

GadgetReport verify_nae_gadget()
{
    GadgetReport report;
    ValuedStructure gamma = gamma_less();
    TauExpression expr;
    expr.variables = {"x", "y", "z"};
    expr.summands = {{"lt", {0, 1}}, {"lt", {1, 2}}, {"lt", {2, 0}}};
    ValuedRelation table = express(gamma, expr, {0, 1, 2});
    ValuedRelation crisp = opt(table);
    bool all = true;
    std::string bad;
    for (int x = 0; x < 2 && all; ++x)
        for (int y = 0; y < 2 && all; ++y)
            for (int z = 0; z < 2 && all; ++z) {
                bool nae = !(x == y && y == z);
                bool in = crisp.at({x, y, z}) == Cost(0);
                if (in != nae) {
                    all = false;
                    bad = "(" + std::to_string(x) + "," + std::to_string(y) + ","
                        + std::to_string(z) + ")";
                }
            }
    report.add("Opt of the directed-cycle expression equals NAE on all 8 triples", all, bad);
    return report;
}

namespace {

    // Chain roles 0..8; weights are copy counts, crisp atoms come from Opt of
    // the base relations.
    struct ChainAtom {
        int rel; // 0=R, 1=S, 2=T
        int u, v;
        int weight; // 0 marks a crisp atom
    };

    constexpr std::array<ChainAtom, 15> kChain{{
        {0, 0, 1, 1}, // R(a,b)
        {1, 1, 2, 2}, // S(b,c)
        {2, 2, 3, 2}, // T(c,d)
        {0, 3, 4, 2}, // R(d,e)
        {1, 4, 5, 2}, // S(e,f)
        {2, 5, 6, 2}, // T(f,g)
        {0, 6, 7, 2}, // R(g,h)
        {1, 7, 8, 1}, // S(h,i)
        {2, 8, 6, 0}, // T*(i,g)
        {1, 7, 5, 0}, // S*(h,f)
        {0, 6, 4, 0}, // R*(g,e)
        {2, 5, 3, 0}, // T*(f,d)
        {1, 4, 2, 0}, // S*(e,c)
        {0, 3, 1, 0}, // R*(d,b)
        {2, 2, 0, 0}, // T*(c,a)
    }};

    constexpr std::array<int, 4> kEvenSoft{1, 3, 5, 7}; // indices into kChain
    constexpr std::array<int, 4> kOddSoft{0, 2, 4, 6};

    const char* rel_name(int rel) { return rel == 0 ? "R" : rel == 1 ? "S" : "T"; }

    struct TriModel {
        std::vector<std::string> names;
        std::array<std::vector<std::vector<char>>, 3> adj;
        std::array<std::vector<std::vector<int>>, 3> in_nb;

        int size() const { return static_cast<int>(names.size()); }

        int add_node(const std::string& name)
        {
            int id = size();
            names.push_back(name);
            for (int r = 0; r < 3; ++r) {
                for (auto& row : adj[r])
                    row.push_back(0);
                adj[r].push_back(std::vector<char>(id + 1, 0));
                in_nb[r].push_back({});
            }
            return id;
        }

        bool edge(int rel, int u, int v) const { return adj[rel][u][v] != 0; }

        // Would adding rel(u,v) close an R->S->T triangle?
        bool creates_triangle(int rel, int u, int v) const
        {
            int n = size();
            if (rel == 0) { // R(u,v): need S(v,z), T(z,u)
                for (int z = 0; z < n; ++z)
                    if (adj[1][v][z] && adj[2][z][u])
                        return true;
            } else if (rel == 1) { // S(u,v): need R(x,u), T(v,x)
                for (int x = 0; x < n; ++x)
                    if (adj[0][x][u] && adj[2][v][x])
                        return true;
            } else { // T(u,v): need R(v,y), S(y,u)
                for (int y = 0; y < n; ++y)
                    if (adj[0][v][y] && adj[1][y][u])
                        return true;
            }
            return false;
        }

        void add_edge(int rel, int u, int v)
        {
            if (adj[rel][u][v])
                return;
            if (creates_triangle(rel, u, v))
                throw Error(std::string("witness model: adding ") + rel_name(rel) + "("
                    + names[u] + "," + names[v] + ") would close a triangle");
            adj[rel][u][v] = 1;
            in_nb[rel][v].push_back(u);
        }

        RelationalStructure to_structure() const
        {
            Signature sig;
            sig.add("R", 2);
            sig.add("S", 2);
            sig.add("T", 2);
            RelationalStructure s(sig, names);
            for (int r = 0; r < 3; ++r)
                for (int u = 0; u < size(); ++u)
                    for (int v = 0; v < size(); ++v)
                        if (adj[r][u][v])
                            s.add_tuple(rel_name(r), {u, v});
            return s;
        }

        static TriModel from_structure(const RelationalStructure& s)
        {
            TriModel m;
            for (const auto& name : s.elements())
                m.add_node(name);
            const char* rels[3] = {"R", "S", "T"};
            for (int r = 0; r < 3; ++r)
                for (const auto& t : s.tuples(rels[r])) {
                    m.adj[r][t[0]][t[1]] = 1;
                    m.in_nb[r][t[1]].push_back(t[0]);
                }
            return m;
        }

        bool has_triangle() const
        {
            int n = size();
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    if (adj[0][x][y])
                        for (int z = 0; z < n; ++z)
                            if (adj[1][y][z] && adj[2][z][x])
                                return true;
            return false;
        }
    };

    struct WitnessBuilder {
        TriModel model;
        int counter = 0;

        // Materializes one cost-7 assignment of the chain: crisp atoms plus
        // the chosen group hold, the other group's atoms stay absent.
        std::array<int, 9> add_phi_witness(const std::map<int, int>& fixed, bool even,
            const std::string& label)
        {
            std::array<int, 9> elem{};
            for (int role = 0; role < 9; ++role) {
                auto it = fixed.find(role);
                elem[role] = it != fixed.end()
                    ? it->second
                    : model.add_node(label + "_" + std::to_string(role));
            }
            auto require = [&](const ChainAtom& atom) {
                int u = elem[atom.u], v = elem[atom.v];
                if (fixed.count(atom.u) && fixed.count(atom.v)) {
                    if (!model.edge(atom.rel, u, v))
                        throw Error("witness template '" + label + "': required edge "
                            + std::string(rel_name(atom.rel)) + "(" + model.names[u] + ","
                            + model.names[v] + ") is missing");
                } else {
                    model.add_edge(atom.rel, u, v);
                }
            };
            for (const auto& atom : kChain)
                if (atom.weight == 0)
                    require(atom);
            for (int idx : even ? kEvenSoft : kOddSoft)
                require(kChain[idx]);
            for (int idx : even ? kOddSoft : kEvenSoft) {
                const ChainAtom& anti = kChain[idx];
                if (fixed.count(anti.u) && fixed.count(anti.v)
                    && model.edge(anti.rel, elem[anti.u], elem[anti.v]))
                    throw Error("witness template '" + label + "': violated atom "
                        + std::string(rel_name(anti.rel)) + " unexpectedly holds");
            }
            return elem;
        }
    };

} // namespace

RelationalStructure build_triangle_witness_model()
{
    WitnessBuilder b;
    auto p = b.add_phi_witness({}, true, "p");  // even-pattern chain, elements p_0..p_8
    auto q = b.add_phi_witness({}, false, "q"); // odd-pattern chain

    // Rename the chain elements to their published names.
    for (int i = 0; i < 9; ++i) {
        b.model.names[p[i]] = "p" + std::to_string(i);
        b.model.names[q[i]] = "q" + std::to_string(i);
    }
    int p0 = p[0], p1 = p[1], q0 = q[0], q1 = q[1];

    // Auxiliary pairs: one without S, one with S.
    int w01a = b.model.add_node("w01a"), w01b = b.model.add_node("w01b");
    int w11a = b.model.add_node("w11a"), w11b = b.model.add_node("w11b");
    b.model.add_edge(1, w11a, w11b);

    // Inner triples for the three one-in-three patterns.
    int x1 = b.model.add_node("t1x"), y1 = b.model.add_node("t1y"), z1 = b.model.add_node("t1z");
    b.model.add_edge(1, y1, z1); // S(y,z)
    b.model.add_edge(2, z1, x1); // T(z,x)
    int x2 = b.model.add_node("t2x"), y2 = b.model.add_node("t2y"), z2 = b.model.add_node("t2z");
    b.model.add_edge(0, x2, y2); // R(x,y)
    b.model.add_edge(2, z2, x2); // T(z,x)
    int x3 = b.model.add_node("t3x"), y3 = b.model.add_node("t3y"), z3 = b.model.add_node("t3z");
    b.model.add_edge(0, x3, y3); // R(x,y)
    b.model.add_edge(1, y3, z3); // S(y,z)

    // Witnesses for the designated memberships used by the one-in-three check.
    b.add_phi_witness({{0, q0}, {1, q1}, {7, w01a}, {8, w01b}}, false, "A");
    b.add_phi_witness({{0, x1}, {1, y1}, {4, w01a}, {5, w01b}}, true, "B");
    b.add_phi_witness({{0, p0}, {1, p1}, {7, y1}, {8, z1}}, true, "C2");
    b.add_phi_witness({{0, p0}, {1, p1}, {5, z1}, {6, x1}}, true, "D2");
    b.add_phi_witness({{0, p0}, {1, p1}, {7, w11a}, {8, w11b}}, true, "C");
    b.add_phi_witness({{0, x2}, {1, y2}, {4, w11a}, {5, w11b}}, false, "D");
    b.add_phi_witness({{0, q0}, {1, q1}, {7, y2}, {8, z2}}, false, "E2");
    b.add_phi_witness({{0, p0}, {1, p1}, {5, z2}, {6, x2}}, true, "F2");
    b.add_phi_witness({{0, x3}, {1, y3}, {4, w11a}, {5, w11b}}, false, "E");
    b.add_phi_witness({{0, p0}, {1, p1}, {7, y3}, {8, z3}}, true, "F");
    b.add_phi_witness({{0, q0}, {1, q1}, {5, z3}, {6, x3}}, false, "G");

    if (b.model.has_triangle())
        throw Error("internal: witness model contains a triangle");
    return b.model.to_structure();
}

namespace {

    // Membership bitset over 4-tuples of model elements.
    struct Table4 {
        int n = 0;
        std::vector<uint64_t> bits;

        explicit Table4(int n_) : n(n_)
        {
            size_t total = static_cast<size_t>(n) * n * n * n;
            bits.assign((total + 63) / 64, 0);
        }
        size_t index(int a, int b, int c, int d) const
        {
            return ((static_cast<size_t>(a) * n + b) * n + c) * n + d;
        }
        void set(int a, int b, int c, int d)
        {
            size_t i = index(a, b, c, d);
            bits[i >> 6] |= uint64_t(1) << (i & 63);
        }
        bool get(int a, int b, int c, int d) const
        {
            size_t i = index(a, b, c, d);
            return (bits[i >> 6] >> (i & 63)) & 1;
        }
    };

    struct GadgetTables {
        int n = 0;
        Table4 rt, rs, rts; // value-7 memberships of RT, RS, and the RS-tilde variant
        int min_cost = 1 << 30;

        GadgetTables(int n_) : n(n_), rt(n_), rs(n_), rts(n_) {}
    };

    // Enumerates all finite-cost chain assignments (crisp atoms force each
    // bound variable into an in-neighbor list) and records every projection
    // that attains cost 7.
    GadgetTables sweep_chain(const TriModel& m)
    {
        GadgetTables tables(m.size());
        int n = m.size();
        auto soft = [&](int rel, int u, int v, int w) { return m.adj[rel][u][v] ? 0 : w; };
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                int cost_b = soft(0, a, b, 1);
                if (cost_b > 7)
                    continue;
                for (int c : m.in_nb[2][a]) { // T*(c,a)
                    int cost_c = cost_b + soft(1, b, c, 2);
                    if (cost_c > 7)
                        continue;
                    for (int d : m.in_nb[0][b]) { // R*(d,b)
                        int cost_d = cost_c + soft(2, c, d, 2);
                        if (cost_d > 7)
                            continue;
                        for (int e : m.in_nb[1][c]) { // S*(e,c)
                            int cost_e = cost_d + soft(0, d, e, 2);
                            if (cost_e > 7)
                                continue;
                            for (int f : m.in_nb[2][d]) { // T*(f,d)
                                int cost_f = cost_e + soft(1, e, f, 2);
                                if (cost_f > 7)
                                    continue;
                                for (int g : m.in_nb[0][e]) { // R*(g,e)
                                    int cost_g = cost_f + soft(2, f, g, 2);
                                    if (cost_g > 7)
                                        continue;
                                    for (int h : m.in_nb[1][f]) { // S*(h,f)
                                        int cost_h = cost_g + soft(0, g, h, 2);
                                        if (cost_h > 7)
                                            continue;
                                        for (int i : m.in_nb[2][g]) { // T*(i,g)
                                            int total = cost_h + soft(1, h, i, 1);
                                            if (total > 7)
                                                continue;
                                            tables.min_cost = std::min(tables.min_cost, total);
                                            if (total == 7) {
                                                tables.rt.set(a, b, f, g);
                                                tables.rs.set(a, b, h, i);
                                                tables.rts.set(a, b, e, f);
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        return tables;
    }

} // namespace

bool triangle_packing_exists()
{
    // Atom copies of the chain expression, crisp ones included once.
    struct Copy {
        int rel, u, v;
    };
    std::vector<Copy> copies;
    for (const auto& atom : kChain) {
        int reps = atom.weight == 0 ? 1 : atom.weight;
        for (int i = 0; i < reps; ++i)
            copies.push_back({atom.rel, atom.u, atom.v});
    }
    // Candidate triangles R(u,v), S(v,w), T(w,u) over copy indices.
    std::vector<std::array<int, 3>> candidates;
    for (size_t ri = 0; ri < copies.size(); ++ri) {
        if (copies[ri].rel != 0)
            continue;
        for (size_t si = 0; si < copies.size(); ++si) {
            if (copies[si].rel != 1 || copies[si].u != copies[ri].v)
                continue;
            for (size_t ti = 0; ti < copies.size(); ++ti) {
                if (copies[ti].rel != 2 || copies[ti].u != copies[si].v
                    || copies[ti].v != copies[ri].u)
                    continue;
                candidates.push_back({static_cast<int>(ri), static_cast<int>(si),
                    static_cast<int>(ti)});
            }
        }
    }
    std::vector<char> used(copies.size(), 0);
    std::function<bool(int)> place = [&](int placed) {
        if (placed == 7)
            return true;
        for (const auto& cand : candidates) {
            if (used[cand[0]] || used[cand[1]] || used[cand[2]])
                continue;
            for (int x : cand)
                used[x] = 1;
            if (place(placed + 1))
                return true;
            for (int x : cand)
                used[x] = 0;
        }
        return false;
    };
    return place(0);
}

GadgetReport verify_triangle_gadget(const RelationalStructure& model)
{
    GadgetReport report;
    TriModel m = TriModel::from_structure(model);
    int n = m.size();

    report.add("model avoids the triangle query", !m.has_triangle());
    bool nonempty = true;
    for (int r = 0; r < 3; ++r) {
        bool any = false;
        for (int u = 0; u < n && !any; ++u)
            for (int v = 0; v < n && !any; ++v)
                any = m.adj[r][u][v];
        nonempty = nonempty && any;
    }
    report.add("R, S, T are non-empty (Opt is the crisp model relation)", nonempty);
    report.add("seven variable-disjoint triangle images pack into the expression",
        triangle_packing_exists());
    if (!report.all_pass())
        return report;

    GadgetTables tables = sweep_chain(m);
    report.add("minimum cost of the expression on the model is 7",
        tables.min_cost == 7, "found " + std::to_string(tables.min_cost));
    if (tables.min_cost != 7)
        return report;

    // Forward implications of the expressed relations.
    auto check_forward = [&](const Table4& t, const std::string& name,
                             auto&& condition) {
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d)
                        if (t.get(a, b, c, d) && !condition(a, b, c, d)) {
                            report.add(name, false,
                                "(" + m.names[a] + "," + m.names[b] + "," + m.names[c] + ","
                                    + m.names[d] + ")");
                            return;
                        }
        report.add(name, true);
    };
    check_forward(tables.rt, "RT members satisfy R(a,b) xor T(f,g)",
        [&](int a, int b, int f, int g) { return bool(m.adj[0][a][b]) != bool(m.adj[2][f][g]); });
    check_forward(tables.rs, "RS members satisfy R(a,b) xor S(h,i)",
        [&](int a, int b, int h, int i) { return bool(m.adj[0][a][b]) != bool(m.adj[1][h][i]); });
    check_forward(tables.rts, "RS~ members satisfy R(a,b) iff S(e,f)",
        [&](int a, int b, int e, int f) { return bool(m.adj[0][a][b]) == bool(m.adj[1][e][f]); });

    // Designated encodings are located by element name.
    std::map<std::string, int> by_name;
    for (int i = 0; i < n; ++i)
        by_name[m.names[i]] = i;
    auto have = [&](std::initializer_list<const char*> names) {
        for (const char* s : names)
            if (!by_name.count(s))
                return false;
        return true;
    };
    if (!have({"p0", "p1", "q0", "q1"})) {
        report.add("designated encoding pairs p0,p1 / q0,q1 present", false,
            "model does not name them");
        return report;
    }
    int p0 = by_name["p0"], p1 = by_name["p1"], q0 = by_name["q0"], q1 = by_name["q1"];
    report.add("designated pairs have the intended R pattern",
        m.adj[0][q0][q1] && !m.adj[0][p0][p1]);

    if (have({"p5", "p6", "p7", "p8", "q5", "q6", "q7", "q8", "p4", "q4"})) {
        bool pos = tables.rt.get(p0, p1, by_name["p5"], by_name["p6"])
            && tables.rt.get(q0, q1, by_name["q5"], by_name["q6"])
            && tables.rs.get(p0, p1, by_name["p7"], by_name["p8"])
            && tables.rs.get(q0, q1, by_name["q7"], by_name["q8"])
            && tables.rts.get(p0, p1, by_name["p4"], by_name["p5"])
            && tables.rts.get(q0, q1, by_name["q4"], by_name["q5"]);
        report.add("designated in-chain memberships of RT, RS, RS~ hold", pos);
    }

    // RR slices for the two encodings, then the six-ary relation on them.
    auto rr_slice = [&](int u, int v) {
        std::vector<char> out(static_cast<size_t>(n) * n, 0);
        std::vector<std::pair<int, int>> wz;
        for (int w = 0; w < n; ++w)
            for (int z = 0; z < n; ++z)
                if (tables.rs.get(u, v, w, z))
                    wz.push_back({w, z});
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                for (const auto& [w, z] : wz)
                    if (tables.rts.get(x, y, w, z)) {
                        out[static_cast<size_t>(x) * n + y] = 1;
                        break;
                    }
        return out;
    };
    std::vector<char> rr_p0 = rr_slice(p0, p1), rr_p1 = rr_slice(q0, q1);
    bool rr_forward = true;
    std::string rr_bad;
    for (int x = 0; x < n && rr_forward; ++x)
        for (int y = 0; y < n && rr_forward; ++y) {
            if (rr_p0[static_cast<size_t>(x) * n + y] && m.adj[0][x][y] == 0) {
                // encoding 0: RR demands R(x,y) to hold
                rr_forward = false;
                rr_bad = "P0," + m.names[x] + "," + m.names[y];
            }
            if (rr_p1[static_cast<size_t>(x) * n + y] && m.adj[0][x][y] != 0) {
                rr_forward = false;
                rr_bad = "P1," + m.names[x] + "," + m.names[y];
            }
        }
    report.add("RR members satisfy R(u,v) xor R(x,y) on the encoding slices", rr_forward, rr_bad);

    // Inner minimum of the six-ary expression per encoding triple.
    auto inner_min = [&](const std::vector<char>& rr, int u2, int v2, int u3, int v3) {
        int best = 1 << 30;
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                if (!rr[static_cast<size_t>(x) * n + y])
                    continue;
                for (int z = 0; z < n; ++z) {
                    if (!tables.rs.get(u2, v2, y, z) || !tables.rt.get(u3, v3, z, x))
                        continue;
                    int c = (m.adj[0][x][y] ? 0 : 1) + (m.adj[1][y][z] ? 0 : 1)
                        + (m.adj[2][z][x] ? 0 : 1);
                    best = std::min(best, c);
                }
            }
        return best;
    };
    bool oit_ok = true;
    std::string oit_bad;
    for (int b1 = 0; b1 < 2 && oit_ok; ++b1)
        for (int b2 = 0; b2 < 2 && oit_ok; ++b2)
            for (int b3 = 0; b3 < 2 && oit_ok; ++b3) {
                const std::vector<char>& rr = b1 ? rr_p1 : rr_p0;
                int u2 = b2 ? q0 : p0, v2 = b2 ? q1 : p1;
                int u3 = b3 ? q0 : p0, v3 = b3 ? q1 : p1;
                int value = inner_min(rr, u2, v2, u3, v3);
                bool member = value == 1;
                bool expected = b1 + b2 + b3 == 1;
                if (member != expected) {
                    oit_ok = false;
                    oit_bad = "(" + std::to_string(b1) + "," + std::to_string(b2) + ","
                        + std::to_string(b3) + ") inner=" + std::to_string(value);
                }
            }
    report.add("M on the designated encodings equals the one-in-three relation", oit_ok, oit_bad);
    return report;
}

std::string mu1_precondition_violation(const RelationalStructure& f)
{
    int n = f.size();
    auto r = [&](int x, int y) { return f.has_tuple("R", {x, y}); };
    auto s = [&](int x) { return f.has_tuple("S", {x}); };
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            if (s(x) && r(x, y) && r(y, x) && r(y, y))
                return "satisfies the query at (" + f.elements()[x] + "," + f.elements()[y] + ")";
    for (int x = 0; x < n; ++x)
        if (s(x) && r(x, x))
            return "marked element with a loop at " + f.elements()[x];
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (x == y)
                continue;
            if (!r(x, y) && !r(y, x))
                return "totality fails at (" + f.elements()[x] + "," + f.elements()[y] + ")";
            bool dbl = (r(x, y) && r(y, x)) || (s(x) && r(y, y)) || (r(x, x) && s(y));
            if (!dbl)
                return "double condition fails at (" + f.elements()[x] + "," + f.elements()[y] + ")";
        }
    return "";
}

Mu1Product build_mu1_product(const RelationalStructure& f)
{
    std::string violation = mu1_precondition_violation(f);
    if (!violation.empty())
        throw Error("mu1 product: " + violation);
    int n = f.size();
    auto r = [&](int x, int y) { return f.has_tuple("R", {x, y}); };
    auto s = [&](int x) { return f.has_tuple("S", {x}); };

    Signature sig;
    sig.add("R", 2);
    sig.add("S", 1);
    std::vector<std::string> names;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            names.push_back("(" + f.elements()[x] + "," + f.elements()[y] + ")");
    auto pid = [&](int x, int y) { return x * n + y; };

    RelationalStructure M(sig, names), N(sig, names);
    // Product rule for R, conjunction/disjunction rules for S, loops in N.
    for (int x1 = 0; x1 < n; ++x1)
        for (int y1 = 0; y1 < n; ++y1)
            for (int x2 = 0; x2 < n; ++x2)
                for (int y2 = 0; y2 < n; ++y2)
                    if (r(x1, x2) && r(y1, y2)) {
                        M.add_tuple("R", {pid(x1, y1), pid(x2, y2)});
                        N.add_tuple("R", {pid(x1, y1), pid(x2, y2)});
                    }
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (s(x) && s(y))
                N.add_tuple("S", {pid(x, y)});
            if (s(x) || s(y))
                M.add_tuple("S", {pid(x, y)});
            if (r(x, x) || r(y, y))
                N.add_tuple("R", {pid(x, y), pid(x, y)});
        }
    // One-directional additions (A)-(D).
    for (int x1 = 0; x1 < n; ++x1)
        for (int y1 = 0; y1 < n; ++y1)
            for (int x2 = 0; x2 < n; ++x2)
                for (int y2 = 0; y2 < n; ++y2) {
                    bool a = s(x1) && r(x1, x2) && r(x2, x2) && r(y2, y2) && r(y2, y1) && s(y1);
                    bool bcase = r(x1, x1) && r(x1, x2) && s(x2) && y1 == y2 && r(y1, y2);
                    bool c = s(y1) && r(y1, y2) && r(y2, y2) && r(x2, x2) && r(x2, x1) && s(x1);
                    bool d = r(y1, y1) && r(y1, y2) && s(y2) && x1 == x2 && r(x1, x2);
                    if (a || bcase || c || d) {
                        M.add_tuple("R", {pid(x1, y1), pid(x2, y2)});
                        N.add_tuple("R", {pid(x2, y2), pid(x1, y1)});
                    }
                }
    // Deterministic completion: scan distinct pairs lexicographically and add
    // both R edges wherever the double condition still fails.
    auto complete = [&](RelationalStructure& st) {
        int nn = n * n;
        for (int pq = 0; pq < nn; ++pq)
            for (int qq = pq + 1; qq < nn; ++qq) {
                auto rr = [&](int u, int v) { return st.has_tuple("R", {u, v}); };
                auto ss = [&](int u) { return st.has_tuple("S", {u}); };
                bool dbl = (rr(pq, qq) && rr(qq, pq)) || (ss(pq) && rr(qq, qq))
                    || (rr(pq, pq) && ss(qq));
                if (!dbl) {
                    st.add_tuple("R", {pq, qq});
                    st.add_tuple("R", {qq, pq});
                }
            }
    };
    complete(M);
    complete(N);
    return {std::move(M), std::move(N)};
}

GadgetReport verify_mu1_polymorphism(const RelationalStructure& f)
{
    GadgetReport report;
    std::string violation = mu1_precondition_violation(f);
    if (!violation.empty()) {
        report.add("model meets the preconditions", false, violation);
        return report;
    }
    report.add("model meets the preconditions", true);
    Mu1Product prod = build_mu1_product(f);
    int n = f.size();
    auto pid = [&](int x, int y) { return x * n + y; };
    auto check_total = [&](const RelationalStructure& st, const std::string& which) {
        for (int u = 0; u < n * n; ++u)
            for (int v = 0; v < n * n; ++v) {
                if (u == v)
                    continue;
                if (!st.has_tuple("R", {u, v}) && !st.has_tuple("R", {v, u})) {
                    report.add(which + " satisfies totality", false,
                        st.elements()[u] + "," + st.elements()[v]);
                    return;
                }
            }
        report.add(which + " satisfies totality", true);
    };
    check_total(prod.m, "M");
    check_total(prod.n, "N");

    UnionQuery mu = mu1_query();
    report.add("M avoids the query", !satisfies(prod.m, mu));
    report.add("N avoids the query", !satisfies(prod.n, mu));

    auto r = [&](int x, int y) { return f.has_tuple("R", {x, y}); };
    auto s = [&](int x) { return f.has_tuple("S", {x}); };

    // S-case equality: cost_M(S) + cost_N(S) = cost(S(x)) + cost(S(y)).
    bool s_ok = true;
    std::string s_bad;
    for (int x = 0; x < n && s_ok; ++x)
        for (int y = 0; y < n && s_ok; ++y) {
            int lhs = (prod.m.has_tuple("S", {pid(x, y)}) ? 0 : 1)
                + (prod.n.has_tuple("S", {pid(x, y)}) ? 0 : 1);
            int rhs = (s(x) ? 0 : 1) + (s(y) ? 0 : 1);
            if (lhs != rhs) {
                s_ok = false;
                s_bad = "(" + f.elements()[x] + "," + f.elements()[y] + ")";
            }
        }
    report.add("S-case improvement holds with equality", s_ok, s_bad);

    // R-case inequality on all pairs of pairs.
    bool r_ok = true;
    std::string r_bad;
    for (int x1 = 0; x1 < n && r_ok; ++x1)
        for (int y1 = 0; y1 < n && r_ok; ++y1)
            for (int x2 = 0; x2 < n && r_ok; ++x2)
                for (int y2 = 0; y2 < n && r_ok; ++y2) {
                    int lhs = (prod.m.has_tuple("R", {pid(x1, y1), pid(x2, y2)}) ? 0 : 1)
                        + (prod.n.has_tuple("R", {pid(x1, y1), pid(x2, y2)}) ? 0 : 1);
                    int rhs = (r(x1, x2) ? 0 : 1) + (r(y1, y2) ? 0 : 1);
                    if (lhs > rhs) {
                        r_ok = false;
                        r_bad = "((" + f.elements()[x1] + "," + f.elements()[y1] + "),("
                            + f.elements()[x2] + "," + f.elements()[y2] + "))";
                    }
                }
    report.add("R-case improvement inequality holds on all pairs", r_ok, r_bad);
    return report;
}

RelationalStructure mu1_five_element_model()
{
    Signature sig;
    sig.add("R", 2);
    sig.add("S", 1);
    RelationalStructure f(sig, {"p", "s1", "s2", "l1", "l2"});
    int p = 0, s1 = 1, s2 = 2, l1 = 3, l2 = 4;
    f.add_tuple("S", {s1});
    f.add_tuple("S", {s2});
    f.add_tuple("R", {l1, l1});
    f.add_tuple("R", {l2, l2});
    for (int other : {s1, s2, l1, l2}) {
        f.add_tuple("R", {p, other});
        f.add_tuple("R", {other, p});
    }
    f.add_tuple("R", {s1, s2});
    f.add_tuple("R", {s2, s1});
    f.add_tuple("R", {l1, l2});
    f.add_tuple("R", {l2, l1});
    for (int si : {s1, s2})
        for (int li : {l1, l2})
            f.add_tuple("R", {si, li});
    return f;
}

} // namespace rvc
