#include "rvc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace rvc {

namespace {

    // Internal variable ids: [0, n) structural, then one slack/surplus per
    // inequality row, then one artificial per row that needs one.
    struct Simplex {
        const LpColumnSource& src;
        int m;
        size_t n;
        std::vector<Rational> rhs;     // normalized to rhs >= 0
        std::vector<int> row_flip;     // +1 / -1 applied to the original row
        std::vector<RowSense> senses;  // after normalization

        struct AuxVar {
            int row;
            int coef; // +1 slack, -1 surplus
        };
        std::vector<AuxVar> aux;
        std::vector<size_t> aux_of_row;  // index into aux or npos
        std::vector<int> artificial_row; // artificial k sits in this row
        size_t aux_base = 0, art_base = 0, total_vars = 0;

        std::vector<size_t> basis;              // variable id per row
        std::vector<std::vector<Rational>> binv; // m x m
        std::vector<Rational> xb;
        std::vector<char> in_basis;

        bool phase1 = false;
        Rational obj_sign = 1; // +1 minimize, -1 when maximizing (we minimize -c)

        static constexpr size_t npos = static_cast<size_t>(-1);

        Simplex(LpSense sense, const std::vector<RowSense>& row_senses,
            const std::vector<Rational>& b, const LpColumnSource& source)
            : src(source), m(source.rows())
        {
            if (static_cast<int>(row_senses.size()) != m || static_cast<int>(b.size()) != m)
                throw Error("lp: inconsistent row counts");
            n = src.count();
            obj_sign = sense == LpSense::Minimize ? 1 : -1;
            rhs = b;
            senses = row_senses;
            row_flip.assign(m, 1);
            for (int i = 0; i < m; ++i) {
                if (rhs[i] < 0) {
                    rhs[i] = -rhs[i];
                    row_flip[i] = -1;
                    if (senses[i] == RowSense::LessEq)
                        senses[i] = RowSense::GreaterEq;
                    else if (senses[i] == RowSense::GreaterEq)
                        senses[i] = RowSense::LessEq;
                }
            }
            aux_of_row.assign(m, npos);
            for (int i = 0; i < m; ++i) {
                if (senses[i] == RowSense::LessEq) {
                    aux_of_row[i] = aux.size();
                    aux.push_back({i, +1});
                } else if (senses[i] == RowSense::GreaterEq) {
                    aux_of_row[i] = aux.size();
                    aux.push_back({i, -1});
                }
            }
            aux_base = n;
            art_base = n + aux.size();
            // Rows whose slack cannot seed a feasible basis get an artificial.
            for (int i = 0; i < m; ++i)
                if (senses[i] != RowSense::LessEq)
                    artificial_row.push_back(i);
            total_vars = art_base + artificial_row.size();

            basis.assign(m, npos);
            binv.assign(m, std::vector<Rational>(m, 0));
            for (int i = 0; i < m; ++i)
                binv[i][i] = 1;
            xb = rhs;
            in_basis.assign(total_vars, 0);
            size_t art = 0;
            for (int i = 0; i < m; ++i) {
                if (senses[i] == RowSense::LessEq) {
                    basis[i] = aux_base + aux_of_row[i];
                } else {
                    basis[i] = art_base + art++;
                }
                in_basis[basis[i]] = 1;
            }
        }

        bool is_artificial(size_t id) const { return id >= art_base; }

        void raw_column(size_t id, std::vector<Rational>& col) const
        {
            if (id < n) {
                src.fill(id, col);
                for (int i = 0; i < m; ++i)
                    if (row_flip[i] < 0)
                        col[i] = -col[i];
            } else {
                std::fill(col.begin(), col.end(), Rational(0));
                if (id < art_base) {
                    const AuxVar& a = aux[id - aux_base];
                    col[a.row] = a.coef;
                } else {
                    col[artificial_row[id - art_base]] = 1;
                }
            }
        }

        Rational cost_of(size_t id) const
        {
            if (phase1)
                return is_artificial(id) ? Rational(1) : Rational(0);
            if (id < n)
                return obj_sign * src.objective(id);
            return 0;
        }

        std::vector<Rational> duals() const
        {
            std::vector<Rational> y(m, 0);
            for (int k = 0; k < m; ++k) {
                Rational ck = cost_of(basis[k]);
                if (ck == 0)
                    continue;
                for (int i = 0; i < m; ++i)
                    y[i] += ck * binv[k][i];
            }
            return y;
        }

        Rational reduced_cost(size_t id, const std::vector<Rational>& y,
            std::vector<Rational>& scratch) const
        {
            if (id >= n && id < art_base) { // slack/surplus: single entry
                const AuxVar& a = aux[id - aux_base];
                return cost_of(id) - y[a.row] * a.coef;
            }
            if (id < n) {
                if (const std::vector<Rational>* col = src.view(id)) {
                    Rational d = cost_of(id);
                    for (int i = 0; i < m; ++i) {
                        if ((*col)[i] == 0)
                            continue;
                        Rational term = y[i] * (*col)[i];
                        if (row_flip[i] < 0)
                            d += term;
                        else
                            d -= term;
                    }
                    return d;
                }
            }
            raw_column(id, scratch);
            Rational d = cost_of(id);
            for (int i = 0; i < m; ++i)
                if (scratch[i] != 0)
                    d -= y[i] * scratch[i];
            return d;
        }

        // Partial pricing: scan blocks from a rotating cursor and take the
        // best candidate of the first block that has one; a full wrap-around
        // without candidates proves optimality of the phase.
        mutable size_t price_cursor = 0;

        size_t price_exact(const std::vector<Rational>& y) const
        {
            constexpr size_t kBlock = 192;
            std::vector<Rational> col(m);
            size_t total = art_base;
            if (total == 0)
                return npos;
            size_t start = price_cursor % total;
            size_t scanned = 0;
            while (scanned < total) {
                size_t best = npos;
                Rational best_d = 0;
                size_t block_end = std::min(kBlock, total - scanned);
                for (size_t step = 0; step < block_end; ++step) {
                    size_t id = (start + scanned + step) % total;
                    if (in_basis[id])
                        continue;
                    Rational d = reduced_cost(id, y, col);
                    if (d < 0 && (best == npos || d < best_d)) {
                        best = id;
                        best_d = d;
                    }
                }
                scanned += block_end;
                if (best != npos) {
                    price_cursor = (start + scanned) % total;
                    return best;
                }
            }
            return npos;
        }

        // Lexicographic ratio test (symbolic perturbation): the leaving row
        // minimizes (xb_i, Binv_i)/w_i lexicographically, which rules out
        // cycling and keeps degenerate ties deterministic.
        int ratio_test(const std::vector<Rational>& w) const
        {
            // A basic artificial stuck at zero leaves as soon as the entering
            // column touches its row; this keeps artificials at zero in
            // phase 2 and cannot degrade the objective.
            for (int i = 0; i < m; ++i)
                if (is_artificial(basis[i]) && xb[i] == 0 && w[i] != 0)
                    return i;
            int row = -1;
            for (int i = 0; i < m; ++i) {
                if (w[i] <= 0)
                    continue;
                if (row < 0) {
                    row = i;
                    continue;
                }
                // Compare (xb_i, Binv_i)/w_i against the current best row.
                int cmp = 0;
                {
                    Rational lhs = xb[i] * w[row];
                    Rational rhs = xb[row] * w[i];
                    if (lhs < rhs)
                        cmp = -1;
                    else if (rhs < lhs)
                        cmp = 1;
                }
                for (int k = 0; k < m && cmp == 0; ++k) {
                    Rational lhs = binv[i][k] * w[row];
                    Rational rhs = binv[row][k] * w[i];
                    if (lhs < rhs)
                        cmp = -1;
                    else if (rhs < lhs)
                        cmp = 1;
                }
                if (cmp < 0)
                    row = i;
            }
            return row;
        }

        void pivot(size_t entering, int row, const std::vector<Rational>& w)
        {
            Rational piv = w[row];
            for (int i = 0; i < m; ++i)
                binv[row][i] /= piv;
            xb[row] /= piv;
            for (int i = 0; i < m; ++i) {
                if (i == row || w[i] == 0)
                    continue;
                Rational f = w[i];
                for (int k = 0; k < m; ++k)
                    binv[i][k] -= f * binv[row][k];
                xb[i] -= f * xb[row];
            }
            in_basis[basis[row]] = 0;
            basis[row] = entering;
            in_basis[entering] = 1;
        }

        Rational objective_value() const
        {
            Rational v = 0;
            for (int i = 0; i < m; ++i)
                v += cost_of(basis[i]) * xb[i];
            return v;
        }

        // Runs the current phase to optimality; returns false on unbounded.
        // The lexicographic ratio test makes cycling impossible.
        bool run()
        {
            const bool debug = std::getenv("RVC_LP_DEBUG") != nullptr;
            long long iter = 0;
            std::vector<Rational> col(m), w(m);
            for (;;) {
                if (debug && ++iter % 200 == 0)
                    std::fprintf(stderr, "[lp] phase%d iter=%lld obj=%f\n", phase1 ? 1 : 2,
                        iter, static_cast<double>(objective_value()));
                std::vector<Rational> y = duals();
                size_t entering = price_exact(y);
                if (entering == npos)
                    return true;
                raw_column(entering, col);
                for (int i = 0; i < m; ++i) {
                    w[i] = 0;
                    for (int k = 0; k < m; ++k)
                        if (binv[i][k] != 0 && col[k] != 0)
                            w[i] += binv[i][k] * col[k];
                }
                int row = ratio_test(w);
                if (row < 0)
                    return false;
                pivot(entering, row, w);
            }
        }

        // Pivots zero-valued artificials out of the basis where possible.
        void drive_out_artificials()
        {
            std::vector<Rational> col(m);
            for (int r = 0; r < m; ++r) {
                if (!is_artificial(basis[r]))
                    continue;
                size_t replacement = npos;
                for (size_t id = 0; id < art_base && replacement == npos; ++id) {
                    if (in_basis[id])
                        continue;
                    raw_column(id, col);
                    Rational wr = 0;
                    for (int k = 0; k < m; ++k)
                        if (binv[r][k] != 0 && col[k] != 0)
                            wr += binv[r][k] * col[k];
                    if (wr != 0)
                        replacement = id;
                }
                if (replacement == npos)
                    continue; // redundant row; the artificial stays at zero
                raw_column(replacement, col);
                std::vector<Rational> w(m);
                for (int i = 0; i < m; ++i) {
                    w[i] = 0;
                    for (int k = 0; k < m; ++k)
                        if (binv[i][k] != 0 && col[k] != 0)
                            w[i] += binv[i][k] * col[k];
                }
                pivot(replacement, r, w);
            }
        }
    };

} // namespace

LpResult solve_lp(LpSense sense, const std::vector<RowSense>& row_senses,
    const std::vector<Rational>& rhs, const LpColumnSource& cols)
{
    Simplex s(sense, row_senses, rhs, cols);
    LpResult res;

    if (!s.artificial_row.empty()) {
        s.phase1 = true;
        if (!s.run())
            throw Error("lp: phase 1 unbounded");
        if (s.objective_value() != 0) {
            res.status = LpStatus::Infeasible;
            return res;
        }
        s.drive_out_artificials();
        s.phase1 = false;
    }

    if (!s.run()) {
        res.status = LpStatus::Unbounded;
        return res;
    }

    res.status = LpStatus::Optimal;
    Rational v = s.objective_value();
    res.objective = sense == LpSense::Minimize ? v : -v;
    for (int i = 0; i < s.m; ++i)
        if (s.basis[i] < s.n && s.xb[i] != 0)
            res.solution.push_back({s.basis[i], s.xb[i]});
    std::sort(res.solution.begin(), res.solution.end());
    // Export duals in the original row convention; the internal values refer
    // to flipped rows and the sign-adjusted objective.
    std::vector<Rational> y = s.duals();
    res.duals.resize(s.m);
    for (int i = 0; i < s.m; ++i) {
        Rational v_i = y[i] * s.row_flip[i];
        res.duals[i] = sense == LpSense::Minimize ? v_i : -v_i;
    }
    return res;
}

} // namespace rvc
