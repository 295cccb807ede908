#include "rvc/fractional.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

#include "rvc/lp.hpp"

namespace rvc {

int OperationTable::apply(const Tuple& args) const
{
    if (static_cast<int>(args.size()) != arity)
        throw Error("operation arity mismatch");
    size_t idx = 0;
    for (int v : args)
        idx = idx * static_cast<size_t>(domain_size) + static_cast<size_t>(v);
    return table[idx];
}

Tuple OperationTable::apply_componentwise(const std::vector<Tuple>& tuples) const
{
    if (static_cast<int>(tuples.size()) != arity)
        throw Error("operation arity mismatch");
    size_t k = tuples[0].size();
    Tuple out(k);
    Tuple args(arity);
    for (size_t i = 0; i < k; ++i) {
        for (int j = 0; j < arity; ++j)
            args[j] = tuples[j][i];
        out[i] = apply(args);
    }
    return out;
}

bool OperationTable::is_cyclic() const
{
    if (arity < 2)
        return true;
    size_t total = table.size();
    Tuple t(arity, 0);
    for (size_t idx = 0; idx < total; ++idx) {
        size_t rest = idx;
        for (int p = arity - 1; p >= 0; --p) {
            t[p] = static_cast<int>(rest % domain_size);
            rest /= domain_size;
        }
        size_t rotated = 0;
        for (int p = 1; p < arity; ++p)
            rotated = rotated * domain_size + t[p];
        rotated = rotated * domain_size + t[0];
        if (table[idx] != table[rotated])
            return false;
    }
    return true;
}

bool OperationTable::is_siggers() const
{
    if (arity != 4)
        return false;
    Tuple lhs(4), rhs(4);
    for (int a = 0; a < domain_size; ++a)
        for (int r = 0; r < domain_size; ++r)
            for (int e = 0; e < domain_size; ++e) {
                lhs = {a, r, e, a};
                rhs = {r, a, r, e};
                if (apply(lhs) != apply(rhs))
                    return false;
            }
    return true;
}

bool OperationTable::is_injective() const
{
    std::vector<char> seen(domain_size, 0);
    for (int v : table) {
        if (seen[v])
            return false;
        seen[v] = 1;
    }
    return true;
}

OperationTable OperationTable::projection(int arity, int domain_size, int coordinate)
{
    OperationTable op;
    op.arity = arity;
    op.domain_size = domain_size;
    size_t total = 1;
    for (int i = 0; i < arity; ++i)
        total *= static_cast<size_t>(domain_size);
    op.table.resize(total);
    for (size_t idx = 0; idx < total; ++idx) {
        size_t rest = idx;
        int val = 0;
        for (int p = arity - 1; p >= 0; --p) {
            if (p == coordinate)
                val = static_cast<int>(rest % domain_size);
            rest /= domain_size;
        }
        op.table[idx] = val;
    }
    return op;
}

void FractionalOperation::validate() const
{
    Rational total = 0;
    for (const auto& [op, w] : support) {
        if (op.arity != arity)
            throw Error("fractional operation: arity mismatch in support");
        if (w <= 0)
            throw Error("fractional operation: weights must be positive");
        total += w;
    }
    if (total != 1)
        throw Error("fractional operation: weights must sum to 1");
}

FractionalOperation FractionalOperation::identity(int arity, int domain_size)
{
    FractionalOperation omega;
    omega.arity = arity;
    for (int i = 0; i < arity; ++i)
        omega.support.push_back(
            {OperationTable::projection(arity, domain_size, i), Rational(1, arity)});
    return omega;
}

bool improves(const FractionalOperation& omega, const ValuedRelation& r, size_t family_cap)
{
    int ell = omega.arity;
    int k = r.arity();
    int nd = r.domain_size();
    size_t families = 1;
    for (int i = 0; i < k * ell; ++i) {
        families *= static_cast<size_t>(nd);
        if (families > family_cap)
            throw CapExceeded("improves: family space exceeds cap");
    }
    std::vector<Tuple> family(ell, Tuple(k, 0));
    std::vector<int> counter(k * ell, 0);
    Rational inv_ell(1, ell);
    for (;;) {
        for (int j = 0; j < ell; ++j)
            for (int p = 0; p < k; ++p)
                family[j][p] = counter[j * k + p];
        Cost rhs_sum(0);
        for (int j = 0; j < ell; ++j)
            rhs_sum += r.at(family[j]);
        if (rhs_sum.is_finite()) {
            Cost lhs(0);
            for (const auto& [op, w] : omega.support) {
                Cost c = r.at(op.apply_componentwise(family));
                if (c.is_infinite()) {
                    lhs = Cost::infinity();
                    break;
                }
                lhs += Cost(w * c.value());
            }
            if (!(lhs <= Cost(inv_ell * rhs_sum.value())))
                return false;
        }
        int p = k * ell - 1;
        while (p >= 0 && counter[p] == nd - 1)
            counter[p--] = 0;
        if (p < 0)
            break;
        ++counter[p];
    }
    return true;
}

bool is_fractional_polymorphism(const FractionalOperation& omega, const ValuedStructure& gamma)
{
    omega.validate();
    for (const auto& rinfo : gamma.signature().relations())
        if (!improves(omega, gamma.relation(rinfo.name)))
            return false;
    return true;
}

namespace {

    struct ImprovementRow {
        const ValuedRelation* relation;
        std::vector<Tuple> family; // ell k-tuples
        Rational rhs;              // (1/ell) * sum of R(a^j), finite by construction
    };

    std::vector<ImprovementRow> improvement_rows(const ValuedStructure& gamma, int ell)
    {
        std::vector<ImprovementRow> rows;
        Rational inv_ell(1, ell);
        for (const auto& rinfo : gamma.signature().relations()) {
            const ValuedRelation& rel = gamma.relation(rinfo.name);
            int k = rinfo.arity;
            int nd = gamma.domain_size();
            std::vector<int> counter(k * ell, 0);
            for (;;) {
                std::vector<Tuple> family(ell, Tuple(k));
                for (int j = 0; j < ell; ++j)
                    for (int p = 0; p < k; ++p)
                        family[j][p] = counter[j * k + p];
                Cost rhs_sum(0);
                for (int j = 0; j < ell; ++j)
                    rhs_sum += rel.at(family[j]);
                if (rhs_sum.is_finite())
                    rows.push_back({&rel, std::move(family), inv_ell * rhs_sum.value()});
                int p = k * ell - 1;
                while (p >= 0 && counter[p] == nd - 1)
                    counter[p--] = 0;
                if (p < 0)
                    break;
                ++counter[p];
            }
        }
        return rows;
    }

    // Operation-table indices of the family's coordinate columns; the image
    // tuple of an operation is read off with one table lookup per position.
    std::vector<size_t> family_indices(const ImprovementRow& row, int nd)
    {
        int ell = static_cast<int>(row.family.size());
        int k = static_cast<int>(row.family[0].size());
        std::vector<size_t> idx(k);
        for (int p = 0; p < k; ++p) {
            size_t v = 0;
            for (int j = 0; j < ell; ++j)
                v = v * nd + row.family[j][p];
            idx[p] = v;
        }
        return idx;
    }

    Cost row_coefficient(const ImprovementRow& row, const std::vector<size_t>& idx,
        const OperationTable& op)
    {
        size_t image = 0;
        for (size_t p = 0; p < idx.size(); ++p)
            image = image * op.domain_size + op.table[idx[p]];
        return row.relation->at_index(image);
    }

    struct LazyResult {
        LpStatus status = LpStatus::Infeasible;
        Rational objective;
        std::vector<std::pair<size_t, Rational>> solution;
    };

    // Column-and-row generation: the exact simplex only ever sees a small
    // master (active improvement rows x active operations). Rows are separated
    // against the master solution, columns priced against the master duals;
    // the full LPs here are far too degenerate to attack head-on.
    LazyResult solve_fpol_lp(const std::vector<ImprovementRow>& rows,
        const std::vector<OperationTable>& ops, const std::vector<Rational>& objective,
        LpSense sense)
    {
        const bool debug = std::getenv("RVC_LP_DEBUG") != nullptr;
        const int nd = ops.empty() ? 1 : ops[0].domain_size;
        LazyResult out;

        std::vector<std::vector<size_t>> fam_idx(rows.size());
        for (size_t i = 0; i < rows.size(); ++i)
            fam_idx[i] = family_indices(rows[i], nd);

        // Operations mapping any finite family to an infeasible tuple are
        // forced to weight zero and never become columns.
        std::vector<char> excluded(ops.size(), 0);
        for (size_t j = 0; j < ops.size(); ++j)
            for (size_t i = 0; i < rows.size(); ++i)
                if (row_coefficient(rows[i], fam_idx[i], ops[j]).is_infinite()) {
                    excluded[j] = 1;
                    break;
                }

        // Rows that can never bind under the weight normalization.
        std::vector<size_t> candidates;
        for (size_t i = 0; i < rows.size(); ++i)
            if (Cost(rows[i].rhs) < rows[i].relation->max_finite_value())
                candidates.push_back(i);

        std::vector<size_t> act_rows, act_cols;
        std::vector<char> row_active(rows.size(), 0), col_active(ops.size(), 0);
        auto add_col = [&](size_t j) {
            if (!col_active[j]) {
                col_active[j] = 1;
                act_cols.push_back(j);
            }
        };
        for (size_t j = 0; j < ops.size() && act_cols.size() < 8; ++j)
            if (!excluded[j] && objective[j] != 0)
                add_col(j);
        size_t stride = std::max<size_t>(1, ops.size() / 96);
        for (size_t j = 0; j < ops.size(); j += stride)
            if (!excluded[j])
                add_col(j);
        for (size_t j = 0; j < ops.size() && act_cols.size() < 8; ++j)
            if (!excluded[j])
                add_col(j);
        if (act_cols.empty()) {
            out.status = LpStatus::Infeasible; // no admissible operation at all
            return out;
        }

        auto master_columns = [&](bool penalty) {
            int r = static_cast<int>(act_rows.size());
            std::vector<std::vector<Rational>> cols;
            std::vector<Rational> obj;
            for (size_t j : act_cols) {
                std::vector<Rational> col(r + 1, 0);
                for (int i = 0; i < r; ++i)
                    col[i] = row_coefficient(rows[act_rows[i]], fam_idx[act_rows[i]], ops[j])
                                 .value();
                col[r] = 1;
                cols.push_back(std::move(col));
                obj.push_back(penalty ? Rational(0) : objective[j]);
            }
            if (penalty) {
                for (int i = 0; i < r; ++i) {
                    std::vector<Rational> col(r + 1, 0);
                    col[i] = -1;
                    cols.push_back(std::move(col));
                    obj.push_back(1);
                }
            }
            return std::make_pair(std::move(cols), std::move(obj));
        };
        auto master_rhs = [&]() {
            std::vector<Rational> rhs;
            for (size_t i : act_rows)
                rhs.push_back(rows[i].rhs);
            rhs.push_back(1);
            return rhs;
        };
        auto master_senses = [&]() {
            std::vector<RowSense> senses(act_rows.size(), RowSense::LessEq);
            senses.push_back(RowSense::Equal);
            return senses;
        };

        // Prices every operation against master duals; returns improving ops,
        // best first. `improves` is d < 0 for minimization duals as exported.
        auto price_columns = [&](const std::vector<Rational>& duals, bool minimize,
                                 const std::vector<Rational>& obj_vec) {
            int r = static_cast<int>(act_rows.size());
            std::vector<double> yd(r + 1);
            for (int i = 0; i <= r; ++i)
                yd[i] = static_cast<double>(duals[i]);
            std::vector<std::pair<double, size_t>> guesses;
            for (size_t j = 0; j < ops.size(); ++j) {
                if (excluded[j] || col_active[j])
                    continue;
                double d = static_cast<double>(obj_vec[j]) - yd[r];
                for (int i = 0; i < r; ++i)
                    d -= yd[i]
                        * static_cast<double>(
                            row_coefficient(rows[act_rows[i]], fam_idx[act_rows[i]], ops[j])
                                .value());
                if (minimize ? d < 1e-7 : d > -1e-7)
                    guesses.push_back({minimize ? d : -d, j});
            }
            std::sort(guesses.begin(), guesses.end());
            std::vector<size_t> improving;
            for (const auto& [score, j] : guesses) {
                Rational d = obj_vec[j] - duals[r];
                for (int i = 0; i < static_cast<int>(act_rows.size()); ++i)
                    d -= duals[i]
                        * row_coefficient(rows[act_rows[i]], fam_idx[act_rows[i]], ops[j])
                              .value();
                bool improves = minimize ? d < 0 : d > 0;
                if (improves) {
                    improving.push_back(j);
                    if (improving.size() >= 32)
                        break;
                }
            }
            return improving;
        };

        std::vector<Rational> zero_obj(ops.size(), 0);
        bool ensure_feasible = false;
        for (int round = 1;; ++round) {
            LpResult lp;
            if (!ensure_feasible) {
                auto [cols, obj] = master_columns(false);
                DenseColumns master(static_cast<int>(act_rows.size()) + 1, std::move(cols),
                    std::move(obj));
                lp = solve_lp(sense, master_senses(), master_rhs(), master);
                if (debug)
                    std::fprintf(stderr,
                        "[fpol] round=%d rows=%zu cols=%zu status=%d obj=%f\n", round,
                        act_rows.size(), act_cols.size(), static_cast<int>(lp.status),
                        lp.status == LpStatus::Optimal ? static_cast<double>(lp.objective)
                                                       : -1.0);
            }
            if (ensure_feasible || lp.status == LpStatus::Infeasible) {
                ensure_feasible = false;
                // Penalty phase: minimize total violation, entering columns
                // against the penalty duals until the active rows become
                // satisfiable or provably are not.
                for (;;) {
                    auto [pcols, pobj] = master_columns(true);
                    DenseColumns penalty(static_cast<int>(act_rows.size()) + 1,
                        std::move(pcols), std::move(pobj));
                    LpResult plp = solve_lp(LpSense::Minimize, master_senses(), master_rhs(),
                        penalty);
                    if (plp.status != LpStatus::Optimal)
                        throw Error("fpol penalty master: unexpected status");
                    if (debug)
                        std::fprintf(stderr, "[fpol]   penalty rows=%zu cols=%zu viol=%f\n",
                            act_rows.size(), act_cols.size(),
                            static_cast<double>(plp.objective));
                    if (plp.objective == 0)
                        break;
                    std::vector<size_t> entering = price_columns(plp.duals, true, zero_obj);
                    if (entering.empty()) {
                        out.status = LpStatus::Infeasible;
                        return out;
                    }
                    for (size_t j : entering)
                        add_col(j);
                }
                continue;
            }
            if (lp.status != LpStatus::Optimal)
                throw Error("fpol master: unexpected status");

            std::vector<size_t> entering
                = price_columns(lp.duals, sense == LpSense::Minimize, objective);
            std::vector<std::pair<Rational, size_t>> violated;
            for (size_t i : candidates) {
                if (row_active[i])
                    continue;
                Rational lhs = 0;
                for (const auto& [jj, w] : lp.solution)
                    lhs += w * row_coefficient(rows[i], fam_idx[i], ops[act_cols[jj]]).value();
                if (lhs > rows[i].rhs)
                    violated.push_back({lhs - rows[i].rhs, i});
            }
            if (entering.empty() && violated.empty()) {
                out.status = LpStatus::Optimal;
                out.objective = lp.objective;
                for (const auto& [jj, w] : lp.solution)
                    out.solution.push_back({act_cols[jj], w});
                std::sort(out.solution.begin(), out.solution.end());
                return out;
            }
            // Column management: keep the basic columns and a deterministic
            // seed block, drop long-inactive ones so the masters stay small.
            if (act_cols.size() > 320) {
                std::vector<char> keep(ops.size(), 0);
                for (const auto& [jj, w] : lp.solution)
                    keep[act_cols[jj]] = 1;
                size_t kept_seeds = 0;
                for (size_t j : act_cols) {
                    if (kept_seeds >= 96)
                        break;
                    if (!keep[j]) {
                        keep[j] = 1;
                        ++kept_seeds;
                    }
                }
                std::vector<size_t> next;
                for (size_t j : act_cols) {
                    if (keep[j])
                        next.push_back(j);
                    else
                        col_active[j] = 0;
                }
                act_cols = std::move(next);
            }
            for (size_t j : entering)
                add_col(j);
            std::sort(violated.begin(), violated.end(),
                [](const auto& a, const auto& b) { return a.first > b.first; });
            bool added_rows = false;
            for (size_t v = 0; v < violated.size() && v < 16; ++v) {
                act_rows.push_back(violated[v].second);
                row_active[violated[v].second] = 1;
                added_rows = true;
            }
            // The incumbent violates the fresh rows, so the next real master
            // would start infeasible; go straight to the penalty phase.
            if (added_rows)
                ensure_feasible = true;
            if (round > 4000)
                throw Error("fpol LP: generation failed to converge");
        }
    }

    size_t checked_power(size_t base, size_t exp, size_t cap)
    {
        size_t v = 1;
        for (size_t i = 0; i < exp; ++i) {
            if (v > cap / base + 1)
                return cap + 1;
            v *= base;
            if (v > cap)
                return cap + 1;
        }
        return v;
    }

    // All cyclic tables of the given arity, via values on rotation orbits.
    std::vector<OperationTable> enumerate_cyclic_tables(int nd, int ell, size_t cap)
    {
        size_t total = checked_power(nd, ell, size_t(1) << 30);
        if (total > (size_t(1) << 30))
            throw CapExceeded("cyclic enumeration: tuple space too large");
        std::vector<size_t> orbit_of(total, SIZE_MAX);
        std::vector<std::vector<size_t>> orbits;
        std::vector<int> digits(ell);
        for (size_t idx = 0; idx < total; ++idx) {
            if (orbit_of[idx] != SIZE_MAX)
                continue;
            std::vector<size_t> orbit;
            size_t cur = idx;
            do {
                orbit_of[cur] = orbits.size();
                orbit.push_back(cur);
                size_t rest = cur;
                for (int p = ell - 1; p >= 0; --p) {
                    digits[p] = static_cast<int>(rest % nd);
                    rest /= nd;
                }
                size_t rotated = 0;
                for (int p = 1; p < ell; ++p)
                    rotated = rotated * nd + digits[p];
                rotated = rotated * nd + digits[0];
                cur = rotated;
            } while (cur != idx);
            orbits.push_back(std::move(orbit));
        }
        size_t num_tables = checked_power(nd, orbits.size(), cap);
        if (num_tables > cap)
            throw CapExceeded("cyclic operation tables exceed the cap ("
                + std::to_string(cap) + ")");
        std::vector<OperationTable> ops;
        ops.reserve(num_tables);
        std::vector<int> choice(orbits.size(), 0);
        for (;;) {
            OperationTable op;
            op.arity = ell;
            op.domain_size = nd;
            op.table.resize(total);
            for (size_t o = 0; o < orbits.size(); ++o)
                for (size_t idx : orbits[o])
                    op.table[idx] = choice[o];
            ops.push_back(std::move(op));
            size_t p = orbits.size();
            while (p > 0 && choice[p - 1] == nd - 1)
                choice[--p] = 0;
            if (p == 0)
                break;
            ++choice[p - 1];
        }
        return ops;
    }

    std::vector<OperationTable> enumerate_all_tables(int nd, int ell, size_t cap)
    {
        size_t total = checked_power(nd, ell, size_t(1) << 30);
        if (total > (size_t(1) << 30))
            throw CapExceeded("operation enumeration: tuple space too large");
        size_t num_tables = checked_power(nd, total, cap);
        if (num_tables > cap)
            throw CapExceeded("operation tables exceed the cap (" + std::to_string(cap) + ")");
        std::vector<OperationTable> ops;
        ops.reserve(num_tables);
        std::vector<int> choice(total, 0);
        for (;;) {
            OperationTable op;
            op.arity = ell;
            op.domain_size = nd;
            op.table = choice;
            ops.push_back(std::move(op));
            size_t p = total;
            while (p > 0 && choice[p - 1] == nd - 1)
                choice[--p] = 0;
            if (p == 0)
                break;
            ++choice[p - 1];
        }
        return ops;
    }

    FractionalOperation solution_to_omega(int ell, const std::vector<OperationTable>& ops,
        const std::vector<std::pair<size_t, Rational>>& solution)
    {
        FractionalOperation omega;
        omega.arity = ell;
        for (const auto& [j, w] : solution)
            if (w > 0)
                omega.support.push_back({ops[j], w});
        return omega;
    }

} // namespace

CyclicSearch find_cyclic_fpol(const ValuedStructure& gamma, int ell, size_t op_cap)
{
    if (ell < 2)
        throw Error("cyclic arity must be at least 2");
    CyclicSearch result;
    std::vector<OperationTable> ops;
    try {
        ops = enumerate_cyclic_tables(gamma.domain_size(), ell, op_cap);
    } catch (const CapExceeded&) {
        result.outcome = SearchOutcome::CapExceeded;
        return result;
    }
    auto rows = improvement_rows(gamma, ell);
    LazyResult lp = solve_fpol_lp(rows, ops, std::vector<Rational>(ops.size(), 0),
        LpSense::Minimize);
    if (lp.status == LpStatus::Infeasible) {
        result.outcome = SearchOutcome::None;
        return result;
    }
    FractionalOperation omega = solution_to_omega(ell, ops, lp.solution);
    if (!is_fractional_polymorphism(omega, gamma))
        throw Error("internal: LP produced a non-improving fractional operation");
    for (const auto& [op, w] : omega.support)
        if (!op.is_cyclic())
            throw Error("internal: non-cyclic operation in cyclic search support");
    result.outcome = SearchOutcome::Found;
    result.omega = std::move(omega);
    return result;
}

bool siggers_in_support(const ValuedStructure& gamma, size_t op_cap)
{
    int nd = gamma.domain_size();
    if (nd == 1)
        return true; // the only 4-ary operation is Siggers and improves everything
    std::vector<OperationTable> ops = enumerate_all_tables(nd, 4, op_cap);
    auto rows = improvement_rows(gamma, 4);
    std::vector<Rational> objective(ops.size(), 0);
    size_t siggers_count = 0;
    for (size_t j = 0; j < ops.size(); ++j)
        if (ops[j].is_siggers()) {
            objective[j] = 1;
            ++siggers_count;
        }
    if (siggers_count == 0)
        return false;
    LazyResult lp = solve_fpol_lp(rows, ops, objective, LpSense::Maximize);
    if (lp.status != LpStatus::Optimal)
        throw Error("siggers LP: unexpected status");
    if (lp.objective <= 0)
        return false;
    FractionalOperation omega = solution_to_omega(4, ops, lp.solution);
    if (!is_fractional_polymorphism(omega, gamma))
        throw Error("internal: siggers LP produced a non-improving operation");
    bool has_siggers = false;
    for (const auto& [op, w] : omega.support)
        if (op.is_siggers())
            has_siggers = true;
    if (!has_siggers)
        throw Error("internal: positive siggers optimum without siggers support");
    return true;
}

ValuedStructure core_reduce(const ValuedStructure& gamma, size_t op_cap)
{
    ValuedStructure cur = gamma;
    for (;;) {
        int nd = cur.domain_size();
        if (nd <= 1)
            return cur;
        std::vector<OperationTable> ops = enumerate_all_tables(nd, 1, op_cap);
        auto rows = improvement_rows(cur, 1);
        std::vector<Rational> objective(ops.size(), 0);
        bool any_noninjective = false;
        for (size_t j = 0; j < ops.size(); ++j)
            if (!ops[j].is_injective()) {
                objective[j] = 1;
                any_noninjective = true;
            }
        if (!any_noninjective)
            return cur;
        LazyResult lp = solve_fpol_lp(rows, ops, objective, LpSense::Maximize);
        if (lp.status != LpStatus::Optimal)
            throw Error("core LP: unexpected status");
        if (lp.objective <= 0)
            return cur;
        size_t chosen = SIZE_MAX;
        for (const auto& [j, w] : lp.solution) {
            if (w > 0 && !ops[j].is_injective()) {
                chosen = j;
                break;
            }
        }
        if (chosen == SIZE_MAX)
            throw Error("internal: positive non-injective mass without support");
        // Confirm with the per-operation objective before restricting.
        std::vector<Rational> single(ops.size(), 0);
        single[chosen] = 1;
        LazyResult check = solve_fpol_lp(rows, ops, single, LpSense::Maximize);
        if (check.status != LpStatus::Optimal || check.objective <= 0)
            throw Error("internal: support operation failed its per-operation LP");
        std::vector<int> image;
        for (int v : ops[chosen].table)
            image.push_back(v);
        std::sort(image.begin(), image.end());
        image.erase(std::unique(image.begin(), image.end()), image.end());
        cur = cur.restrict(image);
    }
}

} // namespace rvc
