#pragma once

#include <vector>

#include "rvc/rational.hpp"

namespace rvc {

enum class RowSense { LessEq, Equal, GreaterEq };
enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class LpSense { Minimize, Maximize };

// Column access for the simplex solver; structural variables are x_j >= 0.
class LpColumnSource {
public:
    virtual ~LpColumnSource() = default;

    virtual size_t count() const = 0;
    virtual int rows() const = 0;
    virtual void fill(size_t j, std::vector<Rational>& col) const = 0; // dense, length rows()
    virtual Rational objective(size_t j) const = 0;
    // Borrowed dense column, when the source can expose one without copying.
    virtual const std::vector<Rational>* view(size_t) const { return nullptr; }
};

class DenseColumns final : public LpColumnSource {
public:
    DenseColumns(int rows, std::vector<std::vector<Rational>> cols, std::vector<Rational> obj)
        : rows_(rows), cols_(std::move(cols)), obj_(std::move(obj))
    {
    }

    size_t count() const override { return cols_.size(); }
    int rows() const override { return rows_; }
    void fill(size_t j, std::vector<Rational>& col) const override { col = cols_[j]; }
    Rational objective(size_t j) const override { return obj_[j]; }
    const std::vector<Rational>* view(size_t j) const override { return &cols_[j]; }

private:
    int rows_;
    std::vector<std::vector<Rational>> cols_;
    std::vector<Rational> obj_;
};

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Rational objective;
    std::vector<std::pair<size_t, Rational>> solution; // nonzero structural variables
    // Row duals y with the invariant: at optimality, c_j - y·A_j <= 0 for all
    // columns when maximizing, >= 0 when minimizing.
    std::vector<Rational> duals;
};

// Two-phase revised simplex over exact rationals. Deterministic pivoting:
// most-negative reduced cost entering (ties by index) and a lexicographic
// ratio test, which excludes cycling.
LpResult solve_lp(LpSense sense, const std::vector<RowSense>& row_senses,
    const std::vector<Rational>& rhs, const LpColumnSource& cols);

} // namespace rvc
