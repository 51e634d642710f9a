#pragma once

// Rectangular min-cost assignment (Hungarian method with potentials,
// O(n^2 m)). +infinity marks forbidden pairs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "lptem/error.hpp"

namespace lptem {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

/// Dense row-major cost matrix.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    CostMatrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        for (const auto& r : rows) {
            if (r.size() != cols_) throw InputError("cost matrix rows differ in length");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct Assignment {
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (row, col), ascending row
    double cost = 0.0;
};

/// Minimum total cost one-to-one matching of size min(rows, cols) that avoids
/// +inf entries. When no such matching exists the result is a maximum-size
/// feasible matching of minimum cost among those. Equal-cost alternatives are
/// resolved deterministically: rows are inserted in ascending order and each
/// search scans columns in ascending order, keeping the first strict minimum.
inline Assignment min_cost_assignment(const CostMatrix& cost) {
    Assignment out;
    if (cost.rows() == 0 || cost.cols() == 0) return out;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < cost.rows(); ++r)
        for (std::size_t c = 0; c < cost.cols(); ++c) {
            const double v = cost(r, c);
            if (std::isnan(v) || v == -std::numeric_limits<double>::infinity())
                throw InputError("cost matrix entries must be finite or +inf");
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    if (!std::isfinite(lo)) return out; // everything forbidden

    const bool transposed = cost.rows() > cost.cols();
    const std::size_t n = transposed ? cost.cols() : cost.rows();
    const std::size_t m = transposed ? cost.rows() : cost.cols();
    // Every forbidden entry costs more than any feasible matching could gain,
    // so the optimum first maximizes the number of feasible pairs.
    const double big = static_cast<double>(n + 1) * (std::abs(lo) + std::abs(hi) + 1.0);
    auto at = [&](std::size_t i, std::size_t j) {
        const double v = transposed ? cost(j, i) : cost(i, j);
        return std::isfinite(v) ? v : big;
    };

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    for (std::size_t j = 1; j <= m; ++j) {
        if (match[j] == 0) continue;
        const std::size_t r = transposed ? j - 1 : match[j] - 1;
        const std::size_t c = transposed ? match[j] - 1 : j - 1;
        if (std::isfinite(cost(r, c))) out.pairs.emplace_back(r, c);
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    for (const auto& [r, c] : out.pairs) out.cost += cost(r, c);
    return out;
}

} // namespace lptem
