#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lptem/assignment.hpp"

using namespace lptem;

namespace {

// Exhaustive oracle: best (max feasible size, then min cost) over all
// injective maps of the smaller side into the larger.
struct Brute {
    std::size_t size = 0;
    double cost = std::numeric_limits<double>::infinity();
};

Brute brute_force(const CostMatrix& c) {
    const bool t = c.rows() > c.cols();
    const std::size_t n = t ? c.cols() : c.rows(), m = t ? c.rows() : c.cols();
    auto at = [&](std::size_t i, std::size_t j) { return t ? c(j, i) : c(i, j); };
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    Brute best;
    best.cost = 0.0;
    bool first = true;
    do {
        std::size_t size = 0;
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = at(i, perm[i]);
            if (std::isfinite(v)) {
                ++size;
                cost += v;
            }
        }
        if (first || size > best.size || (size == best.size && cost < best.cost)) {
            best = {size, cost};
            first = false;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace

TEST(MinCostAssignment, TwoByTwo) {
    const auto a = min_cost_assignment({{1, 2}, {2, 1}});
    ASSERT_EQ(a.pairs.size(), 2u);
    EXPECT_EQ(a.pairs[0], (std::pair<std::size_t, std::size_t>{0, 0}));
    EXPECT_EQ(a.pairs[1], (std::pair<std::size_t, std::size_t>{1, 1}));
    EXPECT_EQ(a.cost, 2.0);
}

TEST(MinCostAssignment, ZeroDiagonal) {
    const auto a = min_cost_assignment({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
    ASSERT_EQ(a.pairs.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.pairs[i], (std::pair<std::size_t, std::size_t>{i, i}));
    EXPECT_EQ(a.cost, 0.0);
}

TEST(MinCostAssignment, SingleRow) {
    const auto a = min_cost_assignment({{5, 1, 9}});
    ASSERT_EQ(a.pairs.size(), 1u);
    EXPECT_EQ(a.pairs[0], (std::pair<std::size_t, std::size_t>{0, 1}));
}

TEST(MinCostAssignment, TallMatrix) {
    const auto a = min_cost_assignment({{5}, {1}, {9}});
    ASSERT_EQ(a.pairs.size(), 1u);
    EXPECT_EQ(a.pairs[0], (std::pair<std::size_t, std::size_t>{1, 0}));
}

TEST(MinCostAssignment, ForbiddenEntriesGiveMaximalFeasibleMatching) {
    constexpr double X = kForbidden;
    // Row 1 can only take column 0, which row 0 would prefer.
    const auto a = min_cost_assignment({{1, 100}, {3, X}});
    ASSERT_EQ(a.pairs.size(), 2u);
    EXPECT_EQ(a.cost, 103.0);
    // No full matching: both rows need column 0.
    const auto b = min_cost_assignment({{4, X}, {2, X}});
    ASSERT_EQ(b.pairs.size(), 1u);
    EXPECT_EQ(b.pairs[0], (std::pair<std::size_t, std::size_t>{1, 0}));
    EXPECT_TRUE(min_cost_assignment({{X, X}}).pairs.empty());
}

TEST(MinCostAssignment, EmptyAndInvalid) {
    EXPECT_TRUE(min_cost_assignment(CostMatrix(0, 3)).pairs.empty());
    EXPECT_THROW(min_cost_assignment({{1, std::numeric_limits<double>::quiet_NaN()}}), InputError);
    EXPECT_THROW(min_cost_assignment({{1, -std::numeric_limits<double>::infinity()}}), InputError);
}

TEST(MinCostAssignment, MatchesExhaustiveSearch) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dim(1, 7), val(0, 20);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t r = dim(rng), c = dim(rng);
        CostMatrix m(r, c);
        const bool gated = trial % 3 == 0;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) m(i, j) = gated && unit(rng) < 0.3 ? kForbidden : val(rng);
        const auto got = min_cost_assignment(m);
        const auto want = brute_force(m);
        ASSERT_EQ(got.pairs.size(), want.size) << "trial " << trial;
        ASSERT_EQ(got.cost, want.cost) << "trial " << trial;
        std::vector<char> rows(r), cols(c);
        for (const auto& [i, j] : got.pairs) {
            EXPECT_FALSE(rows[i]++);
            EXPECT_FALSE(cols[j]++);
            EXPECT_TRUE(std::isfinite(m(i, j)));
        }
    }
}
