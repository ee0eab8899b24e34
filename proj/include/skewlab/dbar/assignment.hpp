#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "skewlab/core/error.hpp"

namespace skewlab {

struct Assignment {
    std::vector<std::size_t> column;  // row i is matched to column[i]
    double cost = 0.0;
};

// Minimal-cost perfect matching of an n x n row-major cost matrix by the
// shortest augmenting path method with potentials, O(n^3).
inline Assignment hungarian(const std::vector<double>& cost, std::size_t n) {
    require(n > 0 && cost.size() == n * n, "cost matrix must be n x n and nonempty");
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; p[j] is the row matched to column j, 0 = free
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            const double* row = cost.data() + (i0 - 1) * n;
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    Assignment out;
    out.column.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) out.column[p[j] - 1] = j - 1;
    for (std::size_t i = 0; i < n; ++i) out.cost += cost[i * n + out.column[i]];
    return out;
}

// Cheapest remaining pair first; ties broken by position.
inline Assignment greedy_assignment(const std::vector<double>& cost, std::size_t n) {
    require(n > 0 && cost.size() == n * n, "cost matrix must be n x n and nonempty");
    std::vector<std::size_t> order(n * n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cost[a] < cost[b]; });
    std::vector<char> row_used(n, 0), col_used(n, 0);
    Assignment out;
    out.column.assign(n, 0);
    std::size_t left = n;
    for (std::size_t k = 0; k < order.size() && left > 0; ++k) {
        const std::size_t i = order[k] / n, j = order[k] % n;
        if (row_used[i] || col_used[j]) continue;
        row_used[i] = col_used[j] = 1;
        out.column[i] = j;
        out.cost += cost[order[k]];
        --left;
    }
    return out;
}

}  // namespace skewlab
