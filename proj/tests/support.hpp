#pragma once

// Seeded generators and brute-force oracles shared by the unit suites.

#include "qfund/funding_core.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace qftest {

inline std::vector<double> random_amounts(std::mt19937_64& rng, std::size_t n, double lo = 0.01, double hi = 100.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline qf::ProjectLedger random_ledger(std::mt19937_64& rng, std::size_t max_n = 12) {
    std::uniform_int_distribution<std::size_t> n(1, max_n);
    const auto amounts = random_amounts(rng, n(rng));
    return qf::ProjectLedger::from_amounts(amounts);
}

/// 2 * sum over unordered pairs sqrt(c_i c_j), straight from the definition.
inline double pair_sum(const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) s += std::sqrt(c[i] * c[j]);
    return 2.0 * s;
}

inline bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace qftest

namespace qftest {

/// Share vectors over `projects` on the lattice with spacing 1/steps.
inline std::vector<std::vector<double>> simplex_grid(int projects, int steps) {
    std::vector<std::vector<double>> out;
    std::vector<int> cur(projects, 0);
    auto rec = [&](auto&& self, int p, int left) -> void {
        if (p == projects - 1) {
            cur[p] = left;
            std::vector<double> v(projects);
            for (int q = 0; q < projects; ++q) v[q] = static_cast<double>(cur[q]) / steps;
            out.push_back(std::move(v));
            return;
        }
        for (int s = 0; s <= left; ++s) {
            cur[p] = s;
            self(self, p + 1, left - s);
        }
    };
    rec(rec, 0, steps);
    return out;
}

struct GridMax {
    double best = -1.0;
    std::vector<std::size_t> argmax; // grid index per contributor
    std::vector<std::vector<double>> grid;
    std::size_t evaluated = 0;
};

/// Exhaustive joint search over every contributor's share vector. The total
/// requirement is sum_{i<j} 2 sqrt(m_i m_j) <sqrt s_i, sqrt s_j>, so pairwise
/// inner products are tabulated once.
inline GridMax grid_max_total_match(const std::vector<double>& budgets, int projects, int steps) {
    GridMax g;
    g.grid = simplex_grid(projects, steps);
    const std::size_t G = g.grid.size();
    const std::size_t n = budgets.size();
    std::vector<double> dot(G * G);
    for (std::size_t a = 0; a < G; ++a)
        for (std::size_t b = 0; b < G; ++b) {
            double s = 0.0;
            for (int p = 0; p < projects; ++p) s += std::sqrt(g.grid[a][p] * g.grid[b][p]);
            dot[a * G + b] = s;
        }
    std::vector<std::vector<double>> w(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w[i][j] = 2.0 * std::sqrt(budgets[i] * budgets[j]);

    std::vector<std::size_t> pick(n, 0);
    auto rec = [&](auto&& self, std::size_t level, double partial) -> void {
        if (level + 1 == n) {
            for (std::size_t x = 0; x < G; ++x) {
                double v = partial;
                for (std::size_t i = 0; i < level; ++i) v += w[i][level] * dot[pick[i] * G + x];
                if (v > g.best + 1e-12) {
                    g.best = v;
                    pick[level] = x;
                    g.argmax = pick;
                }
            }
            g.evaluated += G;
            return;
        }
        for (std::size_t x = 0; x < G; ++x) {
            pick[level] = x;
            double v = partial;
            for (std::size_t i = 0; i < level; ++i) v += w[i][level] * dot[pick[i] * G + x];
            self(self, level + 1, v);
        }
    };
    rec(rec, 0, 0.0);
    return g;
}

} // namespace qftest
