#pragma once

// Contributor best responses under the capital-constrained match, the
// limited-pool planner benchmark, and welfare accounting.
//
// A contributor i facing match divisor k picks c_i to maximise
//   V_i(F) - c_i,   F = (1/k) (sum_j sqrt c_j)^2 + (1 - 1/k) sum_j c_j
// taking k and everyone else's contributions as given. The first-order
// condition is V_i'(F) * ((1/k) S / sqrt(c_i) + 1 - 1/k) = 1.

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qf {

enum class ValuationFamily { Sqrt, Log };

const char* to_string(ValuationFamily f);
ValuationFamily parse_family(const std::string& s);

/// V(F) = scale * sqrt(F)  or  V(F) = scale * ln(1 + F).
struct Valuation {
    std::string contributor_id;
    std::string project_id;
    ValuationFamily family = ValuationFamily::Sqrt;
    double scale = 1.0;

    double value(double funds) const;
    double marginal(double funds) const;
};

using EntryKey = std::pair<std::string, std::string>; // (contributor, project)

struct EquilibriumOptions {
    double damping = 0.5;
    int max_iter = 10000;
    double tolerance = 1e-12;  // max change per entry, relative to max(1, c)
    double zero_floor = 1e-10; // contributions below this are reported as 0
    std::map<std::string, double> budgets; // optional total budget per contributor
};

struct EquilibriumResult {
    double k = 1.0;
    std::map<EntryKey, double> contributions;
    std::map<std::string, double> funds;
    std::map<std::string, double> aggregate_marginal; // sum_i V_i'(F^p)
    double welfare = 0.0;
    int iterations = 0;
    bool converged = false;
    std::set<EntryKey> clamped; // entries held down by a binding budget
};

struct PlannerResult {
    std::map<std::string, double> funds;
    double common_marginal = 0.0; // lambda
    double welfare = 0.0;         // sum_i sum_p V_i^p(F^p); the pool is not a private cost
    int iterations = 0;
};

struct EndogenousKResult {
    EquilibriumResult equilibrium;
    double k = 1.0;
    int outer_iterations = 0;
    bool converged = false;
};

/// F = S^2 / k + (1 - 1/k) C.
double cqf_funds(double sqrt_sum, double total, double k);

/// Optimal own contribution to one project given the others' sqrt sum and
/// total. `price` is the marginal cost of a unit (1 + budget shadow price).
double best_response_amount(const Valuation& v, double others_sqrt_sum, double others_total, double k,
                            double price = 1.0);

/// V'(F) * bracket - 1 at the given own contribution (> 0).
double foc_residual(const Valuation& v, double own, double others_sqrt_sum, double others_total, double k);

/// Damped simultaneous best-response iteration to a fixed point.
EquilibriumResult best_response(std::span<const Valuation> valuations, double k,
                                const EquilibriumOptions& options = {});

/// Experimental: re-derives k from the induced contributions until it settles.
EndogenousKResult solve_with_endogenous_k(std::span<const Valuation> valuations, double pool,
                                          const EquilibriumOptions& options = {}, double initial_k = 1.0);

/// Maximises sum_i sum_p V_i^p(F^p) subject to sum_p F^p = pool.
PlannerResult planner_optimum(std::span<const Valuation> valuations, double pool);

/// sum_i sum_p V_i^p(F^p) - sum c. Throws DomainError when a valued project has no funds entry.
double welfare(std::span<const Valuation> valuations, const std::map<std::string, double>& funds,
               const std::map<EntryKey, double>& contributions);

} // namespace qf
