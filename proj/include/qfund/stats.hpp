#pragma once

#include <optional>
#include <span>

namespace qf::stats {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

struct QuadraticFit {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0; // y ~ c0 + c1 x + c2 x^2
    double r2 = 0.0;
};

/// Ordinary least squares with intercept. Empty when x has no spread.
std::optional<LineFit> ols_line(std::span<const double> xs, std::span<const double> ys);

/// Least-squares quadratic. Empty with fewer than three distinct x values.
std::optional<QuadraticFit> quadratic_fit(std::span<const double> xs, std::span<const double> ys);

double mean(std::span<const double> xs);
double population_stdev(std::span<const double> xs);
double sample_stdev(std::span<const double> xs);

} // namespace qf::stats
