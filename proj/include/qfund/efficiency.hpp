#pragma once

// Efficiency multiplier lambda_p: the sum of contributors' marginal
// valuations implied by their first-order conditions under a 1/k match.
// Equal across projects at an efficient allocation of a limited pool, so its
// dispersion within a category measures misallocation.

#include "qfund/funding_core.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qf {

struct LambdaReport {
    std::string project_id;
    std::string category;
    double lambda_p = 0.0;
    double lower_bound = 0.0;
    std::size_t n = 0;
    double k_used = 0.0;
};

struct DispersionStats {
    std::string category;
    double mean = 0.0;
    double stdev = 0.0; // population form
    double min = 0.0;
    double max = 0.0;
    std::size_t project_count = 0;
};

struct RatioProfile {
    std::string label;           // e.g. "1:15"
    std::vector<double> amounts; // one entry per contributor
};

struct SweepPoint {
    std::string label;
    double k = 0.0;
    double lambda_p = 0.0;
};

double lambda_p(const ProjectLedger& ledger, double k);
double lambda_p(std::span<const double> amounts, double k);

/// n^2 / ((1/k) sum 1/alpha_i + n (1 - 1/k)); tight when all shares are equal.
double lambda_lower_bound(const ProjectLedger& ledger, double k);

LambdaReport lambda_report(const ProjectLedger& ledger, double k);

std::vector<SweepPoint> k_sweep(std::span<const RatioProfile> profiles, std::span<const double> k_grid);

/// Profiles compared in the three-project illustration: 1:1, 1:2, 1:15.
std::vector<RatioProfile> default_ratio_profiles();

/// Parses "1:1,1:2,1:15". Throws DomainError on malformed input.
std::vector<RatioProfile> parse_ratio_profiles(const std::string& text);

std::vector<double> linear_grid(double lo, double hi, std::size_t steps);

DispersionStats dispersion(std::span<const LambdaReport> reports, const std::string& category);

void write_sweep_csv(std::ostream& os, std::span<const SweepPoint> points);

} // namespace qf
