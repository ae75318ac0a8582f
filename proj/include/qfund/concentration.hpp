#pragma once

// Concentration of a project's square-root contribution shares, and the
// total matching requirement implied by contributors' budget splits.

#include "qfund/funding_core.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace qf {

struct ShareProfile {
    std::vector<double> alphas; // sqrt(c_i) / sum sqrt(c), contributor-id order
    std::size_t n = 0;
    double hhi = 0.0;      // sum alpha_i^2
    double variance = 0.0; // population variance of alphas
    double mean = 0.0;     // always 1/n
};

struct BudgetedContributor {
    std::string contributor_id;
    double budget = 0.0;
    std::map<std::string, double> shares; // project -> fraction of budget
};

ShareProfile share_profile(const ProjectLedger& ledger);

/// (1 - n*variance - n*mean^2) * F^QF. Same value as matching_requirement.
double decomposed_match(const ProjectLedger& ledger);

/// 2 * sum over unordered pairs sqrt(m_i m_j); the requirement when all
/// contributors split their budgets identically. Empty input gives 0.
double max_match(std::span<const double> budgets);

/// sum_p 2 * sum_{i<j} sqrt(s_i^p m_i s_j^p m_j).
double total_match_for_shares(std::span<const BudgetedContributor> contributors);

} // namespace qf
