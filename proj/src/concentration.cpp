#include "qfund/concentration.hpp"

#include "qfund/errors.hpp"

#include <cmath>
#include <set>

namespace qf {

ShareProfile share_profile(const ProjectLedger& ledger) {
    if (ledger.empty()) throw DomainError("share_profile: ledger has no contributors");

    ShareProfile p;
    p.n = ledger.contributor_count();
    double s = 0.0;
    for (const auto& [id, amount] : ledger.per_contributor()) s += std::sqrt(amount);
    p.alphas.reserve(p.n);
    for (const auto& [id, amount] : ledger.per_contributor()) p.alphas.push_back(std::sqrt(amount) / s);

    const double n = static_cast<double>(p.n);
    p.mean = 1.0 / n;
    for (double a : p.alphas) {
        p.hhi += a * a;
        p.variance += (a - p.mean) * (a - p.mean);
    }
    p.variance /= n;
    return p;
}

double decomposed_match(const ProjectLedger& ledger) {
    const ShareProfile p = share_profile(ledger);
    const double n = static_cast<double>(p.n);
    return (1.0 - n * p.variance - n * p.mean * p.mean) * qf_target(ledger);
}

double max_match(std::span<const double> budgets) {
    double prefix = 0.0;
    double pairs = 0.0;
    for (double m : budgets) {
        if (!(m > 0.0)) throw DomainError("max_match: budgets must be positive");
        const double root = std::sqrt(m);
        pairs += root * prefix;
        prefix += root;
    }
    return 2.0 * pairs;
}

double total_match_for_shares(std::span<const BudgetedContributor> contributors) {
    std::set<std::string> projects;
    for (const auto& c : contributors) {
        if (!(c.budget > 0.0)) throw DomainError("budget of " + c.contributor_id + " must be positive");
        double sum = 0.0;
        for (const auto& [project, share] : c.shares) {
            if (share < 0.0) throw DomainError("negative share for " + c.contributor_id);
            sum += share;
            projects.insert(project);
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw DomainError("shares of " + c.contributor_id + " sum to " + std::to_string(sum) + ", expected 1");
    }

    double total = 0.0;
    for (const auto& project : projects) {
        double prefix = 0.0;
        double pairs = 0.0;
        for (const auto& c : contributors) {
            auto it = c.shares.find(project);
            if (it == c.shares.end()) continue;
            const double root = std::sqrt(it->second * c.budget);
            pairs += root * prefix;
            prefix += root;
        }
        total += 2.0 * pairs;
    }
    return total;
}

} // namespace qf
