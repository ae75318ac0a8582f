#pragma once

// Quadratic funding rule and its capital-constrained variant.
//
// Amounts are carried as doubles. Contributions by the same contributor to
// the same project are summed before any square root is taken, so a ledger
// is really a multiset of per-contributor totals.

#include <map>
#include <span>
#include <string>
#include <vector>

namespace qf {

struct Contribution {
    std::string contributor_id;
    std::string project_id;
    double amount = 0.0;
    int day = 0;
    std::string category;

    bool operator==(const Contribution&) const = default;
};

class ProjectLedger {
public:
    ProjectLedger() = default;
    explicit ProjectLedger(std::string project_id, std::string category = {});
    ProjectLedger(std::string project_id, std::string category, std::span<const Contribution> contributions);

    /// Ledger with one distinct contributor per amount ("c0", "c1", ...).
    static ProjectLedger from_amounts(std::span<const double> amounts, std::string project_id = "p",
                                      std::string category = {});

    /// Throws DomainError on a negative amount. Zero amounts are accepted but
    /// do not create a contributor.
    void add(const Contribution& c);
    void add(const std::string& contributor_id, double amount, int day = 0);

    const std::string& project_id() const { return project_id_; }
    const std::string& category() const { return category_; }
    const std::vector<Contribution>& contributions() const { return contributions_; }
    const std::map<std::string, double>& per_contributor() const { return per_contributor_; }

    /// Per-contributor aggregated amounts, ordered by contributor id.
    std::vector<double> aggregated_amounts() const;
    double amount_of(const std::string& contributor_id) const;

    std::size_t contributor_count() const { return per_contributor_.size(); }
    bool empty() const { return per_contributor_.empty(); }
    double sqrt_sum() const { return sqrt_sum_; }
    double total() const { return total_; }

private:
    std::string project_id_;
    std::string category_;
    std::vector<Contribution> contributions_;
    std::map<std::string, double> per_contributor_;
    double sqrt_sum_ = 0.0;
    double total_ = 0.0;
};

struct MatchOutcome {
    std::string project_id;
    std::size_t contributors = 0;
    double total = 0.0;    // C^p
    double f_qf = 0.0;     // (sum sqrt c)^2
    double m_qf = 0.0;     // f_qf - total
    double m_actual = 0.0; // match actually paid from the pool
    double f_actual = 0.0; // m_actual + total
};

struct PoolState {
    std::string category;
    double pool = 0.0;
    double k = 0.0; // sum of m_qf over the pool
};

enum class SurplusPolicy {
    ScaleUp,     // k < 1 scales matches up until the pool is exhausted
    CapAtTarget, // matches never exceed m_qf; leftover pool is reported as unspent
};

struct Allocation {
    std::vector<MatchOutcome> outcomes;
    PoolState pool;
    double effective_k = 0.0; // divisor actually applied to m_qf
    double unspent = 0.0;
    SurplusPolicy policy = SurplusPolicy::ScaleUp;
};

double qf_target(const ProjectLedger& ledger);
double matching_requirement(const ProjectLedger& ledger);

/// Extra match required when a new, distinct contributor adds `new_amount`.
double marginal_match(const ProjectLedger& ledger, double new_amount);

double total_matching_requirement(std::span<const ProjectLedger> ledgers);

/// k = sum_p M^{p,QF} / pool. Throws NoMatchableProjects when the sum is zero.
double compute_k(std::span<const ProjectLedger> ledgers, double pool);

Allocation cqf_allocate(std::span<const ProjectLedger> ledgers, double pool,
                        SurplusPolicy policy = SurplusPolicy::ScaleUp, std::string category = {});

/// Groups contributions into one ledger per project, in first-seen order.
std::vector<ProjectLedger> group_by_project(std::span<const Contribution> contributions);

} // namespace qf
