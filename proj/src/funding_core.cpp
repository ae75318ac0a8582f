#include "qfund/funding_core.hpp"

#include "qfund/errors.hpp"

#include <cmath>
#include <numeric>
#include <unordered_map>

namespace qf {

ProjectLedger::ProjectLedger(std::string project_id, std::string category)
    : project_id_(std::move(project_id)), category_(std::move(category)) {}

ProjectLedger::ProjectLedger(std::string project_id, std::string category,
                             std::span<const Contribution> contributions)
    : ProjectLedger(std::move(project_id), std::move(category)) {
    for (const auto& c : contributions) add(c);
}

ProjectLedger ProjectLedger::from_amounts(std::span<const double> amounts, std::string project_id,
                                          std::string category) {
    ProjectLedger ledger(std::move(project_id), std::move(category));
    for (std::size_t i = 0; i < amounts.size(); ++i) ledger.add("c" + std::to_string(i), amounts[i]);
    return ledger;
}

void ProjectLedger::add(const Contribution& c) {
    if (!(c.amount >= 0.0) || !std::isfinite(c.amount))
        throw DomainError("contribution amount must be finite and nonnegative, got " + std::to_string(c.amount));
    if (c.amount == 0.0) return;
    contributions_.push_back(c);
    if (contributions_.back().project_id.empty()) contributions_.back().project_id = project_id_;

    double& agg = per_contributor_[c.contributor_id];
    const double before = agg;
    agg += c.amount;
    sqrt_sum_ += std::sqrt(agg) - std::sqrt(before);
    total_ += c.amount;
}

void ProjectLedger::add(const std::string& contributor_id, double amount, int day) {
    add(Contribution{contributor_id, project_id_, amount, day, category_});
}

std::vector<double> ProjectLedger::aggregated_amounts() const {
    std::vector<double> out;
    out.reserve(per_contributor_.size());
    for (const auto& [id, amount] : per_contributor_) out.push_back(amount);
    return out;
}

double ProjectLedger::amount_of(const std::string& contributor_id) const {
    auto it = per_contributor_.find(contributor_id);
    return it == per_contributor_.end() ? 0.0 : it->second;
}

double qf_target(const ProjectLedger& ledger) {
    double s = 0.0;
    for (const auto& [id, amount] : ledger.per_contributor()) s += std::sqrt(amount);
    return s * s;
}

double matching_requirement(const ProjectLedger& ledger) {
    // 2 * sum_{i<j} sqrt(c_i c_j) via running prefix sums; avoids the
    // cancellation in F - C when one contributor dominates.
    double prefix = 0.0;
    double pairs = 0.0;
    for (const auto& [id, amount] : ledger.per_contributor()) {
        const double root = std::sqrt(amount);
        pairs += root * prefix;
        prefix += root;
    }
    return 2.0 * pairs;
}

double marginal_match(const ProjectLedger& ledger, double new_amount) {
    if (!(new_amount > 0.0) || !std::isfinite(new_amount))
        throw DomainError("marginal_match: new amount must be positive");
    double s = 0.0;
    for (const auto& [id, amount] : ledger.per_contributor()) s += std::sqrt(amount);
    return 2.0 * std::sqrt(new_amount) * s;
}

double total_matching_requirement(std::span<const ProjectLedger> ledgers) {
    double sum = 0.0;
    for (const auto& l : ledgers) sum += matching_requirement(l);
    return sum;
}

double compute_k(std::span<const ProjectLedger> ledgers, double pool) {
    if (!(pool > 0.0) || !std::isfinite(pool)) throw DomainError("pool must be positive");
    const double required = total_matching_requirement(ledgers);
    if (!(required > 0.0)) throw NoMatchableProjects();
    return required / pool;
}

Allocation cqf_allocate(std::span<const ProjectLedger> ledgers, double pool, SurplusPolicy policy,
                        std::string category) {
    const double k = compute_k(ledgers, pool);
    const double required = total_matching_requirement(ledgers);

    Allocation out;
    out.policy = policy;
    out.pool = PoolState{std::move(category), pool, k};
    const bool capped = policy == SurplusPolicy::CapAtTarget && k < 1.0;
    out.effective_k = capped ? 1.0 : k;

    double paid = 0.0;
    out.outcomes.reserve(ledgers.size());
    for (const auto& l : ledgers) {
        MatchOutcome o;
        o.project_id = l.project_id();
        o.contributors = l.contributor_count();
        o.total = l.total();
        o.m_qf = matching_requirement(l);
        o.f_qf = o.m_qf + o.total;
        // pool * share keeps the budget identity tight; equals m_qf / k.
        o.m_actual = capped ? o.m_qf : pool * (o.m_qf / required);
        o.f_actual = o.m_actual + o.total;
        paid += o.m_actual;
        out.outcomes.push_back(std::move(o));
    }
    out.unspent = capped ? pool - paid : 0.0;
    return out;
}

std::vector<ProjectLedger> group_by_project(std::span<const Contribution> contributions) {
    std::vector<ProjectLedger> ledgers;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& c : contributions) {
        auto [it, inserted] = index.try_emplace(c.project_id, ledgers.size());
        if (inserted) ledgers.emplace_back(c.project_id, c.category);
        ledgers[it->second].add(c);
    }
    return ledgers;
}

} // namespace qf
