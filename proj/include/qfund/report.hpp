#pragma once

// Per-category CQF allocation with lambda_p diagnostics, as emitted by the
// `allocate` command and at the end of a simulated round.

#include "qfund/funding_core.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qf {

struct ProjectReport {
    MatchOutcome outcome;
    std::optional<double> lambda_p; // absent for projects without contributors
    std::optional<double> lambda_lower_bound;
};

struct CategoryReport {
    std::string category;
    double pool = 0.0;
    std::optional<double> k; // absent when nothing in the category is matchable
    double effective_k = 0.0;
    double sum_m_qf = 0.0;
    double sum_m_actual = 0.0;
    double unspent = 0.0;
    std::vector<ProjectReport> projects;
};

struct AllocationReport {
    SurplusPolicy policy = SurplusPolicy::ScaleUp;
    std::vector<CategoryReport> categories;
};

struct CategoryInput {
    std::string category;
    double pool = 0.0;
    std::vector<ProjectLedger> projects;
};

/// lambda_p uses each category's final k (the divisor actually applied).
/// With `require_matchable`, a category whose projects need no match raises
/// NoMatchableProjects; otherwise it is reported with k absent.
AllocationReport build_allocation_report(const std::vector<CategoryInput>& categories, SurplusPolicy policy,
                                         bool require_matchable);

nlohmann::json to_json(const AllocationReport& report);

/// category,project_id,contributors,total,f_qf,m_qf,m_actual,f_actual,k,lambda_p,lambda_lower_bound
void write_allocation_csv(std::ostream& out, const AllocationReport& report);

} // namespace qf
