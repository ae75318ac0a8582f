#include "qfund/report.hpp"

#include "qfund/efficiency.hpp"
#include "qfund/errors.hpp"
#include "qfund/text.hpp"

#include <ostream>

namespace qf {

AllocationReport build_allocation_report(const std::vector<CategoryInput>& categories, SurplusPolicy policy,
                                         bool require_matchable) {
    AllocationReport report;
    report.policy = policy;
    for (const auto& input : categories) {
        CategoryReport cat;
        cat.category = input.category;
        cat.pool = input.pool;
        cat.sum_m_qf = total_matching_requirement(input.projects);

        if (cat.sum_m_qf > 0.0) {
            const Allocation alloc = cqf_allocate(input.projects, input.pool, policy, input.category);
            cat.k = alloc.pool.k;
            cat.effective_k = alloc.effective_k;
            cat.unspent = alloc.unspent;
            for (std::size_t i = 0; i < alloc.outcomes.size(); ++i) {
                ProjectReport pr{alloc.outcomes[i], std::nullopt, std::nullopt};
                cat.sum_m_actual += pr.outcome.m_actual;
                if (!input.projects[i].empty()) {
                    pr.lambda_p = lambda_p(input.projects[i], alloc.effective_k);
                    pr.lambda_lower_bound = lambda_lower_bound(input.projects[i], alloc.effective_k);
                }
                cat.projects.push_back(std::move(pr));
            }
        } else {
            if (require_matchable) throw NoMatchableProjects();
            if (!(input.pool > 0.0)) throw DomainError("pool must be positive for " + input.category);
            cat.unspent = input.pool;
            for (const auto& l : input.projects) {
                MatchOutcome o;
                o.project_id = l.project_id();
                o.contributors = l.contributor_count();
                o.total = l.total();
                o.f_qf = o.total;
                o.f_actual = o.total;
                cat.projects.push_back({o, std::nullopt, std::nullopt});
            }
        }
        report.categories.push_back(std::move(cat));
    }
    return report;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace

nlohmann::json to_json(const AllocationReport& report) {
    nlohmann::json j;
    j["policy"] = report.policy == SurplusPolicy::CapAtTarget ? "cap_at_target" : "scale_to_pool";
    j["metadata"] = {{"lambda_k", "final category k (divisor applied to QF matches)"}};
    j["categories"] = nlohmann::json::array();
    for (const auto& c : report.categories) {
        nlohmann::json jc{{"category", c.category},       {"pool", c.pool},
                          {"k", opt(c.k)},                {"k_defined", c.k.has_value()},
                          {"effective_k", c.effective_k}, {"sum_m_qf", c.sum_m_qf},
                          {"sum_m_actual", c.sum_m_actual}, {"unspent", c.unspent}};
        jc["projects"] = nlohmann::json::array();
        for (const auto& p : c.projects) {
            const auto& o = p.outcome;
            jc["projects"].push_back({{"project_id", o.project_id},
                                      {"contributors", o.contributors},
                                      {"total", o.total},
                                      {"f_qf", o.f_qf},
                                      {"m_qf", o.m_qf},
                                      {"m_actual", o.m_actual},
                                      {"f_actual", o.f_actual},
                                      {"lambda_p", opt(p.lambda_p)},
                                      {"lambda_lower_bound", opt(p.lambda_lower_bound)}});
        }
        j["categories"].push_back(std::move(jc));
    }
    return j;
}

void write_allocation_csv(std::ostream& out, const AllocationReport& report) {
    using text::format_double;
    auto opt_str = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    out << "category,project_id,contributors,total,f_qf,m_qf,m_actual,f_actual,k,lambda_p,lambda_lower_bound\n";
    for (const auto& c : report.categories)
        for (const auto& p : c.projects) {
            const auto& o = p.outcome;
            out << text::csv_field(c.category) << ',' << text::csv_field(o.project_id) << ',' << o.contributors
                << ',' << format_double(o.total) << ',' << format_double(o.f_qf) << ',' << format_double(o.m_qf)
                << ',' << format_double(o.m_actual) << ',' << format_double(o.f_actual) << ',' << opt_str(c.k)
                << ',' << opt_str(p.lambda_p) << ',' << opt_str(p.lambda_lower_bound) << '\n';
        }
}

} // namespace qf
