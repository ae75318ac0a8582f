#include "qfund/concentration.hpp"
#include "qfund/efficiency.hpp"
#include "qfund/equilibrium.hpp"
#include "qfund/errors.hpp"
#include "qfund/funding_core.hpp"
#include "qfund/ledger_io.hpp"
#include "qfund/report.hpp"
#include "qfund/round_sim.hpp"
#include "qfund/strategy.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace qf;

namespace {

ProjectLedger ledger(const std::vector<double>& amounts) { return ProjectLedger::from_amounts(amounts); }

std::vector<Valuation> valuations(const std::vector<std::tuple<std::string, std::string, std::string, double>>& rows) {
    std::vector<Valuation> out;
    for (const auto& [c, p, family, scale] : rows) out.push_back({c, p, parse_family(family), scale});
    return out;
}

py::dict equilibrium_dict(const EquilibriumResult& r) {
    py::dict contributions;
    for (const auto& [key, amount] : r.contributions) contributions[py::make_tuple(key.first, key.second)] = amount;
    py::dict d;
    d["k"] = r.k;
    d["contributions"] = contributions;
    d["funds"] = r.funds;
    d["aggregate_marginal"] = r.aggregate_marginal;
    d["welfare"] = r.welfare;
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    return d;
}

// Dict of project -> contributor amounts, all in one category.
std::string allocate(const std::map<std::string, std::vector<double>>& projects, double pool, bool cap_at_target) {
    CategoryInput in{"default", pool, {}};
    for (const auto& [id, amounts] : projects) in.projects.push_back(ProjectLedger::from_amounts(amounts, id));
    const auto policy = cap_at_target ? SurplusPolicy::CapAtTarget : SurplusPolicy::ScaleUp;
    return to_json(build_allocation_report({in}, policy, true)).dump();
}

std::string simulate(const std::string& config_json, int rounds) {
    const auto setup = parse_simulation(nlohmann::json::parse(config_json));
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : run_rounds(setup.config, setup.agents, rounds)) {
        nlohmann::json r = to_json(t.final_report);
        r["round"] = t.round_index;
        r["agent_totals"] = t.agent_totals;
        out.push_back(std::move(r));
    }
    return out.dump();
}

py::dict reciprocity(const std::string& contributions_csv, const std::string& teams_csv, bool weighted) {
    const auto g = build_graph(load_contributions(contributions_csv).records, load_roster(teams_csv));
    const auto r = reciprocity_stats(g, weighted);
    py::dict d;
    d["projects"] = r.rows.size();
    d["slope"] = r.slope;
    d["intercept"] = r.intercept;
    py::list cross;
    for (const auto& row : cross_category_stats(g)) {
        py::dict c;
        c["category"] = row.category;
        c["outside_share"] = row.outside_share;
        c["cross_share"] = row.cross_share;
        c["reciprocal_pairs"] = row.reciprocal_pairs;
        c["cross_pairs"] = row.cross_pairs;
        cross.append(c);
    }
    d["cross_category"] = cross;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("qf_target", [](const std::vector<double>& a) { return qf_target(ledger(a)); }, py::arg("amounts"));
    m.def("matching_requirement", [](const std::vector<double>& a) { return matching_requirement(ledger(a)); },
          py::arg("amounts"));
    m.def("marginal_match", [](const std::vector<double>& a, double c) { return marginal_match(ledger(a), c); },
          py::arg("amounts"), py::arg("new_amount"));
    m.def("decomposed_match", [](const std::vector<double>& a) { return decomposed_match(ledger(a)); },
          py::arg("amounts"));
    m.def("compute_k",
          [](const std::vector<std::vector<double>>& projects, double pool) {
              std::vector<ProjectLedger> ls;
              for (const auto& a : projects) ls.push_back(ledger(a));
              return compute_k(ls, pool);
          },
          py::arg("projects"), py::arg("pool"));
    m.def("allocate_json", &allocate, py::arg("projects"), py::arg("pool"), py::arg("cap_at_target") = false);
    m.def("max_match", [](const std::vector<double>& b) { return max_match(b); }, py::arg("budgets"));
    m.def("lambda_p", [](const std::vector<double>& a, double k) { return lambda_p(ledger(a), k); },
          py::arg("amounts"), py::arg("k"));
    m.def("lambda_lower_bound", [](const std::vector<double>& a, double k) { return lambda_lower_bound(ledger(a), k); },
          py::arg("amounts"), py::arg("k"));

    m.def("alpha_star", &alpha_star, py::arg("n"));
    m.def("alpha_double_star", &alpha_double_star, py::arg("n"), py::arg("k"));
    m.def("trigger_threshold", &trigger_threshold);
    m.def("trigger_sustainable", &trigger_sustainable, py::arg("discount_rate"));
    m.def("ring_payoff", &ring_payoff, py::arg("n"), py::arg("alpha"), py::arg("k"), py::arg("c"));

    m.def("best_response",
          [](const std::vector<std::tuple<std::string, std::string, std::string, double>>& rows, double k) {
              return equilibrium_dict(best_response(valuations(rows), k));
          },
          py::arg("valuations"), py::arg("k"));
    m.def("planner_optimum",
          [](const std::vector<std::tuple<std::string, std::string, std::string, double>>& rows, double pool) {
              const auto r = planner_optimum(valuations(rows), pool);
              py::dict d;
              d["funds"] = r.funds;
              d["common_marginal"] = r.common_marginal;
              d["welfare"] = r.welfare;
              return d;
          },
          py::arg("valuations"), py::arg("pool"));

    m.def("simulate_json", &simulate, py::arg("config_json"), py::arg("rounds") = 1);
    m.def("reciprocity", &reciprocity, py::arg("contributions_csv"), py::arg("teams_csv"), py::arg("weighted") = false);
}
