#pragma once

// Day-by-day grant round. Each morning pool events fire and k is
// republished from the contributions made up to the previous night; active
// agents then contribute against that published k. Honest agents top up
// toward their best response, colluders back their ring once per round.

#include "qfund/equilibrium.hpp"
#include "qfund/funding_core.hpp"
#include "qfund/report.hpp"
#include "qfund/stats.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace qf {

struct CategoryConfig {
    std::string name;
    double pool = 0.0;
    std::vector<std::string> projects;
};

struct PoolEvent {
    int day = 0;
    std::string category;
    double new_pool = 0.0;
};

struct RoundConfig {
    std::vector<CategoryConfig> categories;
    int duration_days = 1;
    std::vector<PoolEvent> pool_events;
    std::uint64_t seed = 0;
    double prior_k = 1.0; // k assumed by agents while nothing has been published
    SurplusPolicy policy = SurplusPolicy::ScaleUp;

    /// Throws DomainError when the invariants on days, pools or projects fail.
    void validate() const;
};

enum class AgentKind { Honest, ReciprocalColluder };

struct ProjectValuation {
    std::string project_id;
    ValuationFamily family = ValuationFamily::Sqrt;
    double scale = 1.0;
};

struct AgentSpec {
    std::string id;
    AgentKind kind = AgentKind::Honest;
    double budget = 0.0;
    double activity = 1.0; // daily probability of being active

    // honest
    std::vector<ProjectValuation> valuations;
    std::optional<double> fixed_amount; // contribute this much once per valued project instead of best-responding

    // reciprocal colluder
    std::string ring;
    std::string team_project;
    int ring_size = 0;          // 0: taken from ring membership
    int defect_from_round = -1; // -1: never defects
};

struct CategoryDay {
    double pool = 0.0;
    std::optional<double> k_open;  // after the morning's pool events, before new contributions
    std::optional<double> k_close; // after the day's contributions
};

struct DayRecord {
    int day = 0;
    std::map<std::string, CategoryDay> categories;
    std::map<std::string, double> m_qf;   // cumulative per project
    std::map<std::string, double> lambda; // per project, at k_close
};

struct PanelRow {
    int day = 0;
    std::string category;
    std::string project_id;
    std::string contributor_id;
    double amount = 0.0;
    std::optional<double> k_at_day; // k the contributor observed
    bool post_event = false;
    bool increase_category = false;
};

struct RoundTrajectory {
    int round_index = 0;
    std::vector<DayRecord> days;
    std::vector<PanelRow> panel;
    AllocationReport final_report;
    std::map<std::string, double> agent_totals;
    std::map<std::string, AgentKind> agent_kinds;
    std::map<std::string, std::string> project_category;
    std::map<std::string, std::size_t> contributor_counts; // final, per project
    std::map<std::string, std::set<std::string>> backed;   // colluder -> ring partners backed this round
};

struct SimulationSetup {
    RoundConfig config;
    std::vector<AgentSpec> agents;
};

RoundTrajectory run_round(const RoundConfig& config, const std::vector<AgentSpec>& agents);

/// Consecutive rounds with the same agents; colluders carry grim-trigger
/// memory across rounds. Round r uses seed config.seed + r.
std::vector<RoundTrajectory> run_rounds(const RoundConfig& config, const std::vector<AgentSpec>& agents,
                                        int rounds);

struct DeficitRow {
    std::string project_id;
    std::string category;
    double m_qf = 0.0;
    std::size_t contributors = 0;
};

struct DeficitCurve {
    std::vector<DeficitRow> rows;
    std::optional<stats::QuadraticFit> fit; // m_qf ~ c0 + c1 n + c2 n^2
};

DeficitCurve deficit_curve(const RoundTrajectory& trajectory);

void write_panel(std::ostream& out, const RoundTrajectory& trajectory);
void emit_panel(const RoundTrajectory& trajectory, const std::filesystem::path& path);
void write_k_series(std::ostream& out, const RoundTrajectory& trajectory);
void write_lambda_series(std::ostream& out, const RoundTrajectory& trajectory);
void write_deficits(std::ostream& out, const DeficitCurve& curve);

SimulationSetup parse_simulation(const nlohmann::json& j);
SimulationSetup load_simulation(const std::filesystem::path& path);
nlohmann::json to_json(const RoundConfig& config, const std::vector<AgentSpec>& agents);

} // namespace qf
