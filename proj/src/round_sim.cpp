#include "qfund/round_sim.hpp"

#include "qfund/efficiency.hpp"
#include "qfund/errors.hpp"
#include "qfund/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>

namespace qf {

void RoundConfig::validate() const {
    if (duration_days < 1) throw DomainError("duration_days must be at least 1");
    if (!(prior_k > 0.0)) throw DomainError("prior_k must be positive");
    std::set<std::string> names, projects;
    for (const auto& c : categories) {
        if (!names.insert(c.name).second) throw DomainError("duplicate category " + c.name);
        if (!(c.pool > 0.0)) throw DomainError("pool of category " + c.name + " must be positive");
        for (const auto& p : c.projects)
            if (!projects.insert(p).second) throw DomainError("project " + p + " listed in more than one category");
    }
    for (const auto& e : pool_events) {
        if (e.day < 0 || e.day >= duration_days)
            throw DomainError("pool event day " + std::to_string(e.day) + " outside the round");
        if (!names.count(e.category)) throw DomainError("pool event for unknown category " + e.category);
        if (!(e.new_pool > 0.0)) throw DomainError("pool event must set a positive pool");
    }
}

namespace {

constexpr double kBudgetSlack = 1e-9;

struct ProjectState {
    ProjectLedger ledger;
    std::size_t category;
};

struct Simulator {
    const RoundConfig& config;
    const std::vector<AgentSpec>& agents;
    int round_index;
    std::map<std::string, std::set<std::string>>& distrust; // colluder -> partners no longer backed

    std::vector<ProjectState> projects;
    std::map<std::string, std::size_t> project_ix;
    std::vector<double> pools;
    std::vector<std::optional<double>> published_k;
    std::map<std::string, std::vector<std::size_t>> ring_members;
    std::vector<double> spent;
    std::vector<bool> colluder_done;
    std::set<std::size_t> increase_categories;
    int first_event_day = std::numeric_limits<int>::max();
    RoundTrajectory traj;

    Simulator(const RoundConfig& c, const std::vector<AgentSpec>& a, int r,
              std::map<std::string, std::set<std::string>>& d)
        : config(c), agents(a), round_index(r), distrust(d) {}

    void validate_agents() {
        std::set<std::string> ids;
        for (std::size_t i = 0; i < agents.size(); ++i) {
            const auto& a = agents[i];
            if (!ids.insert(a.id).second) throw DomainError("duplicate agent id " + a.id);
            if (!(a.budget > 0.0)) throw DomainError("agent " + a.id + " needs a positive budget");
            if (!(a.activity >= 0.0 && a.activity <= 1.0)) throw DomainError("agent " + a.id + " activity not in [0,1]");
            if (a.kind == AgentKind::Honest) {
                if (a.fixed_amount && !(*a.fixed_amount > 0.0))
                    throw DomainError("agent " + a.id + " fixed_amount must be positive");
                for (const auto& v : a.valuations) {
                    if (!project_ix.count(v.project_id))
                        throw DomainError("agent " + a.id + " values unknown project " + v.project_id);
                    if (!(v.scale > 0.0)) throw DomainError("agent " + a.id + " has a nonpositive valuation scale");
                }
            } else {
                if (a.ring.empty()) throw DomainError("colluder " + a.id + " has no ring");
                if (!project_ix.count(a.team_project))
                    throw DomainError("colluder " + a.id + " has unknown team project " + a.team_project);
                ring_members[a.ring].push_back(i);
            }
        }
        for (const auto& [ring, members] : ring_members) {
            if (members.size() < 2) throw DomainError("ring " + ring + " needs at least 2 members");
            for (std::size_t m : members)
                if (agents[m].ring_size != 0 && agents[m].ring_size != static_cast<int>(members.size()))
                    throw DomainError("ring " + ring + " size does not match its membership");
        }
    }

    std::optional<double> current_k(std::size_t category) const {
        double required = 0.0;
        for (const auto& p : projects)
            if (p.category == category) required += matching_requirement(p.ledger);
        if (!(required > 0.0)) return std::nullopt;
        return required / pools[category];
    }

    void emit(std::size_t agent, std::size_t project, double amount, int day) {
        if (!(amount > 0.0)) return;
        const auto& a = agents[agent];
        if (spent[agent] + amount > a.budget * (1.0 + kBudgetSlack))
            throw DomainError("agent " + a.id + " exceeded its budget");
        spent[agent] += amount;
        auto& ps = projects[project];
        ps.ledger.add(a.id, amount, day);
        traj.panel.push_back(PanelRow{day, config.categories[ps.category].name, ps.ledger.project_id(), a.id, amount,
                                      published_k[ps.category], day >= first_event_day,
                                      increase_categories.count(ps.category) != 0});
    }

    void act_honest(std::size_t i, int day) {
        const auto& a = agents[i];
        for (const auto& v : a.valuations) {
            const double remaining = a.budget - spent[i];
            if (remaining <= 0.0) return;
            const std::size_t pj = project_ix.at(v.project_id);
            const auto& ledger = projects[pj].ledger;
            const double own = ledger.amount_of(a.id);
            if (a.fixed_amount) {
                if (own == 0.0) emit(i, pj, std::min(*a.fixed_amount, remaining), day);
                continue;
            }
            const double k = published_k[projects[pj].category].value_or(config.prior_k);
            double others_sqrt = 0.0, others_total = 0.0;
            for (const auto& [cid, amount] : ledger.per_contributor()) {
                if (cid == a.id) continue;
                others_sqrt += std::sqrt(amount);
                others_total += amount;
            }
            const Valuation val{a.id, v.project_id, v.family, v.scale};
            const double target = best_response_amount(val, others_sqrt, others_total, k);
            const double step = target - own;
            if (step > 1e-12 * std::max(1.0, target)) emit(i, pj, std::min(step, remaining), day);
        }
    }

    void act_colluder(std::size_t i, int day) {
        if (colluder_done[i]) return;
        colluder_done[i] = true;
        const auto& a = agents[i];
        const auto& members = ring_members.at(a.ring);
        const double share = a.budget / static_cast<double>(members.size());
        const bool defecting = a.defect_from_round >= 0 && round_index >= a.defect_from_round;
        const auto& blocked = distrust[a.id];

        double own_share = share;
        auto& backed = traj.backed[a.id];
        for (std::size_t m : members) {
            if (m == i) continue;
            const auto& partner = agents[m];
            if (defecting || blocked.count(partner.id)) {
                own_share += share;
                continue;
            }
            emit(i, project_ix.at(partner.team_project), share, day);
            backed.insert(partner.id);
        }
        emit(i, project_ix.at(a.team_project), own_share, day);
    }

    RoundTrajectory run() {
        config.validate();
        for (std::size_t c = 0; c < config.categories.size(); ++c) {
            pools.push_back(config.categories[c].pool);
            for (const auto& p : config.categories[c].projects) {
                project_ix[p] = projects.size();
                projects.push_back(ProjectState{ProjectLedger(p, config.categories[c].name), c});
                traj.project_category[p] = config.categories[c].name;
            }
        }
        validate_agents();
        std::map<std::string, std::size_t> cat_ix;
        for (std::size_t c = 0; c < config.categories.size(); ++c) cat_ix[config.categories[c].name] = c;
        for (const auto& e : config.pool_events) {
            increase_categories.insert(cat_ix.at(e.category));
            first_event_day = std::min(first_event_day, e.day);
        }

        traj.round_index = round_index;
        for (const auto& a : agents) {
            traj.agent_kinds[a.id] = a.kind;
            traj.agent_totals[a.id] = 0.0;
            if (a.kind == AgentKind::ReciprocalColluder) traj.backed[a.id];
        }
        spent.assign(agents.size(), 0.0);
        colluder_done.assign(agents.size(), false);
        published_k.assign(config.categories.size(), std::nullopt);

        std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(round_index));
        auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

        for (int day = 0; day < config.duration_days; ++day) {
            DayRecord rec;
            rec.day = day;
            for (const auto& e : config.pool_events)
                if (e.day == day) pools[cat_ix.at(e.category)] = e.new_pool;
            for (std::size_t c = 0; c < config.categories.size(); ++c) {
                published_k[c] = current_k(c);
                rec.categories[config.categories[c].name] = CategoryDay{pools[c], published_k[c], std::nullopt};
            }

            for (std::size_t i = 0; i < agents.size(); ++i) {
                // One draw per agent per day regardless of state keeps streams aligned across configs.
                const bool active = uniform() < agents[i].activity;
                if (!active) continue;
                if (agents[i].kind == AgentKind::Honest)
                    act_honest(i, day);
                else
                    act_colluder(i, day);
            }

            for (std::size_t c = 0; c < config.categories.size(); ++c) {
                const auto k = current_k(c);
                rec.categories[config.categories[c].name].k_close = k;
                for (const auto& p : projects) {
                    if (p.category != c) continue;
                    rec.m_qf[p.ledger.project_id()] = matching_requirement(p.ledger);
                    if (k && !p.ledger.empty()) rec.lambda[p.ledger.project_id()] = lambda_p(p.ledger, *k);
                }
            }
            traj.days.push_back(std::move(rec));
        }

        std::vector<CategoryInput> inputs;
        for (std::size_t c = 0; c < config.categories.size(); ++c) {
            CategoryInput in{config.categories[c].name, pools[c], {}};
            for (const auto& p : projects)
                if (p.category == c) in.projects.push_back(p.ledger);
            inputs.push_back(std::move(in));
        }
        traj.final_report = build_allocation_report(inputs, config.policy, false);
        for (std::size_t i = 0; i < agents.size(); ++i) traj.agent_totals[agents[i].id] = spent[i];
        for (const auto& p : projects) traj.contributor_counts[p.ledger.project_id()] = p.ledger.contributor_count();
        return std::move(traj);
    }
};

void update_trust(const std::vector<AgentSpec>& agents, const RoundTrajectory& t,
                  std::map<std::string, std::set<std::string>>& distrust) {
    std::map<std::string, std::vector<std::string>> rings;
    for (const auto& a : agents)
        if (a.kind == AgentKind::ReciprocalColluder) rings[a.ring].push_back(a.id);
    for (const auto& [ring, members] : rings)
        for (const auto& me : members)
            for (const auto& other : members) {
                if (me == other) continue;
                auto it = t.backed.find(other);
                if (it == t.backed.end() || !it->second.count(me)) distrust[me].insert(other);
            }
}

} // namespace

RoundTrajectory run_round(const RoundConfig& config, const std::vector<AgentSpec>& agents) {
    std::map<std::string, std::set<std::string>> distrust;
    return Simulator(config, agents, 0, distrust).run();
}

std::vector<RoundTrajectory> run_rounds(const RoundConfig& config, const std::vector<AgentSpec>& agents,
                                        int rounds) {
    if (rounds < 1) throw DomainError("need at least one round");
    std::map<std::string, std::set<std::string>> distrust;
    std::vector<RoundTrajectory> out;
    for (int r = 0; r < rounds; ++r) {
        out.push_back(Simulator(config, agents, r, distrust).run());
        update_trust(agents, out.back(), distrust);
    }
    return out;
}

DeficitCurve deficit_curve(const RoundTrajectory& t) {
    DeficitCurve curve;
    std::vector<double> xs, ys;
    for (const auto& cat : t.final_report.categories)
        for (const auto& p : cat.projects) {
            curve.rows.push_back({p.outcome.project_id, cat.category, p.outcome.m_qf, p.outcome.contributors});
            xs.push_back(static_cast<double>(p.outcome.contributors));
            ys.push_back(p.outcome.m_qf);
        }
    curve.fit = stats::quadratic_fit(xs, ys);
    return curve;
}

namespace {

std::string opt_str(const std::optional<double>& v) {
    return v ? text::format_double(*v) : std::string();
}

} // namespace

void write_panel(std::ostream& out, const RoundTrajectory& t) {
    out << "day,category,project_id,contributor_id,amount,sqrt_amount,k_at_day,post_event_flag,"
           "increase_category_flag\n";
    for (const auto& r : t.panel)
        out << r.day << ',' << text::csv_field(r.category) << ',' << text::csv_field(r.project_id) << ','
            << text::csv_field(r.contributor_id) << ',' << text::format_double(r.amount) << ','
            << text::format_double(std::sqrt(r.amount)) << ',' << opt_str(r.k_at_day) << ','
            << (r.post_event ? 1 : 0) << ',' << (r.increase_category ? 1 : 0) << '\n';
}

void emit_panel(const RoundTrajectory& t, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    write_panel(out, t);
    if (!out) throw IoError("write failed for " + path.string());
}

void write_k_series(std::ostream& out, const RoundTrajectory& t) {
    out << "day,category,pool,k_open,k_close,k_defined\n";
    for (const auto& d : t.days)
        for (const auto& [cat, cd] : d.categories)
            out << d.day << ',' << text::csv_field(cat) << ',' << text::format_double(cd.pool) << ','
                << opt_str(cd.k_open) << ',' << opt_str(cd.k_close) << ',' << (cd.k_close ? 1 : 0) << '\n';
}

void write_lambda_series(std::ostream& out, const RoundTrajectory& t) {
    out << "day,category,project_id,lambda_p\n";
    for (const auto& d : t.days)
        for (const auto& [project, lambda] : d.lambda)
            out << d.day << ',' << text::csv_field(t.project_category.at(project)) << ','
                << text::csv_field(project) << ',' << text::format_double(lambda) << '\n';
}

void write_deficits(std::ostream& out, const DeficitCurve& curve) {
    out << "project_id,category,contributors,m_qf\n";
    for (const auto& r : curve.rows)
        out << text::csv_field(r.project_id) << ',' << text::csv_field(r.category) << ',' << r.contributors << ','
            << text::format_double(r.m_qf) << '\n';
}

namespace {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

} // namespace

SimulationSetup parse_simulation(const nlohmann::json& j) {
    SimulationSetup s;
    try {
        auto& c = s.config;
        c.duration_days = j.at("duration_days").get<int>();
        c.seed = get_or<std::uint64_t>(j, "seed", 0);
        c.prior_k = get_or<double>(j, "prior_k", 1.0);
        c.policy = get_or<bool>(j, "cap_at_target", false) ? SurplusPolicy::CapAtTarget : SurplusPolicy::ScaleUp;
        for (const auto& jc : j.at("categories"))
            c.categories.push_back({jc.at("name").get<std::string>(), jc.at("pool").get<double>(),
                                    jc.at("projects").get<std::vector<std::string>>()});
        if (j.contains("pool_events"))
            for (const auto& je : j.at("pool_events"))
                c.pool_events.push_back(
                    {je.at("day").get<int>(), je.at("category").get<std::string>(), je.at("new_pool").get<double>()});

        if (j.contains("agents"))
            for (const auto& ja : j.at("agents")) {
                AgentSpec a;
                a.id = ja.at("id").get<std::string>();
                const auto kind = ja.at("kind").get<std::string>();
                if (kind == "honest")
                    a.kind = AgentKind::Honest;
                else if (kind == "reciprocal_colluder")
                    a.kind = AgentKind::ReciprocalColluder;
                else
                    throw FormatError("unknown agent kind '" + kind + "'");
                a.budget = ja.at("budget").get<double>();
                a.activity = get_or<double>(ja, "activity", 1.0);
                if (ja.contains("fixed_amount")) a.fixed_amount = ja.at("fixed_amount").get<double>();
                if (ja.contains("valuations"))
                    for (const auto& jv : ja.at("valuations"))
                        a.valuations.push_back({jv.at("project").get<std::string>(),
                                                parse_family(get_or<std::string>(jv, "family", "sqrt")),
                                                get_or<double>(jv, "scale", 1.0)});
                a.ring = get_or<std::string>(ja, "ring", "");
                a.team_project = get_or<std::string>(ja, "team_project", "");
                a.ring_size = get_or<int>(ja, "ring_size", 0);
                a.defect_from_round = get_or<int>(ja, "defect_from_round", -1);
                s.agents.push_back(std::move(a));
            }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("simulation config: ") + e.what());
    }
    return s;
}

SimulationSetup load_simulation(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return parse_simulation(j);
}

nlohmann::json to_json(const RoundConfig& c, const std::vector<AgentSpec>& agents) {
    nlohmann::json j;
    j["duration_days"] = c.duration_days;
    j["seed"] = c.seed;
    j["prior_k"] = c.prior_k;
    j["cap_at_target"] = c.policy == SurplusPolicy::CapAtTarget;
    j["categories"] = nlohmann::json::array();
    for (const auto& cat : c.categories)
        j["categories"].push_back({{"name", cat.name}, {"pool", cat.pool}, {"projects", cat.projects}});
    j["pool_events"] = nlohmann::json::array();
    for (const auto& e : c.pool_events)
        j["pool_events"].push_back({{"day", e.day}, {"category", e.category}, {"new_pool", e.new_pool}});
    j["agents"] = nlohmann::json::array();
    for (const auto& a : agents) {
        nlohmann::json ja{{"id", a.id},
                          {"kind", a.kind == AgentKind::Honest ? "honest" : "reciprocal_colluder"},
                          {"budget", a.budget},
                          {"activity", a.activity}};
        if (a.kind == AgentKind::Honest) {
            if (a.fixed_amount) ja["fixed_amount"] = *a.fixed_amount;
            ja["valuations"] = nlohmann::json::array();
            for (const auto& v : a.valuations)
                ja["valuations"].push_back({{"project", v.project_id}, {"family", to_string(v.family)}, {"scale", v.scale}});
        } else {
            ja["ring"] = a.ring;
            ja["team_project"] = a.team_project;
            if (a.ring_size) ja["ring_size"] = a.ring_size;
            if (a.defect_from_round >= 0) ja["defect_from_round"] = a.defect_from_round;
        }
        j["agents"].push_back(std::move(ja));
    }
    return j;
}

} // namespace qf
