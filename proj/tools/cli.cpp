#include "cli.hpp"

#include "qfund/concentration.hpp"
#include "qfund/efficiency.hpp"
#include "qfund/equilibrium.hpp"
#include "qfund/errors.hpp"
#include "qfund/funding_core.hpp"
#include "qfund/ledger_io.hpp"
#include "qfund/report.hpp"
#include "qfund/round_sim.hpp"
#include "qfund/strategy.hpp"
#include "qfund/text.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>

namespace qf::cli {
namespace {

namespace fs = std::filesystem;
using text::format_double;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    return f;
}

// Writes to `path` when given, else to `fallback`.
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
    if (path.empty()) {
        body(fallback);
        return;
    }
    auto f = open_out(path);
    body(f);
    if (!f) throw IoError("write failed for " + path);
}

std::vector<Contribution> read_contributions(const std::string& path, std::ostream& err) {
    auto load = load_contributions(path);
    for (const auto& e : load.errors) err << path << ":" << e.line << ": skipped row: " << e.message << "\n";
    return std::move(load.records);
}

std::vector<CategoryInput> category_inputs(const std::vector<Contribution>& records,
                                           const std::vector<CategoryPool>& pools) {
    std::map<std::string, std::size_t> ix;
    std::vector<CategoryInput> inputs;
    for (const auto& p : pools) {
        if (ix.count(p.category)) throw DomainError("category " + p.category + " has more than one pool");
        ix[p.category] = inputs.size();
        inputs.push_back({p.category, p.pool, {}});
    }
    std::map<std::string, std::vector<Contribution>> by_category;
    std::vector<std::string> order;
    for (const auto& r : records) {
        if (!ix.count(r.category)) throw DomainError("no pool for category '" + r.category + "'");
        auto& bucket = by_category[r.category];
        if (bucket.empty()) order.push_back(r.category);
        bucket.push_back(r);
    }
    for (const auto& cat : order) inputs[ix[cat]].projects = group_by_project(by_category[cat]);
    return inputs;
}

void check_project_categories(const std::vector<Contribution>& records) {
    std::map<std::string, std::string> cat;
    for (const auto& r : records) {
        auto [it, inserted] = cat.emplace(r.project_id, r.category);
        if (!inserted && it->second != r.category)
            throw DomainError("project " + r.project_id + " appears in categories " + it->second + " and " +
                              r.category);
    }
}

nlohmann::json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

// ---------------------------------------------------------------- allocate

struct AllocateArgs {
    std::string contributions, pools, json_path, csv_path;
    bool cap_at_target = false;
};

int cmd_allocate(const AllocateArgs& a, std::ostream& out, std::ostream& err) {
    const auto records = read_contributions(a.contributions, err);
    check_project_categories(records);
    const auto pools = load_pools(a.pools);
    const auto report = build_allocation_report(category_inputs(records, pools),
                                                a.cap_at_target ? SurplusPolicy::CapAtTarget : SurplusPolicy::ScaleUp,
                                                true);
    emit(a.json_path, out, [&](std::ostream& o) { o << to_json(report).dump(2) << "\n"; });
    if (!a.csv_path.empty()) emit(a.csv_path, out, [&](std::ostream& o) { write_allocation_csv(o, report); });
    return 0;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseArgs {
    std::string contributions, pools, out_path, dispersion_path;
    std::optional<double> k;
};

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out, std::ostream& err) {
    const auto records = read_contributions(a.contributions, err);
    check_project_categories(records);
    if (!a.k && a.pools.empty()) throw UsageError("diagnose needs --pools or --k");
    std::vector<CategoryInput> inputs;
    if (!a.pools.empty()) {
        inputs = category_inputs(records, load_pools(a.pools));
    } else {
        std::map<std::string, std::size_t> ix;
        for (const auto& r : records)
            if (!ix.count(r.category)) {
                ix[r.category] = inputs.size();
                inputs.push_back({r.category, 1.0, {}});
            }
        std::map<std::string, std::vector<Contribution>> by_category;
        for (const auto& r : records) by_category[r.category].push_back(r);
        for (auto& in : inputs) in.projects = group_by_project(by_category[in.category]);
    }

    std::vector<LambdaReport> reports;
    std::vector<std::string> categories;
    for (const auto& in : inputs) {
        double k;
        if (a.k) {
            k = *a.k;
        } else {
            const double required = total_matching_requirement(in.projects);
            if (!(required > 0.0)) {
                err << "category " << in.category << ": no matchable projects, skipped\n";
                continue;
            }
            k = required / in.pool;
        }
        categories.push_back(in.category);
        for (const auto& l : in.projects)
            if (!l.empty()) reports.push_back(lambda_report(l, k));
    }
    if (reports.empty()) throw NoMatchableProjects();

    emit(a.out_path, out, [&](std::ostream& o) {
        o << "category,project_id,n,k,lambda_p,lambda_lower_bound\n";
        for (const auto& r : reports)
            o << text::csv_field(r.category) << ',' << text::csv_field(r.project_id) << ',' << r.n << ','
              << format_double(r.k_used) << ',' << format_double(r.lambda_p) << ',' << format_double(r.lower_bound)
              << '\n';
    });
    const auto write_dispersion = [&](std::ostream& o) {
        o << "category,project_count,mean,stdev,min,max\n";
        for (const auto& c : categories) {
            const bool any = std::any_of(reports.begin(), reports.end(), [&](const auto& r) { return r.category == c; });
            if (!any) continue;
            const auto d = dispersion(reports, c);
            o << text::csv_field(d.category) << ',' << d.project_count << ',' << format_double(d.mean) << ','
              << format_double(d.stdev) << ',' << format_double(d.min) << ',' << format_double(d.max) << '\n';
        }
    };
    if (a.dispersion_path.empty())
        write_dispersion(err);
    else
        emit(a.dispersion_path, out, write_dispersion);
    return 0;
}

// ----------------------------------------------------------------- sweep-k

struct SweepArgs {
    std::string profiles = "1:1,1:2,1:15";
    double k_min = 1.0, k_max = 20.0;
    std::size_t steps = 100;
    std::string out_path;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream&) {
    std::vector<RatioProfile> profiles;
    try {
        profiles = parse_ratio_profiles(a.profiles);
    } catch (const DomainError& e) {
        throw UsageError(std::string("--profiles: ") + e.what());
    }
    if (!(a.k_min > 0.0) || !(a.k_max >= a.k_min)) throw UsageError("need 0 < --k-min <= --k-max");
    if (a.steps == 0) throw UsageError("--steps must be positive");
    const auto grid = linear_grid(a.k_min, a.k_max, a.steps);
    const auto points = k_sweep(profiles, grid);
    emit(a.out_path, out, [&](std::ostream& o) { write_sweep_csv(o, points); });
    return 0;
}

// --------------------------------------------------------------- collusion

struct CollusionArgs {
    int n = 25;
    double k = 1.0;
    bool sweep = false;
    double k_max = 30.0;
    std::optional<double> r;
    std::string out_path;
};

int cmd_collusion(const CollusionArgs& a, std::ostream& out, std::ostream&) {
    std::vector<CollusionThresholds> rows;
    if (a.sweep) {
        std::vector<double> ks;
        for (int k = 1; k <= static_cast<int>(a.k_max); ++k) ks.push_back(k);
        rows = threshold_sweep({10, 25}, ks);
    } else {
        rows.push_back(collusion_thresholds(a.n, a.k));
    }
    emit(a.out_path, out, [&](std::ostream& o) {
        o << "n,k,alpha_star,alpha_double_star";
        if (a.r) o << ",discount_rate,trigger_threshold,trigger_sustainable";
        o << '\n';
        for (const auto& t : rows) {
            o << t.n << ',' << format_double(t.k) << ',' << format_double(t.alpha_star) << ','
              << format_double(t.alpha_double_star);
            if (a.r)
                o << ',' << format_double(*a.r) << ',' << format_double(trigger_threshold()) << ','
                  << (trigger_sustainable(*a.r) ? 1 : 0);
            o << '\n';
        }
    });
    return 0;
}

// ------------------------------------------------------------- equilibrium

struct EquilibriumArgs {
    std::string valuations, budgets, out_path;
    double k = 1.0;
    std::optional<double> pool;
    bool endogenous_k = false;
    bool planner = false;
};

nlohmann::json equilibrium_json(const EquilibriumResult& r) {
    nlohmann::json j{{"k", r.k},
                     {"converged", r.converged},
                     {"iterations", r.iterations},
                     {"welfare", r.welfare},
                     {"funds", r.funds},
                     {"aggregate_marginal", r.aggregate_marginal}};
    j["contributions"] = nlohmann::json::array();
    for (const auto& [key, amount] : r.contributions)
        j["contributions"].push_back({{"contributor_id", key.first},
                                      {"project_id", key.second},
                                      {"amount", amount},
                                      {"budget_binding", r.clamped.count(key) != 0}});
    return j;
}

int cmd_equilibrium(const EquilibriumArgs& a, std::ostream& out, std::ostream& err) {
    const auto vals = load_valuations(a.valuations);
    EquilibriumOptions opts;
    if (!a.budgets.empty()) opts.budgets = load_budgets(a.budgets);
    if ((a.endogenous_k || a.planner) && !a.pool) throw UsageError("--endogenous-k and --planner need --pool");

    nlohmann::json j;
    if (a.endogenous_k) {
        const auto r = solve_with_endogenous_k(vals, *a.pool, opts, a.k);
        j = equilibrium_json(r.equilibrium);
        j["endogenous_k"] = {{"k", r.k}, {"outer_iterations", r.outer_iterations}, {"converged", r.converged}};
        if (!r.converged) err << "warning: endogenous k did not settle\n";
    } else {
        const auto r = best_response(vals, a.k, opts);
        j = equilibrium_json(r);
        if (!r.converged) err << "warning: best-response iteration hit max_iter without converging\n";
    }
    if (a.planner) {
        const auto p = planner_optimum(vals, *a.pool);
        j["planner"] = {{"funds", p.funds},
                        {"common_marginal", p.common_marginal},
                        {"welfare", p.welfare},
                        {"iterations", p.iterations}};
    }
    emit(a.out_path, out, [&](std::ostream& o) { o << j.dump(2) << "\n"; });
    return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string config, out_dir;
    std::optional<std::uint64_t> seed;
    int rounds = 1;
};

void write_round(const RoundTrajectory& t, const fs::path& dir) {
    fs::create_directories(dir);
    {
        auto f = open_out(dir / "k_series.csv");
        write_k_series(f, t);
    }
    emit_panel(t, dir / "panel.csv");
    {
        auto f = open_out(dir / "deficits.csv");
        write_deficits(f, deficit_curve(t));
    }
    {
        auto f = open_out(dir / "lambda.csv");
        write_lambda_series(f, t);
    }
    {
        auto f = open_out(dir / "report.json");
        f << to_json(t.final_report).dump(2) << "\n";
    }
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream&) {
    auto setup = load_simulation(a.config);
    if (a.seed) setup.config.seed = *a.seed;
    if (a.rounds < 1) throw UsageError("--rounds must be at least 1");
    const auto rounds = run_rounds(setup.config, setup.agents, a.rounds);

    nlohmann::json summary;
    summary["seed"] = setup.config.seed;
    summary["rounds"] = nlohmann::json::array();
    for (const auto& t : rounds) {
        const fs::path dir = a.rounds == 1 ? fs::path(a.out_dir) : fs::path(a.out_dir) / ("round_" + std::to_string(t.round_index));
        write_round(t, dir);
        const auto curve = deficit_curve(t);
        nlohmann::json jr{{"round", t.round_index}, {"agent_totals", t.agent_totals}};
        nlohmann::json ks;
        for (const auto& c : t.final_report.categories) ks[c.category] = opt_json(c.k);
        jr["final_k"] = ks;
        if (curve.fit)
            jr["deficit_fit"] = {{"c0", curve.fit->c0}, {"c1", curve.fit->c1}, {"c2", curve.fit->c2}, {"r2", curve.fit->r2}};
        nlohmann::json backed = nlohmann::json::object();
        for (const auto& [id, partners] : t.backed) backed[id] = partners;
        jr["backed"] = backed;
        summary["rounds"].push_back(std::move(jr));
    }
    out << summary.dump(2) << "\n";
    return 0;
}

// -------------------------------------------------------------- reciprocal

struct ReciprocalArgs {
    std::string contributions, teams, out_dir;
    bool weighted = false;
};

int cmd_reciprocal(const ReciprocalArgs& a, std::ostream& out, std::ostream& err) {
    const auto records = read_contributions(a.contributions, err);
    const auto roster = load_roster(a.teams);
    const auto graph = build_graph(records, roster);
    const auto report = reciprocity_stats(graph, a.weighted);
    const auto cross = cross_category_stats(graph);

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    {
        auto f = open_out(dir / "reciprocal_report.csv");
        write_reciprocal_report(f, report);
    }
    {
        auto f = open_out(dir / "cross_category.csv");
        write_cross_category(f, cross);
    }
    for (const auto& row : cross)
        if (row.single_category_warning) err << "warning: only one category present; cross shares are degenerate\n";

    nlohmann::json j{{"weighted", report.weighted},
                     {"projects", report.rows.size()},
                     {"edges", graph.edges.size()},
                     {"slope", opt_json(report.slope)},
                     {"intercept", opt_json(report.intercept)},
                     {"cross_slope_cross_outdegree", opt_json(report.cross_slope_cross_outdegree)},
                     {"cross_slope_total_outdegree", opt_json(report.cross_slope_total_outdegree)}};
    out << j.dump(2) << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Capital-constrained quadratic funding toolkit", "qfund"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    std::function<int()> action;

    AllocateArgs alloc;
    auto* s_alloc = app.add_subcommand("allocate", "Allocate each category's pool across its projects");
    s_alloc->add_option("--contributions", alloc.contributions, "contributions CSV")->required();
    s_alloc->add_option("--pools", alloc.pools, "pools CSV (category,pool)")->required();
    s_alloc->add_flag("--cap-at-target", alloc.cap_at_target, "never pay more than the QF match when k < 1");
    s_alloc->add_option("--json", alloc.json_path, "write the JSON report here instead of stdout");
    s_alloc->add_option("--csv", alloc.csv_path, "also write the per-project CSV here");
    s_alloc->callback([&] { action = [&] { return cmd_allocate(alloc, out, err); }; });

    DiagnoseArgs diag;
    auto* s_diag = app.add_subcommand("diagnose", "Per-project lambda_p and its dispersion by category");
    s_diag->add_option("--contributions", diag.contributions, "contributions CSV")->required();
    s_diag->add_option("--pools", diag.pools, "pools CSV; k is derived per category");
    s_diag->add_option("--k", diag.k, "use this k for every category instead");
    s_diag->add_option("--out", diag.out_path, "lambda CSV path (default stdout)");
    s_diag->add_option("--dispersion", diag.dispersion_path, "dispersion CSV path (default stderr)");
    s_diag->callback([&] { action = [&] { return cmd_diagnose(diag, out, err); }; });

    SweepArgs sweep;
    auto* s_sweep = app.add_subcommand("sweep-k", "lambda_p against k for contribution ratio profiles");
    s_sweep->add_option("--profiles", sweep.profiles, "comma-separated ratios, e.g. 1:1,1:2,1:15");
    s_sweep->add_option("--k-min", sweep.k_min, "lower end of the k grid");
    s_sweep->add_option("--k-max", sweep.k_max, "upper end of the k grid");
    s_sweep->add_option("--steps", sweep.steps, "grid intervals");
    s_sweep->add_option("--out", sweep.out_path, "CSV path (default stdout)");
    s_sweep->callback([&] { action = [&] { return cmd_sweep(sweep, out, err); }; });

    CollusionArgs coll;
    auto* s_coll = app.add_subcommand("collusion", "Ring participation thresholds");
    s_coll->add_option("--n", coll.n, "ring size");
    s_coll->add_option("--k", coll.k, "match divisor");
    s_coll->add_flag("--sweep", coll.sweep, "table for n in {10,25} and integer k up to --k-max");
    s_coll->add_option("--k-max", coll.k_max, "largest k in the sweep");
    s_coll->add_option("--r", coll.r, "discount rate to test against the trigger threshold");
    s_coll->add_option("--out", coll.out_path, "CSV path (default stdout)");
    s_coll->callback([&] { action = [&] { return cmd_collusion(coll, out, err); }; });

    EquilibriumArgs eq;
    auto* s_eq = app.add_subcommand("equilibrium", "Best-response equilibrium and planner benchmark");
    s_eq->add_option("--valuations", eq.valuations, "valuations CSV")->required();
    s_eq->add_option("--k", eq.k, "match divisor (initial guess with --endogenous-k)");
    s_eq->add_option("--pool", eq.pool, "matching pool");
    s_eq->add_option("--budgets", eq.budgets, "budgets CSV (contributor_id,budget)");
    s_eq->add_flag("--endogenous-k", eq.endogenous_k, "experimental: iterate k to consistency with the pool");
    s_eq->add_flag("--planner", eq.planner, "also report the planner optimum for --pool");
    s_eq->add_option("--out", eq.out_path, "JSON path (default stdout)");
    s_eq->callback([&] { action = [&] { return cmd_equilibrium(eq, out, err); }; });

    SimulateArgs sim;
    auto* s_sim = app.add_subcommand("simulate", "Run grant rounds from a JSON config");
    s_sim->add_option("--config", sim.config, "simulation config JSON")->required();
    s_sim->add_option("--out-dir", sim.out_dir, "output directory")->required();
    s_sim->add_option("--seed", sim.seed, "override the config seed");
    s_sim->add_option("--rounds", sim.rounds, "consecutive rounds (subdirectories round_<r>)");
    s_sim->callback([&] { action = [&] { return cmd_simulate(sim, out, err); }; });

    ReciprocalArgs rec;
    auto* s_rec = app.add_subcommand("reciprocal", "Reciprocal-backing statistics from team rosters");
    s_rec->add_option("--contributions", rec.contributions, "contributions CSV")->required();
    s_rec->add_option("--teams", rec.teams, "teams CSV (project_id,member_id)")->required();
    s_rec->add_option("--out-dir", rec.out_dir, "output directory")->required();
    s_rec->add_flag("--weighted", rec.weighted, "regress reciprocal amounts on outgoing amounts");
    s_rec->callback([&] { action = [&] { return cmd_reciprocal(rec, out, err); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        return action ? action() : 2;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace qf::cli
