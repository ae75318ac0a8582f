// Acceptance gate: one PASS/FAIL line per criterion. Tolerances and time
// limits are pinned below and are not tuned to the results.

#include "support.hpp"

#include "qfund/concentration.hpp"
#include "qfund/efficiency.hpp"
#include "qfund/equilibrium.hpp"
#include "qfund/funding_core.hpp"
#include "qfund/ledger_io.hpp"
#include "qfund/round_sim.hpp"
#include "qfund/stats.hpp"
#include "qfund/strategy.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_set>

using namespace qf;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

bool within(double got, double want, double tol) {
    return std::abs(got - want) <= tol;
}

bool within_rel(double got, double want, double tol) {
    return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

// ------------------------------------------------------------------ 1

Outcome quadratic_scaling() {
    Outcome o;
    double worst = 0.0;
    for (int n = 2; n <= 64; ++n)
        for (double c : {0.5, 1.0, 7.0, 123.25}) {
            const std::vector<double> v(n, c);
            const double got = matching_requirement(ProjectLedger::from_amounts(v));
            const double want = static_cast<double>(n * n - n) * c;
            worst = std::max(worst, std::abs(got - want) / want);
        }
    o.require(worst <= 1e-9, "relative error " + fmt(worst));
    o.note("max rel err " + fmt(worst, 3));
    return o;
}

// ------------------------------------------------------------------ 2

Outcome decomposition_identity() {
    Outcome o;
    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto l = qftest::random_ledger(rng, 12);
        const double a = decomposed_match(l), b = matching_requirement(l);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
    }
    o.require(worst <= 1e-9, "max deviation " + fmt(worst));
    o.note("10000 ledgers, max rel dev " + fmt(worst, 3));
    return o;
}

// ------------------------------------------------------------------ 3

Outcome correlation_brute_force() {
    Outcome o;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> budget(0.5, 5.0);
    std::size_t evaluated = 0;
    for (int contributors = 2; contributors <= 4; ++contributors)
        for (int projects = 2; projects <= 3; ++projects) {
            std::vector<double> m(contributors);
            for (auto& b : m) b = budget(rng);
            const auto g = qftest::grid_max_total_match(m, projects, 20);
            evaluated += g.evaluated;
            const std::string tag = std::to_string(contributors) + "x" + std::to_string(projects);
            o.require(within_rel(g.best, max_match(m), 1e-6), tag + " grid max " + fmt(g.best, 12) + " vs " +
                                                                  fmt(max_match(m), 12));
            bool correlated = true;
            for (int i = 1; i < contributors; ++i) correlated = correlated && g.argmax[i] == g.argmax[0];
            o.require(correlated, tag + " argmax not correlated");

            std::vector<BudgetedContributor> cs;
            for (int i = 0; i < contributors; ++i) {
                BudgetedContributor c{"c" + std::to_string(i), m[i], {}};
                for (int p = 0; p < projects; ++p) c.shares["p" + std::to_string(p)] = g.grid[g.argmax[i]][p];
                cs.push_back(std::move(c));
            }
            o.require(within_rel(total_match_for_shares(cs), g.best, 1e-9), tag + " library disagrees with grid");
        }
    o.note(std::to_string(evaluated) + " joint share profiles");
    return o;
}

// ------------------------------------------------------------------ 4

Outcome budget_balance() {
    Outcome o;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> pool(1.0, 1e6);
    std::uniform_int_distribution<int> np(1, 10);
    double worst = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<ProjectLedger> ls;
        for (int p = np(rng); p > 0; --p) ls.push_back(qftest::random_ledger(rng));
        if (!(total_matching_requirement(ls) > 0.0)) continue;
        const double d = pool(rng);
        double paid = 0.0;
        for (const auto& out : cqf_allocate(ls, d).outcomes) paid += out.m_actual;
        worst = std::max(worst, std::abs(paid - d));
    }
    o.require(worst <= 1e-6, "budget gap " + fmt(worst));

    // Pool event 120 -> 150 in a simulated round.
    RoundConfig cfg;
    cfg.duration_days = 12;
    cfg.seed = 40;
    cfg.categories.push_back({"Tech", 120.0, {"a", "b", "c"}});
    cfg.categories.push_back({"Other", 120.0, {"d"}});
    cfg.pool_events.push_back({6, "Tech", 150.0});
    std::vector<AgentSpec> agents;
    for (int i = 0; i < 12; ++i) {
        AgentSpec a;
        a.id = "u" + std::to_string(i);
        a.budget = 5.0 + i;
        a.activity = 0.3;
        a.fixed_amount = 1.0 + i % 4;
        a.valuations = {{std::string(1, "abcd"[i % 4]), ValuationFamily::Sqrt, 1.0}};
        agents.push_back(std::move(a));
    }
    const auto t = run_round(cfg, agents);
    const auto& before = t.days[5].categories.at("Tech");
    const auto& after = t.days[6].categories.at("Tech");
    if (before.k_close && after.k_open) {
        const double factor = *after.k_open / *before.k_close;
        o.require(within(factor, 0.8, 1e-12), "event factor " + fmt(factor, 17));
        o.note("event factor " + fmt(factor, 15));
    } else {
        o.require(false, "k undefined around the event");
    }
    for (const auto& c : t.final_report.categories)
        if (c.k) o.require(within(c.sum_m_actual, c.pool, 1e-6), "round did not spend pool of " + c.category);
    o.note("max |sum M - D| " + fmt(worst, 3));
    return o;
}

// ------------------------------------------------------------------ 5

Outcome lambda_suite() {
    Outcome o;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ku(1.0, 1000.0);
    double worst_k1 = 0.0, worst_inf = 0.0, worst_bound = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto l = qftest::random_ledger(rng);
        const double n = static_cast<double>(l.contributor_count());
        worst_k1 = std::max(worst_k1, std::abs(lambda_p(l, 1.0) - 1.0));
        worst_inf = std::max(worst_inf, std::abs(lambda_p(l, 1e9) - n));
        const double k = ku(rng);
        worst_bound = std::max(worst_bound, lambda_lower_bound(l, k) - lambda_p(l, k));
    }
    o.require(worst_k1 <= 1e-9, "lambda(k=1) off by " + fmt(worst_k1));
    o.require(worst_inf <= 1e-5, "lambda(k=1e9) off by " + fmt(worst_inf));
    o.require(worst_bound <= 1e-9, "bound exceeded by " + fmt(worst_bound));

    const auto profiles = default_ratio_profiles();
    const auto grid = linear_grid(1.0, 20.0, 100);
    const auto pts = k_sweep(profiles, grid);
    const std::size_t g = grid.size();
    int misordered = 0;
    for (std::size_t i = 0; i < g; ++i) {
        if (!(grid[i] > 1.0)) continue;
        if (!(pts[i].lambda_p >= pts[g + i].lambda_p && pts[g + i].lambda_p >= pts[2 * g + i].lambda_p)) ++misordered;
    }
    o.require(misordered == 0, std::to_string(misordered) + " grid points out of order");

    const std::vector<double> ones{1, 1};
    const double spot = lambda_p(ones, 2.0);
    o.require(within(spot, 4.0 / 3.0, 1e-12), "lambda((1,1),2) = " + fmt(spot, 17));
    o.note("lambda((1,1),2)=" + fmt(spot, 15));
    return o;
}

// ------------------------------------------------------------------ 6

Outcome collusion_numbers() {
    Outcome o;
    const double a1 = alpha_star(25);
    o.require(a1 == 0.2, "alpha*(25) = " + fmt(a1, 17));
    const double a2 = alpha_double_star(25, 20.0);
    o.require(within(a2, 0.5918, 0.0005), "alpha**(25,20) = " + fmt(a2));
    o.require(std::lround(a2 * 10.0) * 10 == 60, "alpha** does not round to 60%");
    const double r = trigger_threshold();
    o.require(within(r, 1.0938, 1e-4), "r* = " + fmt(r));
    double worst = 0.0;
    for (int n : {2, 10, 25, 100})
        for (double k : {1.0, 2.0, 20.0, 30.0})
            worst = std::max(worst, std::abs(ring_payoff(n, alpha_double_star(n, k), k, 1.0)));
    o.require(worst <= 1e-9, "ring payoff at root " + fmt(worst));
    o.note("alpha**=" + fmt(a2, 6) + ", r*=" + fmt(r, 6));
    return o;
}

// ------------------------------------------------------------------ 7

std::vector<Valuation> random_valuations(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nc(2, 5), np(1, 3), fam(0, 1);
    std::uniform_real_distribution<double> scale(0.5, 5.0), keep(0.0, 1.0);
    const int c = nc(rng), p = np(rng);
    std::vector<Valuation> vs;
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < c; ++i)
            if (i == 0 || keep(rng) < 0.8)
                vs.push_back({"c" + std::to_string(i), "p" + std::to_string(j),
                              fam(rng) ? ValuationFamily::Log : ValuationFamily::Sqrt, scale(rng)});
    return vs;
}

Outcome equilibrium_limits() {
    Outcome o;
    std::mt19937_64 rng(7);
    double worst_k1 = 0.0, worst_private = 0.0;
    int unconverged = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto vs = random_valuations(rng);
        const auto r1 = best_response(vs, 1.0);
        unconverged += !r1.converged;
        for (const auto& [p, agg] : r1.aggregate_marginal)
            if (r1.funds.at(p) > 0.0) worst_k1 = std::max(worst_k1, std::abs(agg - 1.0));
        const auto rinf = best_response(vs, 1e9);
        unconverged += !rinf.converged;
        for (const auto& v : vs)
            if (rinf.contributions.at({v.contributor_id, v.project_id}) > 0.0)
                worst_private = std::max(worst_private, std::abs(v.marginal(rinf.funds.at(v.project_id)) - 1.0));
    }
    o.require(worst_k1 <= 1e-4, "k=1 aggregate marginal off by " + fmt(worst_k1));
    o.require(worst_private <= 1e-4, "k=1e9 private condition off by " + fmt(worst_private));

    // Per-contributor monotonicity in k on general random instances.
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) grid.push_back(1.0 + i);
    int violating_instances = 0, violating_entries = 0, funds_violations = 0, total_violations = 0;
    double largest_rise = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto vs = random_valuations(rng);
        std::map<EntryKey, double> prev;
        std::map<std::string, double> prev_funds;
        double prev_total = -1.0;
        bool bad = false;
        for (double k : grid) {
            const auto r = best_response(vs, k);
            unconverged += !r.converged;
            for (const auto& [key, c] : r.contributions) {
                auto it = prev.find(key);
                if (it != prev.end() && c > it->second * (1.0 + 1e-9) + 1e-12) {
                    ++violating_entries;
                    largest_rise = std::max(largest_rise, c - it->second);
                    bad = true;
                }
                prev[key] = c;
            }
            double total = 0.0;
            for (const auto& [key, c] : r.contributions) total += c;
            if (prev_total >= 0.0 && total > prev_total * (1.0 + 1e-9) + 1e-12) ++total_violations;
            prev_total = total;
            for (const auto& [p, f] : r.funds) {
                auto it = prev_funds.find(p);
                if (it != prev_funds.end() && f > it->second * (1.0 + 1e-9) + 1e-12) ++funds_violations;
                prev_funds[p] = f;
            }
        }
        violating_instances += bad;
    }
    o.require(unconverged == 0, std::to_string(unconverged) + " solves did not converge");
    o.require(violating_instances == 0, "per-contributor contributions rose with k in " +
                                            std::to_string(violating_instances) + "/50 instances (" +
                                            std::to_string(violating_entries) + " steps, largest rise " +
                                            fmt(largest_rise, 4) + ")");
    o.note("total contributions rose with k in " + std::to_string(total_violations) + " steps");
    o.note("project funds rose with k in " + std::to_string(funds_violations) + " steps");
    return o;
}

// ------------------------------------------------------------------ 8

Outcome planner_checks() {
    Outcome o;
    const std::vector<Valuation> sym{{"a", "x", ValuationFamily::Sqrt, 3.0},
                                     {"b", "x", ValuationFamily::Log, 2.0},
                                     {"a", "y", ValuationFamily::Sqrt, 3.0},
                                     {"b", "y", ValuationFamily::Log, 2.0}};
    const double d = 37.0;
    const auto r = planner_optimum(sym, d);
    o.require(within(r.funds.at("x"), d / 2, 1e-8) && within(r.funds.at("y"), d / 2, 1e-8),
              "symmetric split " + fmt(r.funds.at("x"), 15) + "/" + fmt(r.funds.at("y"), 15));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> pool(1.0, 100.0);
    int worse = 0, checked = 0;
    const std::map<EntryKey, double> none;
    for (int trial = 0; trial < 100; ++trial) {
        const auto vs = random_valuations(rng);
        const double dd = pool(rng);
        const auto p = planner_optimum(vs, dd);
        const double eps = 1e-3 * dd;
        for (const auto& [a, fa] : p.funds)
            for (const auto& [b, fb] : p.funds) {
                if (a == b || fb < eps) continue;
                auto moved = p.funds;
                moved[a] += eps;
                moved[b] -= eps;
                ++checked;
                if (welfare(vs, moved, none) > p.welfare) ++worse;
            }
    }
    o.require(worse == 0, std::to_string(worse) + " perturbations raised welfare");
    o.note(std::to_string(checked) + " perturbations");
    return o;
}

// ------------------------------------------------------------------ 9

std::string serialize(const RoundTrajectory& t) {
    std::ostringstream os;
    write_panel(os, t);
    write_k_series(os, t);
    write_lambda_series(os, t);
    write_deficits(os, deficit_curve(t));
    os << to_json(t.final_report).dump();
    return os.str();
}

// Honest agents best-responding on three projects; a few fixed backers
// open the round so k is published from day one.
SimulationSetup response_setup(double pool, std::uint64_t seed) {
    SimulationSetup s;
    s.config.duration_days = 20;
    s.config.seed = seed;
    s.config.categories.push_back({"Main", pool, {"p0", "p1", "p2"}});
    for (int i = 0; i < 6; ++i) {
        AgentSpec a;
        a.id = "seed" + std::to_string(i);
        a.budget = 4.0;
        a.fixed_amount = 4.0;
        a.valuations = {{"p" + std::to_string(i % 3), ValuationFamily::Sqrt, 1.0}};
        s.agents.push_back(std::move(a));
    }
    std::mt19937_64 rng(99); // valuations are fixed across seeds and pools
    std::uniform_real_distribution<double> scale(2.0, 8.0);
    for (int i = 0; i < 24; ++i) {
        AgentSpec a;
        a.id = "h" + std::to_string(i);
        a.budget = 50.0;
        a.activity = 0.25;
        a.valuations = {{"p" + std::to_string(i % 3), i % 2 ? ValuationFamily::Log : ValuationFamily::Sqrt, scale(rng)},
                        {"p" + std::to_string((i + 1) % 3), ValuationFamily::Sqrt, scale(rng) / 2}};
        s.agents.push_back(std::move(a));
    }
    // Seed backers alone: two per project at 4 each, so sum M = 3 * 8 = 24.
    s.config.prior_k = 24.0 / pool;
    return s;
}

Outcome simulator_checks() {
    Outcome o;
    const auto fixture = load_simulation(std::filesystem::path(QFUND_FIXTURES) / "simulate.json");
    const auto a = run_round(fixture.config, fixture.agents);
    const auto b = run_round(fixture.config, fixture.agents);
    o.require(serialize(a) == serialize(b), "trajectories differ for the same seed");

    int decreases = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto cfg = fixture.config;
        cfg.seed = seed;
        const auto t = run_round(cfg, fixture.agents);
        std::set<int> events;
        for (const auto& e : cfg.pool_events) events.insert(e.day);
        std::map<std::string, std::optional<double>> last;
        for (const auto& d : t.days)
            for (const auto& [cat, cd] : d.categories) {
                auto& prev = last[cat];
                if (!events.count(d.day) && prev && cd.k_open && *cd.k_open < *prev) ++decreases;
                if (cd.k_open && cd.k_close && *cd.k_close < *cd.k_open) ++decreases;
                prev = cd.k_close;
            }
    }
    o.require(decreases == 0, std::to_string(decreases) + " k decreases between events");

    // Exact (n^2 - n) c deficits.
    RoundConfig cfg;
    std::vector<AgentSpec> agents;
    std::vector<std::string> projects;
    for (int p = 1; p <= 15; ++p) {
        const std::string id = "p" + std::to_string(p);
        projects.push_back(id);
        for (int i = 0; i < p; ++i) {
            AgentSpec ag;
            ag.id = id + "_" + std::to_string(i);
            ag.budget = 3.0;
            ag.fixed_amount = 3.0;
            ag.valuations = {{id, ValuationFamily::Sqrt, 1.0}};
            agents.push_back(std::move(ag));
        }
    }
    cfg.categories.push_back({"All", 100.0, projects});
    const auto curve = deficit_curve(run_round(cfg, agents));
    o.require(curve.fit && curve.fit->r2 > 0.99, "deficit fit R^2 " + (curve.fit ? fmt(curve.fit->r2) : "n/a"));

    // Honest response to the initial k across seeds.
    const std::vector<double> pools{240.0, 120.0, 48.0, 24.0, 12.0, 6.0};
    std::vector<double> means;
    for (double pool : pools) {
        double total = 0.0;
        int count = 0;
        for (std::uint64_t seed = 0; seed < 24; ++seed) {
            const auto s = response_setup(pool, seed);
            const auto t = run_round(s.config, s.agents);
            for (const auto& [id, spent] : t.agent_totals)
                if (id[0] == 'h') {
                    total += spent;
                    ++count;
                }
        }
        means.push_back(total / count);
    }
    bool nonincreasing = true;
    for (std::size_t i = 1; i < means.size(); ++i) nonincreasing = nonincreasing && means[i] <= means[i - 1];
    std::string series;
    for (std::size_t i = 0; i < means.size(); ++i)
        series += (i ? "," : "") + fmt(24.0 / pools[i], 3) + ":" + fmt(means[i], 4);
    o.require(nonincreasing, "honest means not monotone (" + series + ")");
    o.note("k0:mean " + series);
    return o;
}

// ------------------------------------------------------------------ 10

struct SyntheticGraph {
    std::vector<Contribution> contributions;
    TeamRoster roster;
};

// Each project backs `outdegree` others chosen uniformly, never one that
// already backs it; each backed project returns the favour with probability
// `reciprocate`.
SyntheticGraph synthetic_graph(std::uint64_t seed, int projects, int max_out, double reciprocate,
                               const std::vector<std::pair<std::string, double>>& categories) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> outdeg(1, max_out), target(0, projects - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::string> cat(projects);
    for (int p = 0; p < projects; ++p) {
        double x = u(rng), acc = 0.0;
        cat[p] = categories.back().first;
        for (const auto& [name, share] : categories)
            if (x < (acc += share)) {
                cat[p] = name;
                break;
            }
    }
    auto key = [projects](int a, int b) { return static_cast<std::uint64_t>(a) * projects + b; };
    std::unordered_set<std::uint64_t> edges;
    std::vector<std::pair<int, int>> initiated;
    for (int a = 0; a < projects; ++a) {
        const int d = outdeg(rng);
        int made = 0;
        for (int attempts = 0; made < d && attempts < 100 * d; ++attempts) {
            const int b = target(rng);
            if (b == a || edges.count(key(a, b)) || edges.count(key(b, a))) continue;
            edges.insert(key(a, b));
            initiated.emplace_back(a, b);
            ++made;
        }
    }
    std::vector<std::pair<int, int>> all = initiated;
    for (const auto& [a, b] : initiated)
        if (u(rng) < reciprocate) all.emplace_back(b, a);

    SyntheticGraph g;
    for (int p = 0; p < projects; ++p) {
        const std::string id = "p" + std::to_string(p);
        g.roster.members[id] = {"m" + std::to_string(p)};
        g.contributions.push_back({"donor", id, 1.0, 0, cat[p]});
    }
    for (const auto& [a, b] : all)
        g.contributions.push_back({"m" + std::to_string(a), "p" + std::to_string(b), 1.0, 0, cat[b]});
    return g;
}

Outcome forensics() {
    Outcome o;
    std::vector<double> slopes;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto g = synthetic_graph(seed, 3000, 200, 0.2, {{"x", 1.0}});
        const auto r = reciprocity_stats(build_graph(g.contributions, g.roster));
        slopes.push_back(r.slope.value_or(-1.0));
    }
    std::string s;
    for (double v : slopes) {
        o.require(within(v, 0.2, 0.02), "slope " + fmt(v));
        s += (s.empty() ? "" : ",") + fmt(v, 4);
    }
    o.note("slopes " + s);

    const std::vector<std::pair<std::string, double>> cats{{"Community", 0.34}, {"Tech", 0.46}, {"Media", 0.20}};
    std::map<std::string, std::vector<double>> gaps;
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        const auto g = synthetic_graph(seed, 1000, 40, 0.2, cats);
        for (const auto& row : cross_category_stats(build_graph(g.contributions, g.roster)))
            gaps[row.category].push_back(row.cross_share - row.outside_share);
    }
    // Gate on the benchmark row (34% of projects, as in the fixture); the
    // other rows are reported only, since three 2SE checks would fail by
    // chance about one run in seven.
    for (const auto& [cat, v] : gaps) {
        const double m = stats::mean(v);
        const double se = stats::sample_stdev(v) / std::sqrt(static_cast<double>(v.size()));
        if (cat == "Community")
            o.require(std::abs(m) <= 2.0 * se, "null model gap " + fmt(m, 3) + " vs 2SE " + fmt(2 * se, 3));
        o.note(cat + " gap " + fmt(m, 2) + " (z " + fmt(m / se, 2) + ")");
    }

    const std::filesystem::path dir = std::filesystem::path(QFUND_FIXTURES) / "community";
    const auto g = build_graph(load_contributions(dir / "contributions.csv").records, load_roster(dir / "teams.csv"));
    bool found = false;
    for (const auto& row : cross_category_stats(g))
        if (row.category == "Community") {
            found = true;
            o.require(row.outside_share == 0.66 && row.cross_share == 0.71,
                      "community fixture gives (" + fmt(row.outside_share, 17) + ", " + fmt(row.cross_share, 17) + ")");
        }
    o.require(found, "community row missing");
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double time_limit_s; // 0: none stated
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "quadratic scaling of the matching requirement", 1.0, quadratic_scaling},
        {2, "variance decomposition identity", 5.0, decomposition_identity},
        {3, "correlated shares maximise the requirement (grid 0.05)", 30.0, correlation_brute_force},
        {4, "budget balance and pool-event k factor", 0.0, budget_balance},
        {5, "lambda_p limits, bound, sweep ordering, spot value", 0.0, lambda_suite},
        {6, "collusion thresholds", 0.0, collusion_numbers},
        {7, "equilibrium limits and monotonicity in k", 60.0, equilibrium_limits},
        {8, "planner split and perturbation optimality", 0.0, planner_checks},
        {9, "simulator determinism, k path, deficits, honest response", 0.0, simulator_checks},
        {10, "reciprocity slope, null model, community fixture", 0.0, forensics},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit_s > 0.0) o.require(secs < c.time_limit_s, "took " + fmt(secs, 3) + " s");
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.name << " [" << fmt(secs, 3)
                  << " s] " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
