#include "qfund/equilibrium.hpp"

#include "qfund/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qf {

const char* to_string(ValuationFamily f) {
    return f == ValuationFamily::Sqrt ? "sqrt" : "log";
}

ValuationFamily parse_family(const std::string& s) {
    if (s == "sqrt") return ValuationFamily::Sqrt;
    if (s == "log") return ValuationFamily::Log;
    throw DomainError("unknown valuation family '" + s + "' (expected sqrt or log)");
}

double Valuation::value(double funds) const {
    if (funds <= 0.0) return 0.0;
    return family == ValuationFamily::Sqrt ? scale * std::sqrt(funds) : scale * std::log1p(funds);
}

double Valuation::marginal(double funds) const {
    if (family == ValuationFamily::Sqrt)
        return funds > 0.0 ? scale / (2.0 * std::sqrt(funds)) : std::numeric_limits<double>::infinity();
    return scale / (1.0 + std::max(funds, 0.0));
}

double cqf_funds(double sqrt_sum, double total, double k) {
    return sqrt_sum * sqrt_sum / k + (1.0 - 1.0 / k) * total;
}

namespace {

void check_k(double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("k must be positive and finite");
}

void check_valuation(const Valuation& v) {
    if (!(v.scale > 0.0) || !std::isfinite(v.scale))
        throw DomainError("valuation scale must be positive for " + v.contributor_id + "/" + v.project_id);
}

// g(x) = V'(F(x^2)) * bracket(x) - price, decreasing in x = sqrt(c).
double foc_gap(const Valuation& v, double x, double a, double b, double k, double price) {
    const double s = a + x;
    const double f = cqf_funds(s, b + x * x, k);
    const double bracket = (s / x) / k + 1.0 - 1.0 / k;
    return v.marginal(f) * bracket - price;
}

} // namespace

double best_response_amount(const Valuation& v, double a, double b, double k, double price) {
    check_k(k);
    a = std::max(a, 0.0);
    b = std::max(b, 0.0);
    if (a == 0.0) {
        // Nobody else contributes: the bracket is 1 at every x.
        if (v.marginal(0.0) <= price) return 0.0;
    }

    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; foc_gap(v, hi, a, b, k, price) > 0.0; ++i) {
        if (i > 2000) throw DomainError("best response: no upper bracket for " + v.contributor_id);
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 400 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (foc_gap(v, mid, a, b, k, price) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double x = 0.5 * (lo + hi);
    return x * x;
}

double foc_residual(const Valuation& v, double own, double a, double b, double k) {
    if (!(own > 0.0)) throw DomainError("foc_residual needs a positive contribution");
    return foc_gap(v, std::sqrt(own), a, b, k, 1.0);
}

namespace {

struct Entry {
    const Valuation* valuation;
    std::size_t project;
    std::size_t contributor;
    double amount = 0.0;
};

struct Problem {
    std::vector<std::string> projects;
    std::vector<std::string> contributors;
    std::vector<Entry> entries;
    std::vector<std::vector<std::size_t>> by_project;
    std::vector<std::vector<std::size_t>> by_contributor;
};

Problem index_problem(std::span<const Valuation> valuations) {
    Problem p;
    std::map<std::string, std::size_t> project_ix;
    std::map<std::string, std::size_t> contributor_ix;
    std::set<EntryKey> seen;
    for (const auto& v : valuations) {
        check_valuation(v);
        if (!seen.insert({v.contributor_id, v.project_id}).second)
            throw DomainError("duplicate valuation for " + v.contributor_id + "/" + v.project_id);
        auto [pit, pnew] = project_ix.try_emplace(v.project_id, p.projects.size());
        if (pnew) {
            p.projects.push_back(v.project_id);
            p.by_project.emplace_back();
        }
        auto [cit, cnew] = contributor_ix.try_emplace(v.contributor_id, p.contributors.size());
        if (cnew) {
            p.contributors.push_back(v.contributor_id);
            p.by_contributor.emplace_back();
        }
        p.by_project[pit->second].push_back(p.entries.size());
        p.by_contributor[cit->second].push_back(p.entries.size());
        p.entries.push_back(Entry{&v, pit->second, cit->second, 0.0});
    }
    return p;
}

// Others' (sqrt sum, total) on the entry's project, summed directly to avoid
// cancellation when the entry dominates.
std::pair<double, double> others_of(const Problem& p, std::size_t e) {
    double a = 0.0, b = 0.0;
    for (std::size_t j : p.by_project[p.entries[e].project]) {
        if (j == e) continue;
        a += std::sqrt(p.entries[j].amount);
        b += p.entries[j].amount;
    }
    return {a, b};
}

// Best response of one contributor across all of their projects, with an
// optional shared budget enforced through a common shadow price.
std::vector<double> contributor_response(const Problem& p, std::size_t contributor, double k, double budget,
                                         bool& clamped) {
    const auto& ids = p.by_contributor[contributor];
    std::vector<std::pair<double, double>> others;
    others.reserve(ids.size());
    for (std::size_t e : ids) others.push_back(others_of(p, e));

    auto respond = [&](double price) {
        std::vector<double> out;
        out.reserve(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i)
            out.push_back(best_response_amount(*p.entries[ids[i]].valuation, others[i].first, others[i].second, k,
                                               price));
        return out;
    };
    auto total_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    };

    clamped = false;
    auto unconstrained = respond(1.0);
    if (!std::isfinite(budget) || total_of(unconstrained) <= budget) return unconstrained;

    clamped = true;
    double lo = 0.0;
    double hi = 1.0;
    while (total_of(respond(1.0 + hi)) > budget) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw DomainError("budget shadow price diverged for " + p.contributors[contributor]);
    }
    for (int i = 0; i < 200 && hi - lo > 1e-14 * (1.0 + hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (total_of(respond(1.0 + mid)) > budget)
            lo = mid;
        else
            hi = mid;
    }
    auto out = respond(1.0 + hi);
    // Bisection lands on the feasible side; trim rounding so the budget holds exactly.
    const double t = total_of(out);
    if (t > budget && t > 0.0)
        for (double& x : out) x *= budget / t;
    return out;
}

} // namespace

EquilibriumResult best_response(std::span<const Valuation> valuations, double k, const EquilibriumOptions& options) {
    check_k(k);
    if (valuations.empty()) throw DomainError("best_response: no valuations");
    if (!(options.damping > 0.0 && options.damping <= 1.0)) throw DomainError("damping must be in (0, 1]");

    Problem p = index_problem(valuations);
    std::vector<double> budgets(p.contributors.size(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < p.contributors.size(); ++c) {
        auto it = options.budgets.find(p.contributors[c]);
        if (it == options.budgets.end()) continue;
        if (!(it->second >= 0.0)) throw DomainError("budget must be nonnegative for " + p.contributors[c]);
        budgets[c] = it->second;
    }

    EquilibriumResult result;
    result.k = k;
    std::vector<bool> clamped(p.contributors.size(), false);

    // Start from everyone's stand-alone response.
    for (std::size_t c = 0; c < p.contributors.size(); ++c) {
        const auto& ids = p.by_contributor[c];
        double spent = 0.0;
        for (std::size_t e : ids) {
            double x = best_response_amount(*p.entries[e].valuation, 0.0, 0.0, k);
            x = std::min(x, std::max(budgets[c] - spent, 0.0));
            p.entries[e].amount = x;
            spent += x;
        }
    }

    for (int iter = 1; iter <= options.max_iter; ++iter) {
        std::vector<double> next(p.entries.size());
        for (std::size_t c = 0; c < p.contributors.size(); ++c) {
            bool was_clamped = false;
            const auto resp = contributor_response(p, c, k, budgets[c], was_clamped);
            clamped[c] = was_clamped;
            const auto& ids = p.by_contributor[c];
            for (std::size_t i = 0; i < ids.size(); ++i) next[ids[i]] = resp[i];
        }
        double change = 0.0;
        for (std::size_t e = 0; e < p.entries.size(); ++e) {
            const double old = p.entries[e].amount;
            const double upd = (1.0 - options.damping) * old + options.damping * next[e];
            change = std::max(change, std::abs(upd - old) / std::max(1.0, old));
            p.entries[e].amount = upd;
        }
        result.iterations = iter;
        if (change <= options.tolerance) {
            result.converged = true;
            break;
        }
    }

    for (auto& e : p.entries)
        if (e.amount < options.zero_floor) e.amount = 0.0;

    std::map<std::string, double> funds;
    for (std::size_t pj = 0; pj < p.projects.size(); ++pj) {
        double s = 0.0, t = 0.0;
        for (std::size_t e : p.by_project[pj]) {
            s += std::sqrt(p.entries[e].amount);
            t += p.entries[e].amount;
        }
        const double f = cqf_funds(s, t, k);
        funds[p.projects[pj]] = f;
        double agg = 0.0;
        for (std::size_t e : p.by_project[pj]) agg += p.entries[e].valuation->marginal(f);
        result.aggregate_marginal[p.projects[pj]] = agg;
    }
    for (const auto& e : p.entries) {
        EntryKey key{e.valuation->contributor_id, e.valuation->project_id};
        result.contributions[key] = e.amount;
        if (clamped[e.contributor]) result.clamped.insert(key);
    }
    result.funds = std::move(funds);
    result.welfare = welfare(valuations, result.funds, result.contributions);
    return result;
}

EndogenousKResult solve_with_endogenous_k(std::span<const Valuation> valuations, double pool,
                                          const EquilibriumOptions& options, double initial_k) {
    if (!(pool > 0.0)) throw DomainError("pool must be positive");
    check_k(initial_k);
    EndogenousKResult out;
    out.k = initial_k;
    for (int outer = 1; outer <= 1000; ++outer) {
        out.equilibrium = best_response(valuations, out.k, options);
        std::map<std::string, std::pair<double, double>> sums; // project -> (sqrt sum, sum sqrt^2)
        for (const auto& [key, c] : out.equilibrium.contributions) {
            auto& [s, q] = sums[key.second];
            s += std::sqrt(c);
            q += c;
        }
        double required = 0.0;
        for (const auto& [project, sq] : sums) required += sq.first * sq.first - sq.second;
        if (!(required > 0.0)) throw NoMatchableProjects();
        const double next = 0.5 * out.k + 0.5 * (required / pool);
        const double delta = std::abs(next - out.k);
        out.k = next;
        out.outer_iterations = outer;
        if (delta < 1e-6) {
            out.converged = true;
            out.equilibrium = best_response(valuations, out.k, options);
            break;
        }
    }
    return out;
}

namespace {

struct PlannerProject {
    std::string id;
    double sqrt_scale = 0.0; // sum of scales of sqrt-family valuations
    double log_scale = 0.0;

    double aggregate_marginal(double f) const {
        double m = log_scale / (1.0 + f);
        if (sqrt_scale > 0.0) m += f > 0.0 ? sqrt_scale / (2.0 * std::sqrt(f)) : std::numeric_limits<double>::infinity();
        return m;
    }

    // Funds at which the aggregate marginal value equals lambda.
    double funds_at(double lambda) const {
        if (log_scale == 0.0) {
            const double r = sqrt_scale / (2.0 * lambda);
            return r * r;
        }
        if (sqrt_scale == 0.0) return std::max(0.0, log_scale / lambda - 1.0);
        if (aggregate_marginal(0.0) <= lambda) return 0.0;
        double lo = 0.0, hi = 1.0;
        while (aggregate_marginal(hi) > lambda) {
            lo = hi;
            hi *= 2.0;
        }
        for (int i = 0; i < 300 && hi - lo > 1e-15 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (aggregate_marginal(mid) > lambda ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
};

} // namespace

PlannerResult planner_optimum(std::span<const Valuation> valuations, double pool) {
    if (!(pool > 0.0) || !std::isfinite(pool)) throw DomainError("pool must be positive");
    if (valuations.empty()) throw DomainError("planner_optimum: no valuations");

    std::vector<PlannerProject> projects;
    std::map<std::string, std::size_t> ix;
    for (const auto& v : valuations) {
        check_valuation(v);
        auto [it, inserted] = ix.try_emplace(v.project_id, projects.size());
        if (inserted) projects.push_back(PlannerProject{v.project_id});
        (v.family == ValuationFamily::Sqrt ? projects[it->second].sqrt_scale : projects[it->second].log_scale) +=
            v.scale;
    }

    auto spend = [&](double lambda) {
        double s = 0.0;
        for (const auto& pr : projects) s += pr.funds_at(lambda);
        return s;
    };

    // Total spend is decreasing in lambda; bracket then bisect geometrically.
    double lo = 1.0, hi = 1.0;
    int guard = 0;
    while (spend(lo) < pool) {
        lo *= 0.5;
        if (++guard > 4000) throw DomainError("planner: no lower bracket for lambda");
    }
    guard = 0;
    while (spend(hi) > pool) {
        hi *= 2.0;
        if (++guard > 4000) throw DomainError("planner: no upper bracket for lambda");
    }

    PlannerResult out;
    double lambda = std::sqrt(lo * hi);
    for (int i = 0; i < 500; ++i) {
        lambda = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
        const double s = spend(lambda);
        out.iterations = i + 1;
        if (std::abs(s - pool) <= 1e-13 * pool || hi - lo <= 1e-16 * hi) break;
        (s > pool ? lo : hi) = lambda;
    }

    out.common_marginal = lambda;
    for (const auto& pr : projects) out.funds[pr.id] = pr.funds_at(lambda);
    for (const auto& v : valuations) out.welfare += v.value(out.funds[v.project_id]);
    return out;
}

double welfare(std::span<const Valuation> valuations, const std::map<std::string, double>& funds,
               const std::map<EntryKey, double>& contributions) {
    double w = 0.0;
    for (const auto& v : valuations) {
        auto it = funds.find(v.project_id);
        if (it == funds.end()) throw DomainError("welfare: no funds entry for project " + v.project_id);
        w += v.value(it->second);
    }
    for (const auto& [key, c] : contributions) w -= c;
    return w;
}

} // namespace qf
