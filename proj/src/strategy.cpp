#include "qfund/strategy.hpp"

#include "qfund/errors.hpp"
#include "qfund/text.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qf {

PayoffMatrix payoff_matrix(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("payoff_matrix: c must be positive");
    PayoffMatrix m;
    m.c = c;
    const double sucker = -c / 2.0;
    const double temptation = c * (1.0 + 2.0 * std::sqrt(2.0)) / 2.0;
    m.entries[0][0] = {c, c};
    m.entries[0][1] = {sucker, temptation};
    m.entries[1][0] = {temptation, sucker};
    m.entries[1][1] = {0.0, 0.0};
    return m;
}

std::vector<std::pair<Action, Action>> pure_nash_equilibria(const PayoffMatrix& m) {
    const Action acts[] = {Action::Invest, Action::DoNotInvest};
    std::vector<std::pair<Action, Action>> out;
    for (Action r : acts) {
        for (Action c : acts) {
            bool row_best = true, col_best = true;
            for (Action alt : acts) {
                if (m.at(alt, c).first > m.at(r, c).first) row_best = false;
                if (m.at(r, alt).second > m.at(r, c).second) col_best = false;
            }
            if (row_best && col_best) out.emplace_back(r, c);
        }
    }
    return out;
}

double trigger_threshold() {
    return 2.0 / (2.0 * std::sqrt(2.0) - 1.0);
}

bool trigger_sustainable(double r) {
    if (!(r > 0.0)) throw DomainError("discount rate must be positive");
    // 1 + 1/r >= (1 + 2 sqrt 2)/2  <=>  r <= 2 / (2 sqrt 2 - 1)
    return r <= trigger_threshold();
}

double alpha_star(int n) {
    if (n < 2) throw DomainError("ring size must be at least 2");
    return 1.0 / std::sqrt(static_cast<double>(n));
}

double alpha_double_star(int n, double k) {
    if (n < 2) throw DomainError("ring size must be at least 2");
    if (!(k >= 1.0) || !std::isfinite(k)) throw DomainError("alpha_double_star needs k >= 1");
    const double a = static_cast<double>(n) / k;
    const double b = 1.0 - 1.0 / k;
    // k(-b + sqrt(b^2 + 4a)) / (2n), rationalised so b > 0 does not cancel.
    return 2.0 / (b + std::sqrt(b * b + 4.0 * a));
}

double ring_payoff(int n, double alpha, double k, double c) {
    if (n < 2) throw DomainError("ring size must be at least 2");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must be in (0, 1]");
    if (!(k > 0.0)) throw DomainError("k must be positive");
    if (!(c > 0.0)) throw DomainError("c must be positive");
    const double nn = static_cast<double>(n);
    const double target = alpha * alpha * nn * c; // (alpha n sqrt(c/n))^2
    const double private_total = alpha * c;
    const double funds = (target - private_total) / k + private_total;
    return funds - c;
}

CollusionThresholds collusion_thresholds(int n, double k) {
    return CollusionThresholds{n, k, alpha_star(n), alpha_double_star(n, k)};
}

std::vector<CollusionThresholds> threshold_sweep(const std::vector<int>& ns, const std::vector<double>& ks) {
    std::vector<CollusionThresholds> out;
    for (int n : ns)
        for (double k : ks) out.push_back(collusion_thresholds(n, k));
    return out;
}

std::vector<double> ring_round_payoffs(int n, double k, double c, const std::vector<bool>& cooperate) {
    if (n < 2 || static_cast<int>(cooperate.size()) != n) throw DomainError("ring_round_payoffs: bad ring size");
    if (!(k > 0.0) || !(c > 0.0)) throw DomainError("ring_round_payoffs: k and c must be positive");
    const double share = c / n;
    const auto cooperators = static_cast<double>(std::count(cooperate.begin(), cooperate.end(), true));
    std::vector<double> out(n);
    for (int j = 0; j < n; ++j) {
        double s = cooperators * std::sqrt(share);
        double total = cooperators * share;
        if (!cooperate[j]) {
            s += std::sqrt(c);
            total += c;
        }
        const double funds = (s * s - total) / k + total;
        out[j] = funds - c;
    }
    return out;
}

namespace {

struct Policy {
    enum Kind { Trigger, AlwaysCooperate, AlwaysDefect, DeviateAt, Random } kind = Trigger;
    int deviate_round = 0;
    double probability = 0.0;
};

Policy parse_policy(const std::string& s) {
    if (s == "trigger") return {Policy::Trigger};
    if (s == "always_cooperate") return {Policy::AlwaysCooperate};
    if (s == "always_defect") return {Policy::AlwaysDefect};
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
        const auto head = s.substr(0, colon);
        const auto arg = std::string_view(s).substr(colon + 1);
        if (head == "deviate_at") {
            Policy p{Policy::DeviateAt};
            if (text::parse_int(arg, p.deviate_round) && p.deviate_round >= 0) return p;
        } else if (head == "random") {
            Policy p{Policy::Random};
            if (text::parse_double(arg, p.probability) && p.probability >= 0.0 && p.probability <= 1.0) return p;
        }
    }
    throw DomainError("invalid policy '" + s + "'");
}

} // namespace

RepeatedGameTrajectory repeated_game_simulate(const RepeatedGameConfig& cfg) {
    const int n = cfg.players;
    if (n < 2) throw DomainError("repeated game needs at least 2 players");
    if (!(cfg.discount_rate > 0.0)) throw DomainError("discount rate must be positive");
    if (cfg.horizon < 0) throw DomainError("horizon must be nonnegative");
    if (cfg.continuation_probability &&
        !(*cfg.continuation_probability >= 0.0 && *cfg.continuation_probability < 1.0))
        throw DomainError("continuation probability must be in [0, 1)");

    std::vector<Policy> policies;
    if (cfg.policies.empty()) {
        policies.assign(n, Policy{Policy::Trigger});
    } else if (cfg.policies.size() == 1) {
        policies.assign(n, parse_policy(cfg.policies.front()));
    } else if (static_cast<int>(cfg.policies.size()) == n) {
        for (const auto& s : cfg.policies) policies.push_back(parse_policy(s));
    } else {
        throw DomainError("need one policy or one per player");
    }

    const bool unbounded = cfg.horizon == 0 && !cfg.continuation_probability;
    int settle_after = 0;
    for (const auto& p : policies) {
        if (unbounded && p.kind == Policy::Random)
            throw DomainError("random policies need a horizon or a continuation probability");
        if (p.kind == Policy::DeviateAt) settle_after = std::max(settle_after, p.deviate_round + 1);
    }

    std::mt19937_64 rng(cfg.seed);
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    RepeatedGameTrajectory out;
    out.present_value.assign(n, 0.0);
    bool triggered = false; // grim trigger: any defection ends cooperation for trigger players
    double discount = 1.0;
    const int cap = 1'000'000;

    for (int t = 0; t < cap; ++t) {
        std::vector<bool> coop(n);
        for (int i = 0; i < n; ++i) {
            const auto& p = policies[i];
            switch (p.kind) {
            case Policy::Trigger: coop[i] = !triggered; break;
            case Policy::AlwaysCooperate: coop[i] = true; break;
            case Policy::AlwaysDefect: coop[i] = false; break;
            case Policy::DeviateAt: coop[i] = !triggered && t < p.deviate_round; break;
            case Policy::Random: coop[i] = uniform() < p.probability; break;
            }
        }
        auto pay = ring_round_payoffs(n, cfg.k, cfg.c, coop);
        for (int i = 0; i < n; ++i) out.present_value[i] += pay[i] * discount;
        const bool any_defect = std::find(coop.begin(), coop.end(), false) != coop.end();
        const bool state_repeats = !out.cooperation.empty() && out.cooperation.back() == coop &&
                                   (triggered || !any_defect);
        triggered = triggered || any_defect;
        out.payoffs.push_back(pay);
        out.cooperation.push_back(coop);
        discount /= 1.0 + cfg.discount_rate;

        if (unbounded) {
            if (t + 1 >= settle_after && state_repeats) {
                // Stationary from here on: add sum_{s > t} pay / (1+r)^s in closed form.
                const double tail = discount * (1.0 + cfg.discount_rate) / cfg.discount_rate;
                for (int i = 0; i < n; ++i) out.present_value[i] += pay[i] * tail;
                out.tail_closed_form = true;
                break;
            }
        } else if (cfg.continuation_probability) {
            if (uniform() >= *cfg.continuation_probability) break;
        } else if (t + 1 >= cfg.horizon) {
            break;
        }
    }
    return out;
}

} // namespace qf
