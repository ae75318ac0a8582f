#pragma once

// Reciprocal-backing collusion: the one-shot two-player game, trigger
// strategies in the repeated game, and the participation share a ring of n
// colluders needs for backing each other to pay off.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qf {

enum class Action : int { Invest = 0, DoNotInvest = 1 };

struct PayoffMatrix {
    double c = 0.0;
    /// entries[row][col] = (row player payoff, column player payoff).
    std::array<std::array<std::pair<double, double>, 2>, 2> entries{};

    const std::pair<double, double>& at(Action row, Action col) const {
        return entries[static_cast<int>(row)][static_cast<int>(col)];
    }
};

struct CollusionThresholds {
    int n = 2;
    double k = 1.0;
    double alpha_star = 0.0;
    double alpha_double_star = 0.0;
};

PayoffMatrix payoff_matrix(double c);

/// Pure-strategy Nash equilibria found by enumerating best responses.
std::vector<std::pair<Action, Action>> pure_nash_equilibria(const PayoffMatrix& m);

/// Largest discount rate at which grim trigger sustains mutual investment: 2 / (2 sqrt 2 - 1).
double trigger_threshold();
bool trigger_sustainable(double discount_rate);

/// 1 / sqrt(n): infimum of profitable participation shares with an unlimited pool.
double alpha_star(int n);

/// Positive root of (n/k) a^2 + (1 - 1/k) a - 1 = 0.
double alpha_double_star(int n, double k);

/// Net return F^p - c to a ring member when a share alpha of the n members
/// each put c/n into its project and matches are scaled by 1/k.
double ring_payoff(int n, double alpha, double k, double c);

CollusionThresholds collusion_thresholds(int n, double k);
std::vector<CollusionThresholds> threshold_sweep(const std::vector<int>& ns, const std::vector<double>& ks);

/// Per-player payoffs of one round of the n-player ring game. Cooperators
/// spread c evenly over every member's project (their own included);
/// defectors put c into their own project.
std::vector<double> ring_round_payoffs(int n, double k, double c, const std::vector<bool>& cooperate);

/// Policies: "trigger", "always_cooperate", "always_defect",
/// "deviate_at:<t>" (trigger, but defects for good from round t),
/// "random:<p>" (cooperates with probability p each round).
struct RepeatedGameConfig {
    int players = 2;
    double k = 1.0;
    double c = 1.0;
    double discount_rate = 0.1;
    int horizon = 0; // rounds to simulate; 0 = unbounded
    std::optional<double> continuation_probability; // random stopping instead of a fixed horizon
    std::vector<std::string> policies;              // one per player; a single entry applies to all
    std::uint64_t seed = 0;
};

struct RepeatedGameTrajectory {
    std::vector<std::vector<double>> payoffs;   // [round][player]
    std::vector<std::vector<bool>> cooperation; // [round][player]
    std::vector<double> present_value;          // per player, including any closed-form tail
    bool tail_closed_form = false;              // unbounded run finished analytically
};

RepeatedGameTrajectory repeated_game_simulate(const RepeatedGameConfig& config);

} // namespace qf
