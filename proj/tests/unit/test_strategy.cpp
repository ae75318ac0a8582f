#include "support.hpp"

#include "qfund/errors.hpp"
#include "qfund/strategy.hpp"

#include <doctest.h>

using namespace qf;
using doctest::Approx;

TEST_CASE("payoff matrix entries") {
    const auto m = payoff_matrix(2.0);
    CHECK(m.at(Action::Invest, Action::Invest).first == Approx(2.0));
    CHECK(m.at(Action::Invest, Action::DoNotInvest).first == Approx(-1.0));
    CHECK(m.at(Action::Invest, Action::DoNotInvest).second == Approx(1.0 + 2.0 * std::sqrt(2.0)));
    CHECK(m.at(Action::DoNotInvest, Action::Invest).first == Approx(1.0 + 2.0 * std::sqrt(2.0)));
    CHECK(m.at(Action::DoNotInvest, Action::DoNotInvest).first == 0.0);
    CHECK_THROWS_AS(payoff_matrix(0.0), DomainError);
    CHECK_THROWS_AS(payoff_matrix(-1.0), DomainError);
}

TEST_CASE("matrix agrees with the ring game for two players") {
    for (double c : {0.5, 1.0, 7.0}) {
        const auto m = payoff_matrix(c);
        const auto both = ring_round_payoffs(2, 1.0, c, {true, true});
        const auto one = ring_round_payoffs(2, 1.0, c, {true, false});
        const auto none = ring_round_payoffs(2, 1.0, c, {false, false});
        CHECK(both[0] == Approx(m.at(Action::Invest, Action::Invest).first));
        CHECK(one[0] == Approx(m.at(Action::Invest, Action::DoNotInvest).first));
        CHECK(one[1] == Approx(m.at(Action::Invest, Action::DoNotInvest).second));
        CHECK(none[0] == Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("one-shot game: not investing dominates") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(1e-3, 1e3);
    for (int i = 0; i < 1000; ++i) {
        const auto m = payoff_matrix(u(rng));
        REQUIRE(m.at(Action::DoNotInvest, Action::Invest).first > m.at(Action::Invest, Action::Invest).first);
        REQUIRE(m.at(Action::DoNotInvest, Action::DoNotInvest).first > m.at(Action::Invest, Action::DoNotInvest).first);
        const auto ne = pure_nash_equilibria(m);
        REQUIRE(ne.size() == 1);
        REQUIRE(ne[0] == std::make_pair(Action::DoNotInvest, Action::DoNotInvest));
    }
}

TEST_CASE("trigger sustainability boundary") {
    CHECK(trigger_threshold() == Approx(1.0938).epsilon(1e-4));
    CHECK(trigger_sustainable(0.1));
    CHECK(trigger_sustainable(1.0938));
    CHECK_FALSE(trigger_sustainable(1.10));
    CHECK(trigger_sustainable(2.0 / (2.0 * std::sqrt(2.0) - 1.0)));
    CHECK_THROWS_AS(trigger_sustainable(0.0), DomainError);
}

TEST_CASE("alpha_star") {
    CHECK(alpha_star(25) == 0.2);
    CHECK(alpha_star(4) == 0.5);
    CHECK_THROWS_AS(alpha_star(1), DomainError);
    // Profitability of (alpha n sqrt(c/n))^2 - c changes sign at 1/sqrt(n).
    for (int n : {4, 9, 25, 100}) {
        const double a = alpha_star(n);
        auto gain = [n](double alpha) {
            const double s = alpha * n * std::sqrt(1.0 / n);
            return s * s - 1.0;
        };
        CHECK(gain(a * 1.001) > 0.0);
        CHECK(gain(a * 0.999) < 0.0);
    }
}

TEST_CASE("alpha_double_star") {
    CHECK(alpha_double_star(25, 1.0) == Approx(0.2).epsilon(1e-12));
    CHECK(alpha_double_star(25, 20.0) == Approx(0.5918).epsilon(5e-4));
    CHECK(std::round(alpha_double_star(25, 20.0) * 100) == 59.0);
    CHECK(std::round(alpha_double_star(25, 20.0) * 10) == 6.0);
    CHECK(alpha_double_star(10, 1e12) == Approx(1.0).epsilon(1e-5));
    CHECK_THROWS_AS(alpha_double_star(1, 2.0), DomainError);
    CHECK_THROWS_AS(alpha_double_star(10, 0.5), DomainError);

    for (int n = 2; n <= 1000; ++n) REQUIRE(std::abs(alpha_double_star(n, 1.0) - 1.0 / std::sqrt(n)) < 1e-12);
    for (int n : {2, 10, 25, 100}) {
        double prev = 0.0;
        for (int k = 1; k <= 30; ++k) {
            const double a = alpha_double_star(n, k);
            REQUIRE(a >= prev);
            REQUIRE(a >= alpha_star(n) - 1e-15);
            REQUIRE(a <= 1.0);
            prev = a;
        }
    }
    for (double k : {1.0, 2.0, 10.0, 30.0})
        for (int n = 2; n < 200; ++n) REQUIRE(alpha_double_star(n + 1, k) <= alpha_double_star(n, k));
}

TEST_CASE("ring_payoff") {
    CHECK(ring_payoff(4, 1.0, 1.0, 1.0) == Approx(3.0));
    CHECK(ring_payoff(10, 0.1, 1.0, 1.0) < 0.0);
    CHECK_THROWS_AS(ring_payoff(4, 0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(ring_payoff(4, 1.5, 1.0, 1.0), DomainError);

    std::mt19937_64 rng(52);
    std::uniform_int_distribution<int> nn(2, 500);
    std::uniform_real_distribution<double> kk(1.0, 100.0), cc(0.01, 1000.0);
    for (int i = 0; i < 2000; ++i) {
        const int n = nn(rng);
        const double k = kk(rng), c = cc(rng);
        REQUIRE(std::abs(ring_payoff(n, alpha_double_star(n, k), k, c)) <= 1e-9 * c);
    }
}

TEST_CASE("ring round payoffs") {
    const auto all = ring_round_payoffs(25, 20.0, 1.0, std::vector<bool>(25, true));
    CHECK(all[0] == Approx(ring_payoff(25, 1.0, 20.0, 1.0)));
    const auto lone = ring_round_payoffs(3, 1.0, 3.0, {false, false, false});
    for (double v : lone) CHECK(v == Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(ring_round_payoffs(3, 1.0, 1.0, {true, true}), DomainError);
}

TEST_CASE("threshold sweep") {
    const auto rows = threshold_sweep({10, 25}, {1.0, 2.0, 3.0});
    REQUIRE(rows.size() == 6);
    CHECK(rows[3].n == 25);
    CHECK(rows[3].alpha_double_star == Approx(0.2));
}

TEST_CASE("repeated game: trigger players cooperate forever") {
    RepeatedGameConfig cfg;
    cfg.c = 1.5;
    cfg.discount_rate = 0.5;
    cfg.policies = {"trigger"};
    const auto t = repeated_game_simulate(cfg);
    CHECK(t.tail_closed_form);
    for (double pv : t.present_value) CHECK(pv == Approx(1.5 + 1.5 / 0.5).epsilon(1e-9));
}

TEST_CASE("repeated game: deviation at the start") {
    RepeatedGameConfig cfg;
    cfg.c = 1.0;
    cfg.discount_rate = 0.5;
    cfg.policies = {"deviate_at:0", "trigger"};
    const auto t = repeated_game_simulate(cfg);
    CHECK(t.present_value[0] == Approx((1.0 + 2.0 * std::sqrt(2.0)) / 2.0).epsilon(1e-12));
    CHECK(t.present_value[1] == Approx(-0.5).epsilon(1e-12));
    REQUIRE(t.cooperation.size() >= 2);
    CHECK(t.cooperation[1] == std::vector<bool>{false, false});
}

TEST_CASE("repeated game: deviating pays exactly above the threshold") {
    for (double r : {0.2, 0.9, 1.05, 1.09, 1.1, 1.5, 3.0}) {
        RepeatedGameConfig coop;
        coop.discount_rate = r;
        coop.policies = {"trigger"};
        RepeatedGameConfig dev = coop;
        dev.policies = {"deviate_at:0", "trigger"};
        const double stay = repeated_game_simulate(coop).present_value[0];
        const double leave = repeated_game_simulate(dev).present_value[0];
        CHECK((leave > stay) == !trigger_sustainable(r));
    }
}

TEST_CASE("repeated game: later deviation and horizons") {
    RepeatedGameConfig cfg;
    cfg.discount_rate = 0.1;
    cfg.policies = {"deviate_at:3", "trigger"};
    const auto t = repeated_game_simulate(cfg);
    CHECK(t.cooperation[2] == std::vector<bool>{true, true});
    CHECK(t.cooperation[3] == std::vector<bool>{false, true});
    CHECK(t.cooperation[4] == std::vector<bool>{false, false});

    cfg.horizon = 5;
    cfg.policies = {"always_cooperate", "always_defect"};
    const auto h = repeated_game_simulate(cfg);
    CHECK(h.payoffs.size() == 5);
    CHECK_FALSE(h.tail_closed_form);
}

TEST_CASE("repeated game: seeded randomness is reproducible") {
    RepeatedGameConfig cfg;
    cfg.players = 4;
    cfg.k = 3.0;
    cfg.continuation_probability = 0.9;
    cfg.policies = {"random:0.7"};
    cfg.seed = 99;
    const auto a = repeated_game_simulate(cfg);
    const auto b = repeated_game_simulate(cfg);
    CHECK(a.cooperation == b.cooperation);
    CHECK(a.present_value == b.present_value);
}

TEST_CASE("repeated game: invalid input") {
    RepeatedGameConfig cfg;
    cfg.policies = {"tit_for_tat"};
    CHECK_THROWS_AS(repeated_game_simulate(cfg), DomainError);
    cfg.policies = {"random:1.5"};
    cfg.horizon = 3;
    CHECK_THROWS_AS(repeated_game_simulate(cfg), DomainError);
    cfg.policies = {"random:0.5"};
    cfg.horizon = 0;
    CHECK_THROWS_AS(repeated_game_simulate(cfg), DomainError);
    cfg.policies = {"trigger", "trigger", "trigger"};
    CHECK_THROWS_AS(repeated_game_simulate(cfg), DomainError);
}
