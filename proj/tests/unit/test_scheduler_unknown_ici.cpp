#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dtfdd/channel_model.hpp"
#include "dtfdd/scheduler_unknown_ici.hpp"
#include "../support/oracles.hpp"

using namespace dtfdd;

namespace {

UnknownIciConfig config(double mu, std::vector<double> r1, std::vector<double> r2)
{
    return {mu, RateSet(std::move(r1)), RateSet(std::move(r2)), 0.05, {}, {}};
}

constexpr std::array<double, 2> kUnitPower{1.0, 1.0};

} // namespace

TEST_CASE("estimated capacity")
{
    CHECK(estimated_capacity(5.0, 0.7, 0.0) == capacity(5.0, 0.7, 0.0));
    CHECK(estimated_capacity(1.0, 1.0, 1.0) == doctest::Approx(std::log2(1.5)));
    CHECK(estimated_capacity(9.0, 0.0, 2.0) == 0.0);
}

TEST_CASE("unknown-ICI decisions")
{
    const EstimatorState fresh;
    SUBCASE("both below every rate -> silence")
    {
        CHECK(decide_unknown(config(0.5, {2}, {2}), fresh, kUnitPower, 0.5, 0.5, 1) == SlotDecision::silence());
    }
    SUBCASE("equal estimated capacities -> U1")
    {
        CHECK(decide_unknown(config(0.5, {1}, {1}), fresh, kUnitPower, 1.5, 1.5, 1) == SlotDecision::u1(0));
    }
    SUBCASE("mu = 1 and U1 decodable -> U1")
    {
        CHECK(decide_unknown(config(1.0, {1}, {1}), fresh, kUnitPower, 1.0, 50.0, 1) == SlotDecision::u1(0));
    }
    SUBCASE("largest estimated-decodable rate is used")
    {
        // C1e = log2(8) = 3
        CHECK(decide_unknown(config(0.5, {1, 2, 3, 4}, {1}), fresh, kUnitPower, 7.0, 0.1, 1) == SlotDecision::u1(2));
    }
    SUBCASE("winner without a supported rate falls back to the other link")
    {
        // Lambda1 = 0.9 * log2(1.5) > Lambda2 = 0.1 * log2(5), but only U2 supports a rate.
        CHECK(decide_unknown(config(0.9, {1}, {2}), fresh, kUnitPower, 0.5, 4.0, 1) == SlotDecision::u2(0));
        // mu = 1 endpoint: Lambda2 = 0 yet U2 is the only link with a rate.
        CHECK(decide_unknown(config(1.0, {1}, {1}), fresh, kUnitPower, 0.5, 4.0, 1) == SlotDecision::u2(0));
    }
    SUBCASE("the estimate lowers the capacity used for the decision")
    {
        EstimatorState s;
        s.links[0].interference = 3.0; // C1e = log2(1 + 3/4) < 1
        CHECK(decide_unknown(config(0.5, {1}, {1}), s, kUnitPower, 3.0, 1.2, 1) == SlotDecision::u2(0));
    }
}

TEST_CASE("desynchronized clock is rejected")
{
    EstimatorState s;
    s.slot_count = 4;
    CHECK_THROWS_AS(decide_unknown(config(0.5, {1}, {1}), s, kUnitPower, 1.0, 1.0, 4), ContractViolation);
    CHECK_NOTHROW(decide_unknown(config(0.5, {1}, {1}), s, kUnitPower, 1.0, 1.0, 5));
}

TEST_CASE("feedback must match the decision")
{
    const auto cfg = config(0.5, {1}, {1});
    const EstimatorState s;
    CHECK_THROWS_AS(update_estimator(s, cfg, SlotDecision::silence(), SlotFeedback{true}, kUnitPower, 1, 1),
                    ContractViolation);
    CHECK_THROWS_AS(update_estimator(s, cfg, SlotDecision::u1(0), std::nullopt, kUnitPower, 1, 1), ContractViolation);
}

TEST_CASE("silent first slot from the zero state")
{
    const auto cfg = config(0.5, {1}, {1});
    const auto s = update_estimator({}, cfg, SlotDecision::silence(), std::nullopt, kUnitPower, 0.0, 0.0);
    CHECK(s.slot_count == 1);
    for (const auto& l : s.links) {
        CHECK(l.interference == 0.0);
        CHECK(l.gradient == 0.0);
        CHECK(l.multiplier == 0.0);
        CHECK(l.error_rate == 0.0);
        CHECK(l.prev_capacity == 0.0);
    }

    const auto t = update_estimator({}, cfg, SlotDecision::silence(), std::nullopt, kUnitPower, 3.0, 1.0);
    CHECK(t.links[0].interference == 0.0);
    CHECK(t.links[0].gradient == 0.0);
    CHECK(t.links[0].prev_capacity == doctest::Approx(2.0));
    CHECK(t.links[1].prev_capacity == doctest::Approx(1.0));
}

TEST_CASE("silent slot at t = 2 halves the running gradient")
{
    const auto cfg = config(0.5, {1}, {1});
    EstimatorState s;
    s.slot_count = 1;
    s.links[0].interference = 1.0;
    s.links[0].gradient = 0.4;
    const auto next = update_estimator(s, cfg, SlotDecision::silence(), std::nullopt, kUnitPower, 1.0, 1.0);
    CHECK(next.links[0].gradient == doctest::Approx(0.2));
    // delta(2) = 1/4
    CHECK(next.links[0].interference == doctest::Approx(0.95));
}

TEST_CASE("correct prediction with a threshold crossing (hand-evaluated step)")
{
    // t = 1, U1 at R = 1 with P*gamma = 3 and estimate 1: C1e = log2(2.5) > 1
    // and C1e(0) = 0, so the crossing indicator fires; chi = 0.
    const auto cfg = config(0.5, {1}, {1});
    EstimatorState s;
    s.links[0].interference = 1.0;
    const auto next = update_estimator(s, cfg, SlotDecision::u1(0), SlotFeedback{true}, kUnitPower, 3.0, 0.2);
    const double sensitivity = 3.0 / (std::numbers::ln2 * (1.0 + 1.0 + 3.0) * (1.0 + 1.0));
    const double gradient = sensitivity * 0.5 * 1.0; // -(1/1) * X * (0 - mu R)
    CHECK(next.links[0].gradient == doctest::Approx(gradient));
    CHECK(next.links[0].interference == doctest::Approx(1.0 - 0.5 * gradient));
    CHECK(next.links[0].error_rate == 0.0);
    CHECK(next.links[0].multiplier == 0.0);
    CHECK(next.links[0].prev_capacity == doctest::Approx(std::log2(2.5)));
    // U2 stayed idle: nothing accumulates.
    CHECK(next.links[1].gradient == 0.0);
    CHECK(next.links[1].interference == 0.0);
}

TEST_CASE("mispredicted slot raises the estimate through the multiplier term")
{
    // t = 3, U1 predicted decodable (O_e = 1) but failed (O = 0), chi = 2.
    const auto cfg = config(0.5, {1}, {1});
    EstimatorState s;
    s.slot_count = 2;
    s.links[0] = {0.5, 0.1, 2.0, 0.3, 0.9};
    const double pg = 2.0;
    const auto next = update_estimator(s, cfg, SlotDecision::u1(0), SlotFeedback{false}, kUnitPower, pg, 0.0);

    const double t = 3.0;
    const double cap = std::log2(1.0 + pg / 1.5); // 1.222 > 1, and C(t-1) = 0.9 < 1: crossing
    const double x = pg / (std::numbers::ln2 * (1.0 + 0.5 + pg) * 1.5);
    const double term = x * (2.0 * 2.0 * (1.0 - 0.0) - 0.5 * 1.0);
    const double gradient = (t - 1) / t * 0.1 - term / t;
    const double error_rate = (t - 1) / t * 0.3 + 1.0 / t;
    CHECK(next.links[0].prev_capacity == doctest::Approx(cap));
    CHECK(next.links[0].gradient == doctest::Approx(gradient));
    CHECK(next.links[0].error_rate == doctest::Approx(error_rate));
    CHECK(next.links[0].interference == doctest::Approx(0.5 - gradient / (2 * t)));
    CHECK(next.links[0].interference > 0.5);
    CHECK(next.links[0].multiplier == doctest::Approx(2.0 + (error_rate - 0.05) / (2 * t)));
}

TEST_CASE("no crossing, no gradient contribution")
{
    const auto cfg = config(0.5, {1}, {1});
    EstimatorState s;
    s.slot_count = 1;
    s.links[0].prev_capacity = 5.0;
    s.links[0].gradient = 0.3;
    // C1e(2) = log2(1 + 15) = 4: both capacities above R = 1.
    const auto next = update_estimator(s, cfg, SlotDecision::u1(0), SlotFeedback{true}, kUnitPower, 15.0, 1.0);
    CHECK(next.links[0].gradient == doctest::Approx(0.15));
}

TEST_CASE("estimator invariants along a random run, and determinism")
{
    auto run = [](std::uint64_t seed) {
        UnknownIciScheduler sched(config(0.4, {0.5, 1.0, 1.5}, {0.5, 1.0}));
        RandomSource rng(seed);
        const LinkStatistics link{1.0, 1.0, 0.0};
        const InterferenceModel ici{2, 2.0, CorrelationMode::independent};
        const std::array<double, 2> p{20.0, 20.0};
        for (int t = 0; t < 50'000; ++t) {
            const auto slot = draw_slot(link, link, ici, p, rng);
            const auto d = sched.decide(p, slot.gamma_1, slot.gamma_2);
            std::optional<SlotFeedback> fb;
            if (!d.is_silent()) {
                const double rate = sched.config().rates(d.active_link())[*d.rate_index()];
                fb = SlotFeedback{slot.capacity(d.active_link()) >= rate};
            }
            sched.observe(d, fb, p, slot.gamma_1, slot.gamma_2);
            for (const auto& l : sched.state().links) {
                REQUIRE(l.interference >= 0.0);
                REQUIRE(l.error_rate >= 0.0);
                REQUIRE(l.error_rate <= 1.0);
                REQUIRE(l.multiplier >= 0.0);
            }
        }
        return sched.state();
    };
    const auto a = run(8);
    const auto b = run(8);
    CHECK(a.slot_count == 50'000);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(a.links[k].interference == b.links[k].interference);
        CHECK(a.links[k].gradient == b.links[k].gradient);
        CHECK(a.links[k].multiplier == b.links[k].multiplier);
    }
}

TEST_CASE("config validation")
{
    CHECK_THROWS(config(1.5, {1}, {1}).validate());
    auto c = config(0.5, {1}, {1});
    c.epsilon = 0.0;
    CHECK_THROWS(c.validate());
    c = config(0.5, {1}, {1});
    c.step.scale = 1.5;
    CHECK_THROWS(c.validate());
    CHECK(StepSchedule{}(4) == doctest::Approx(0.125));
}
