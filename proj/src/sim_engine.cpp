#include "dtfdd/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dtfdd/parallel.hpp"
#include "dtfdd/random.hpp"

namespace dtfdd {

namespace {

constexpr std::uint64_t kChannelStream = 1;

} // namespace

std::string_view to_string(Scheme scheme)
{
    switch (scheme) {
    case Scheme::dtfdd_known:
        return "dtfdd_known";
    case Scheme::dtfdd_unknown:
        return "dtfdd_unknown";
    case Scheme::static_tdd:
        return "static_tdd";
    }
    return "?";
}

Scheme scheme_from_string(std::string_view name)
{
    for (auto s : {Scheme::dtfdd_known, Scheme::dtfdd_unknown, Scheme::static_tdd}) {
        if (name == to_string(s)) {
            return s;
        }
    }
    throw std::invalid_argument("unknown scheme: " + std::string(name));
}

std::string_view to_string(PowerMode mode)
{
    return mode == PowerMode::calibrated ? "calibrated" : "fixed";
}

PowerMode power_mode_from_string(std::string_view name)
{
    if (name == "calibrated") {
        return PowerMode::calibrated;
    }
    if (name == "fixed") {
        return PowerMode::fixed;
    }
    throw std::invalid_argument("unknown power mode: " + std::string(name));
}

void RunConfig::validate() const
{
    if (slots < 1) {
        throw std::invalid_argument("slots must be >= 1");
    }
    if (!(mu >= 0.0 && mu <= 1.0)) {
        throw std::invalid_argument("mu must lie in [0, 1]");
    }
    link_1.validate();
    link_2.validate();
    interference.validate();
    if (!(power_budget[0] > 0.0) || !(power_budget[1] > 0.0)) {
        throw std::invalid_argument("power budgets must be > 0");
    }
    if (scheme == Scheme::static_tdd && (rates_1.size() != 1 || rates_2.size() != 1)) {
        throw std::invalid_argument("static_tdd supports a single rate per link");
    }
    if (scheme == Scheme::dtfdd_unknown) {
        UnknownIciConfig{mu, rates_1, rates_2, epsilon, step, multiplier_step}.validate();
    }
    if (power_mode == PowerMode::calibrated) {
        if (pilot_slots < 1 || max_calibration_rounds < 1 || !(calibration_tolerance > 0.0)) {
            throw std::invalid_argument("calibration needs pilot_slots >= 1, rounds >= 1, tolerance > 0");
        }
    }
}

namespace {

RunMetrics simulate(const RunConfig& config,
                    const std::array<double, 2>& tx_powers,
                    std::uint64_t slots,
                    std::uint64_t seed,
                    bool record_trajectory)
{
    RandomSource rng = RandomSource(seed).split(kChannelStream);
    RunMetrics m;
    m.slots = slots;
    m.tx_power = tx_powers;

    const KnownIciConfig known{config.mu, config.rates_1, config.rates_2};
    const StaticTddConfig fixed_tdd{config.mu,
                                    config.rates_1[0],
                                    config.rates_2[0],
                                    config.static_literal_outage};
    std::optional<UnknownIciScheduler> unknown;
    if (config.scheme == Scheme::dtfdd_unknown) {
        unknown.emplace(UnknownIciConfig{
            config.mu, config.rates_1, config.rates_2, config.epsilon, config.step, config.multiplier_step});
    }
    const std::uint64_t stride =
        config.trajectory_stride > 0 ? config.trajectory_stride : std::max<std::uint64_t>(1, slots / 100);

    std::array<double, 2> delivered{0.0, 0.0};
    const std::array<const RateSet*, 2> rates{&config.rates_1, &config.rates_2};

    for (std::uint64_t t = 1; t <= slots; ++t) {
        const SlotRealization slot = draw_slot(config.link_1, config.link_2, config.interference, tx_powers, rng);

        SlotDecision decision = SlotDecision::silence();
        switch (config.scheme) {
        case Scheme::dtfdd_known:
            decision = decide_known(known, slot.capacity_1, slot.capacity_2);
            break;
        case Scheme::dtfdd_unknown:
            decision = unknown->decide(tx_powers, slot.gamma_1, slot.gamma_2);
            break;
        case Scheme::static_tdd:
            decision = decide_static(fixed_tdd, t, slots);
            break;
        }

        const int k = decision.active_link();
        bool decoded = false;
        if (k >= 0) {
            const auto ku = static_cast<std::size_t>(k);
            const double rate = (*rates[ku])[*decision.rate_index()];
            if (config.scheme == Scheme::static_tdd) {
                decoded = static_outage_indicator(config.power_budget[ku],
                                                  fixed_tdd.fraction(k),
                                                  slot.gamma(k),
                                                  slot.interference(k),
                                                  rate,
                                                  config.static_literal_outage);
            } else {
                decoded = outage_indicator(slot.capacity(k), rate);
            }
            ++m.active_slots[ku];
            if (decoded) {
                delivered[ku] += rate;
            } else {
                ++m.failed_slots[ku];
                ++m.failure_slots;
                ++m.outage_slots;
            }
        } else {
            ++m.silent_slots;
            ++m.outage_slots;
        }

        if (unknown) {
            std::optional<SlotFeedback> feedback;
            if (k >= 0) {
                feedback = SlotFeedback{decoded};
            }
            unknown->observe(decision, feedback, tx_powers, slot.gamma_1, slot.gamma_2);
            if (record_trajectory && (t % stride == 0 || t == slots)) {
                const auto& s = unknown->state();
                TrajectorySample sample;
                sample.slot = t;
                for (std::size_t j = 0; j < 2; ++j) {
                    sample.interference[j] = s.links[j].interference;
                    sample.error_rate[j] = s.links[j].error_rate;
                    sample.multiplier[j] = s.links[j].multiplier;
                }
                m.trajectory.push_back(sample);
            }
        }
    }

    const double td = static_cast<double>(slots);
    m.throughput_1 = delivered[0] / td;
    m.throughput_2 = delivered[1] / td;
    m.outage_rate = static_cast<double>(m.outage_slots) / td;
    for (std::size_t j = 0; j < 2; ++j) {
        m.realized_power[j] = tx_powers[j] * static_cast<double>(m.active_slots[j]) / td;
    }
    if (unknown) {
        m.final_estimator = unknown->state();
    }
    return m;
}

std::array<double, 2> static_powers(const RunConfig& config)
{
    std::array<double, 2> p{};
    for (int k = 0; k < 2; ++k) {
        const double f = k == 0 ? config.mu : 1.0 - config.mu;
        const auto ku = static_cast<std::size_t>(k);
        p[ku] = f > 0.0 ? config.power_budget[ku] / f : config.power_budget[ku];
    }
    return p;
}

} // namespace

PowerCalibration calibrate_power(const RunConfig& config)
{
    config.validate();
    PowerCalibration cal;
    if (config.scheme == Scheme::static_tdd) {
        cal.powers = static_powers(config);
        cal.activity = {config.mu, 1.0 - config.mu};
        cal.rounds = 1;
        cal.converged = true;
        return cal;
    }

    // The pilot replays a prefix of the main run's channel stream, so with
    // pilot_slots >= slots the settled round is the main run itself.
    const std::uint64_t pilot = std::min(config.slots, config.pilot_slots);
    std::array<double, 2> powers = config.power_budget;
    std::optional<std::array<double, 2>> previous;
    cal.converged = false;

    for (int round = 1; round <= config.max_calibration_rounds; ++round) {
        const RunMetrics m = simulate(config, powers, pilot, config.seed, false);
        std::array<double, 2> activity{};
        bool settled = previous.has_value();
        for (std::size_t j = 0; j < 2; ++j) {
            activity[j] = static_cast<double>(m.active_slots[j]) / static_cast<double>(pilot);
            if (previous) {
                const double before = (*previous)[j];
                const double change = std::abs(activity[j] - before);
                if (before > 0.0 ? change > config.calibration_tolerance * before : activity[j] > 0.0) {
                    settled = false;
                }
            }
        }
        cal.rounds = round;
        cal.activity = activity;
        if (settled) {
            // Keep the powers this round ran at: realized = budget * f_now / f_prev.
            cal.converged = true;
            break;
        }
        for (std::size_t j = 0; j < 2; ++j) {
            if (activity[j] > 0.0) {
                powers[j] = config.power_budget[j] / activity[j];
            }
        }
        previous = activity;
    }
    cal.powers = powers;
    return cal;
}

RunMetrics run_at_powers(const RunConfig& config, const std::array<double, 2>& tx_powers)
{
    config.validate();
    return simulate(config, tx_powers, config.slots, config.seed, true);
}

RunMetrics run(const RunConfig& config)
{
    config.validate();
    PowerCalibration cal;
    if (config.power_mode == PowerMode::calibrated || config.scheme == Scheme::static_tdd) {
        cal = calibrate_power(config);
    } else {
        cal.powers = config.power_budget;
        cal.activity = {0.0, 0.0};
        cal.rounds = 0;
    }
    RunMetrics m = simulate(config, cal.powers, config.slots, config.seed, true);
    m.calibration = cal;
    return m;
}

void RegionConfig::validate() const
{
    base.validate();
    if (mu_grid.empty()) {
        throw std::invalid_argument("mu grid must not be empty");
    }
    for (double mu : mu_grid) {
        if (!(mu >= 0.0 && mu <= 1.0)) {
            throw std::invalid_argument("mu grid values must lie in [0, 1]");
        }
    }
    for (double r : rate_grid) {
        if (!(r > 0.0)) {
            throw std::invalid_argument("rate grid values must be > 0");
        }
    }
}

std::vector<RegionPoint> sweep_region(const RegionConfig& config)
{
    config.validate();
    const std::size_t candidates = config.rate_grid.empty() ? 1 : config.rate_grid.size();
    const std::size_t jobs = config.mu_grid.size() * candidates;

    struct Outcome {
        double base_rate = 0.0;
        RunMetrics metrics;
    };
    auto outcomes = parallel_map(jobs, config.workers, [&](std::size_t job) {
        const std::size_t point = job / candidates;
        const std::size_t candidate = job % candidates;
        RunConfig rc = config.base;
        rc.mu = config.mu_grid[point];
        rc.seed = config.common_random_numbers ? config.base.seed : derive_seed(config.base.seed, {point});
        Outcome out;
        out.base_rate = rc.rates_1[0];
        if (!config.rate_grid.empty()) {
            out.base_rate = config.rate_grid[candidate];
            rc.rates_1 = RateSet::uniform(config.base.rates_1.size(), out.base_rate);
            rc.rates_2 = RateSet::uniform(config.base.rates_2.size(), out.base_rate);
        }
        out.metrics = run(rc);
        return out;
    });

    std::vector<RegionPoint> points;
    points.reserve(config.mu_grid.size());
    for (std::size_t p = 0; p < config.mu_grid.size(); ++p) {
        const double mu = config.mu_grid[p];
        const Outcome* best = nullptr;
        double best_value = -1.0;
        for (std::size_t c = 0; c < candidates; ++c) {
            const auto& o = outcomes[p * candidates + c];
            const double value = mu * o.metrics.throughput_1 + (1.0 - mu) * o.metrics.throughput_2;
            if (value > best_value) {
                best_value = value;
                best = &o;
            }
        }
        points.push_back(
            {mu, best->base_rate, best->metrics.throughput_1, best->metrics.throughput_2, best->metrics.outage_rate});
    }
    return points;
}

} // namespace dtfdd
