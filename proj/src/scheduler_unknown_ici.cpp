#include "dtfdd/scheduler_unknown_ici.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dtfdd {

double StepSchedule::operator()(std::uint64_t t) const
{
    const double td = static_cast<double>(t);
    return exponent == 1.0 ? scale / td : scale / std::pow(td, exponent);
}

void UnknownIciConfig::validate() const
{
    if (!(mu >= 0.0 && mu <= 1.0)) {
        throw std::invalid_argument("mu must lie in [0, 1]");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be > 0");
    }
    for (const auto* s : {&step, &multiplier_step}) {
        if (!(s->scale > 0.0 && s->scale < 1.0) || !(s->exponent > 0.0)) {
            throw std::invalid_argument("step schedules must decay and start below 1");
        }
    }
}

double estimated_capacity(double power, double gamma, double interference_estimate)
{
    return std::log2(1.0 + power * gamma / (1.0 + interference_estimate));
}

namespace {

/// Highest rate supported by `cap`; rates are increasing so this is the
/// argmax of R * O_e with ties going to the largest index.
std::optional<std::size_t> best_supported(const RateSet& rates, double cap)
{
    for (std::size_t m = rates.size(); m-- > 0;) {
        if (outage_indicator(cap, rates[m])) {
            return m;
        }
    }
    return std::nullopt;
}

} // namespace

SlotDecision decide_unknown(const UnknownIciConfig& config,
                            const EstimatorState& state,
                            const std::array<double, 2>& powers,
                            double gamma_1,
                            double gamma_2,
                            std::uint64_t slot)
{
    if (slot != state.slot_count + 1) {
        throw ContractViolation("estimator desynchronized: state covers " + std::to_string(state.slot_count) +
                                " slots but slot " + std::to_string(slot) + " was requested");
    }
    const double cap_1 = estimated_capacity(powers[0], gamma_1, state.links[0].interference);
    const double cap_2 = estimated_capacity(powers[1], gamma_2, state.links[1].interference);
    const auto best_1 = best_supported(config.rates_1, cap_1);
    const auto best_2 = best_supported(config.rates_2, cap_2);

    const double score_1 = config.mu * cap_1;
    const double score_2 = (1.0 - config.mu) * cap_2;

    int winner = -1;
    if (score_1 >= score_2 && score_1 > 0.0) {
        winner = 0;
    } else if (score_2 > 0.0) {
        winner = 1;
    }
    if (winner == -1) {
        return SlotDecision::silence();
    }
    const auto& own = winner == 0 ? best_1 : best_2;
    if (own) {
        return SlotDecision::transmit(winner, *own);
    }
    const int other = 1 - winner;
    const auto& fallback = other == 0 ? best_1 : best_2;
    if (fallback) {
        return SlotDecision::transmit(other, *fallback);
    }
    return SlotDecision::silence();
}

EstimatorState update_estimator(const EstimatorState& state,
                                const UnknownIciConfig& config,
                                const SlotDecision& decision,
                                const std::optional<SlotFeedback>& feedback,
                                const std::array<double, 2>& powers,
                                double gamma_1,
                                double gamma_2)
{
    if (decision.is_silent() && feedback) {
        throw ContractViolation("feedback supplied for a silent slot");
    }
    if (!decision.is_silent() && !feedback) {
        throw ContractViolation("missing feedback for a transmit slot");
    }

    EstimatorState next = state;
    next.slot_count = state.slot_count + 1;
    const std::uint64_t t = next.slot_count;
    const double td = static_cast<double>(t);
    const double decay = (td - 1.0) / td;
    const double step = config.step(t);
    const double mult_step = config.multiplier_step(t);
    const std::array<double, 2> gammas{gamma_1, gamma_2};

    for (int k = 0; k < 2; ++k) {
        auto& link = next.links[static_cast<std::size_t>(k)];
        const double power = powers[static_cast<std::size_t>(k)];
        const double gamma = gammas[static_cast<std::size_t>(k)];
        const double est = link.interference;
        const double cap_now = estimated_capacity(power, gamma, est);

        double error_term = 0.0;
        double gradient_term = 0.0;
        if (decision.active_link() == k) {
            const double rate = config.rates(k)[*decision.rate_index()];
            const double predicted = outage_indicator(cap_now, rate) ? 1.0 : 0.0;
            const double realized = feedback->decoded ? 1.0 : 0.0;
            error_term = (realized - predicted) * (realized - predicted);

            const bool crossing = (rate - link.prev_capacity) * (rate - cap_now) <= 0.0;
            if (crossing) {
                const double pg = power * gamma;
                const double sensitivity = pg / (std::numbers::ln2 * (1.0 + est + pg) * (1.0 + est));
                gradient_term =
                    sensitivity * (2.0 * link.multiplier * (predicted - realized) - config.weight(k) * rate);
            }
        }

        link.error_rate = decay * link.error_rate + error_term / td;
        link.gradient = decay * link.gradient - gradient_term / td;
        link.multiplier += mult_step * std::max(0.0, link.error_rate - config.epsilon);
        link.interference = std::max(0.0, est - step * link.gradient);
        link.prev_capacity = cap_now;
    }
    return next;
}

UnknownIciScheduler::UnknownIciScheduler(UnknownIciConfig config) : config_(std::move(config))
{
    config_.validate();
}

SlotDecision UnknownIciScheduler::decide(const std::array<double, 2>& powers, double gamma_1, double gamma_2) const
{
    return decide_unknown(config_, state_, powers, gamma_1, gamma_2, state_.slot_count + 1);
}

void UnknownIciScheduler::observe(const SlotDecision& decision,
                                  const std::optional<SlotFeedback>& feedback,
                                  const std::array<double, 2>& powers,
                                  double gamma_1,
                                  double gamma_2)
{
    state_ = update_estimator(state_, config_, decision, feedback, powers, gamma_1, gamma_2);
}

} // namespace dtfdd
