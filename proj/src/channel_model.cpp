#include "dtfdd/channel_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dtfdd {

void LinkStatistics::validate() const
{
    if (!(mean_gain > 0.0)) {
        throw std::invalid_argument("link mean_gain must be > 0");
    }
    if (!(noise_variance > 0.0)) {
        throw std::invalid_argument("link noise_variance must be > 0");
    }
    if (!(tx_power >= 0.0)) {
        throw std::invalid_argument("link tx_power must be >= 0");
    }
}

void InterferenceModel::validate() const
{
    if (num_interferers < 1) {
        throw std::invalid_argument("interference num_interferers must be >= 1");
    }
    if (!(per_interferer_mean >= 0.0)) {
        throw std::invalid_argument("interference per_interferer_mean must be >= 0");
    }
}

void PathLossParams::validate() const
{
    if (!(carrier_freq_hz > 0.0) || !(distance_m > 0.0) || !(exponent >= 0.0)) {
        throw std::invalid_argument("path loss needs frequency > 0, distance > 0, exponent >= 0");
    }
}

std::string_view to_string(CorrelationMode mode)
{
    return mode == CorrelationMode::independent ? "independent" : "identical";
}

CorrelationMode correlation_mode_from_string(std::string_view name)
{
    if (name == "independent") {
        return CorrelationMode::independent;
    }
    if (name == "identical") {
        return CorrelationMode::identical;
    }
    throw std::invalid_argument("unknown correlation mode: " + std::string(name));
}

double sample_fading(const LinkStatistics& stats, RandomSource& rng)
{
    return rng.exponential(stats.mean_gain);
}

namespace {

double sample_erlang(int shape, double mean_per_stage, RandomSource& rng)
{
    if (mean_per_stage == 0.0) {
        return 0.0;
    }
    double sum = 0.0;
    for (int k = 0; k < shape; ++k) {
        sum += rng.exponential(mean_per_stage);
    }
    return sum;
}

} // namespace

InterferencePair sample_interference(const InterferenceModel& model, RandomSource& rng)
{
    const double first = sample_erlang(model.num_interferers, model.per_interferer_mean, rng);
    if (model.correlation == CorrelationMode::identical) {
        return {first, first};
    }
    return {first, sample_erlang(model.num_interferers, model.per_interferer_mean, rng)};
}

double capacity(double power, double gamma, double gamma_i)
{
    return std::log2(1.0 + power * gamma / (1.0 + gamma_i));
}

double compute_path_loss(const PathLossParams& params)
{
    const double wavelength_term = kSpeedOfLight / (4.0 * std::numbers::pi * params.carrier_freq_hz);
    return wavelength_term * wavelength_term * std::pow(params.distance_m, -params.exponent);
}

SlotRealization draw_slot(const LinkStatistics& link_1,
                          const LinkStatistics& link_2,
                          const InterferenceModel& interference,
                          const std::array<double, 2>& powers,
                          RandomSource& rng)
{
    SlotRealization slot;
    slot.gamma_1 = sample_fading(link_1, rng);
    slot.gamma_2 = sample_fading(link_2, rng);
    const auto icis = sample_interference(interference, rng);
    slot.gamma_i1 = icis.gamma_i1;
    slot.gamma_i2 = icis.gamma_i2;
    slot.capacity_1 = capacity(powers[0], slot.gamma_1, slot.gamma_i1);
    slot.capacity_2 = capacity(powers[1], slot.gamma_2, slot.gamma_i2);
    return slot;
}

} // namespace dtfdd
