#pragma once

#include <array>
#include <string>
#include <string_view>

#include "dtfdd/random.hpp"

namespace dtfdd {

/// Statistics of one BS-user link. gamma = |h|^2 / sigma^2 is exponential
/// (Rayleigh fading) with mean `mean_gain`.
struct LinkStatistics {
    double mean_gain = 1.0;
    double noise_variance = 1.0;
    double tx_power = 0.0;

    void validate() const;
};

enum class CorrelationMode { independent, identical };

std::string_view to_string(CorrelationMode mode);
CorrelationMode correlation_mode_from_string(std::string_view name);

/// Aggregate inter-cell interference: each receiver sees the sum of
/// `num_interferers` iid exponential powers with mean `per_interferer_mean`
/// (interferer transmit power already folded into the mean).
struct InterferenceModel {
    int num_interferers = 1;
    double per_interferer_mean = 0.0;
    CorrelationMode correlation = CorrelationMode::independent;

    void validate() const;
    double mean() const { return num_interferers * per_interferer_mean; }
};

struct InterferencePair {
    double gamma_i1 = 0.0;
    double gamma_i2 = 0.0;
};

struct SlotRealization {
    double gamma_1 = 0.0;
    double gamma_2 = 0.0;
    double gamma_i1 = 0.0;
    double gamma_i2 = 0.0;
    double capacity_1 = 0.0;
    double capacity_2 = 0.0;

    double gamma(int link) const { return link == 0 ? gamma_1 : gamma_2; }
    double interference(int link) const { return link == 0 ? gamma_i1 : gamma_i2; }
    double capacity(int link) const { return link == 0 ? capacity_1 : capacity_2; }
};

struct PathLossParams {
    double carrier_freq_hz = 1.9e9;
    double distance_m = 700.0;
    double exponent = 3.6;

    void validate() const;
};

inline constexpr double kSpeedOfLight = 299792458.0;

double sample_fading(const LinkStatistics& stats, RandomSource& rng);

InterferencePair sample_interference(const InterferenceModel& model, RandomSource& rng);

/// log2(1 + P*gamma / (1 + gamma_i)), interference treated as noise.
double capacity(double power, double gamma, double gamma_i);

/// Mean channel gain E{|h|^2} = (c / (4 pi f_c))^2 * d^-beta.
double compute_path_loss(const PathLossParams& params);

/// Draws one slot for both links and evaluates the true capacities at the
/// given transmit powers.
SlotRealization draw_slot(const LinkStatistics& link_1,
                          const LinkStatistics& link_2,
                          const InterferenceModel& interference,
                          const std::array<double, 2>& powers,
                          RandomSource& rng);

} // namespace dtfdd
