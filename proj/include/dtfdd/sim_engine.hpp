#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "dtfdd/benchmarks.hpp"
#include "dtfdd/channel_model.hpp"
#include "dtfdd/duplex_core.hpp"
#include "dtfdd/scheduler_known_ici.hpp"
#include "dtfdd/scheduler_unknown_ici.hpp"

namespace dtfdd {

enum class Scheme { dtfdd_known, dtfdd_unknown, static_tdd };

std::string_view to_string(Scheme scheme);
Scheme scheme_from_string(std::string_view name);

/// How `power_budget` is interpreted.
///  - calibrated: long-term average power budgets; transmit powers are found
///    by calibrate_power so that each link's average power meets its budget.
///  - fixed: transmit powers used as-is by the D-TFDD schemes (static TDD
///    still concentrates P/fraction into its active slots).
enum class PowerMode { calibrated, fixed };

std::string_view to_string(PowerMode mode);
PowerMode power_mode_from_string(std::string_view name);

struct RunConfig {
    Scheme scheme = Scheme::dtfdd_known;
    std::uint64_t slots = 100000;
    LinkStatistics link_1;
    LinkStatistics link_2;
    InterferenceModel interference;
    RateSet rates_1;
    RateSet rates_2;
    double mu = 0.5;
    std::array<double, 2> power_budget{1.0, 1.0};
    PowerMode power_mode = PowerMode::calibrated;

    std::uint64_t pilot_slots = 100000;
    int max_calibration_rounds = 10;
    double calibration_tolerance = 0.01;

    // unknown-ICI estimator
    double epsilon = 0.05;
    StepSchedule step;
    StepSchedule multiplier_step;
    /// Estimator snapshot spacing; 0 picks slots / 100.
    std::uint64_t trajectory_stride = 0;

    // static TDD
    bool static_literal_outage = false;

    std::uint64_t seed = 1;

    void validate() const;
};

struct TrajectorySample {
    std::uint64_t slot = 0;
    std::array<double, 2> interference{};
    std::array<double, 2> error_rate{};
    std::array<double, 2> multiplier{};
};

struct PowerCalibration {
    std::array<double, 2> powers{};
    std::array<double, 2> activity{};
    int rounds = 0;
    bool converged = true;
};

struct RunMetrics {
    std::uint64_t slots = 0;
    double throughput_1 = 0.0;
    double throughput_2 = 0.0;
    double outage_rate = 0.0;
    std::uint64_t outage_slots = 0;
    /// Transmit slots whose codeword was not decodable.
    std::uint64_t failure_slots = 0;
    std::uint64_t silent_slots = 0;
    std::array<std::uint64_t, 2> active_slots{};
    std::array<std::uint64_t, 2> failed_slots{};
    std::array<double, 2> tx_power{};
    std::array<double, 2> realized_power{};
    PowerCalibration calibration;
    std::vector<TrajectorySample> trajectory;
    std::optional<EstimatorState> final_estimator;

    double sum_throughput() const { return throughput_1 + throughput_2; }
};

/// Transmit powers meeting the long-term average-power budgets.
///
/// D-TFDD schemes iterate pilot runs over the first min(slots, pilot_slots)
/// slots of the run's own channel stream: measure each link's active
/// fraction f, set P = budget / f, and stop once f moves by less than the
/// tolerance (relative), returning the powers of that settled round, or when
/// the round cap is hit (`converged` = false). Static TDD is resolved in
/// closed form as budget / fraction.
PowerCalibration calibrate_power(const RunConfig& config);

/// Simulates `config.slots` slots. In calibrated mode the transmit powers come
/// from calibrate_power; in fixed mode from the budget directly.
RunMetrics run(const RunConfig& config);

/// Simulation at explicit transmit powers (no calibration).
RunMetrics run_at_powers(const RunConfig& config, const std::array<double, 2>& tx_powers);

struct RegionConfig {
    RunConfig base;
    std::vector<double> mu_grid;
    /// Reuse base.seed at every point instead of a fresh derived stream.
    bool common_random_numbers = false;
    /// When non-empty, the single base rate R (rates = R, 2R, ...) is picked
    /// per point from this grid to maximize mu*T1 + (1-mu)*T2.
    std::vector<double> rate_grid;
    unsigned workers = 1;

    void validate() const;
};

struct RegionPoint {
    double mu = 0.0;
    double base_rate = 0.0;
    double throughput_1 = 0.0;
    double throughput_2 = 0.0;
    double outage_rate = 0.0;
};

/// One run per mu (per rate candidate when optimizing), in grid order.
std::vector<RegionPoint> sweep_region(const RegionConfig& config);

} // namespace dtfdd
