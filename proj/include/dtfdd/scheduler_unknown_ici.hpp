#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "dtfdd/duplex_core.hpp"

namespace dtfdd {

/// Decaying step size scale / t^exponent.
struct StepSchedule {
    double scale = 0.5;
    double exponent = 1.0;

    double operator()(std::uint64_t t) const;
};

struct UnknownIciConfig {
    double mu = 0.5;
    RateSet rates_1;
    RateSet rates_2;
    /// Tolerated long-run fraction of transmit-and-fail slots per link.
    double epsilon = 0.05;
    StepSchedule step;
    StepSchedule multiplier_step;

    void validate() const;
    const RateSet& rates(int link) const { return link == 0 ? rates_1 : rates_2; }
    double weight(int link) const { return link == 0 ? mu : 1.0 - mu; }
};

/// Recursion state of one link's interference estimator.
struct LinkEstimate {
    double interference = 0.0;  ///< current estimate used for decisions
    double gradient = 0.0;      ///< running gradient average
    double multiplier = 0.0;    ///< penalty weight on estimation errors
    double error_rate = 0.0;    ///< running fraction of mispredicted slots
    double prev_capacity = 0.0; ///< estimated capacity of the previous slot
};

struct EstimatorState {
    std::array<LinkEstimate, 2> links{};
    /// Number of slots already folded into the recursion.
    std::uint64_t slot_count = 0;
};

/// 1-bit ACK/NACK for the transmitting link.
struct SlotFeedback {
    bool decoded = false;
};

class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// log2(1 + P*gamma / (1 + estimate)).
double estimated_capacity(double power, double gamma, double interference_estimate);

/// Slot decision from local CSI and the current interference estimates.
///
/// Links are ranked by mu*C1e versus (1-mu)*C2e with ties going to link 1.
/// A link whose estimated capacity supports none of its rates cannot
/// transmit; if the winner is in that situation the other link is used when
/// it has a supported rate, otherwise the slot is silent.
///
/// `slot` is the 1-based index of the slot being decided and must equal
/// state.slot_count + 1.
SlotDecision decide_unknown(const UnknownIciConfig& config,
                            const EstimatorState& state,
                            const std::array<double, 2>& powers,
                            double gamma_1,
                            double gamma_2,
                            std::uint64_t slot);

/// Folds one slot into the estimator. `feedback` must be present exactly when
/// the decision transmits. Both gains are needed because every link's
/// estimated capacity is tracked every slot.
EstimatorState update_estimator(const EstimatorState& state,
                                const UnknownIciConfig& config,
                                const SlotDecision& decision,
                                const std::optional<SlotFeedback>& feedback,
                                const std::array<double, 2>& powers,
                                double gamma_1,
                                double gamma_2);

/// Scheduler object owning its estimator state; one per simulated subnetwork.
class UnknownIciScheduler {
public:
    explicit UnknownIciScheduler(UnknownIciConfig config);

    SlotDecision decide(const std::array<double, 2>& powers, double gamma_1, double gamma_2) const;
    void observe(const SlotDecision& decision,
                 const std::optional<SlotFeedback>& feedback,
                 const std::array<double, 2>& powers,
                 double gamma_1,
                 double gamma_2);

    const EstimatorState& state() const noexcept { return state_; }
    const UnknownIciConfig& config() const noexcept { return config_; }

private:
    UnknownIciConfig config_;
    EstimatorState state_;
};

} // namespace dtfdd
