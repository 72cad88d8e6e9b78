#pragma once

#include <optional>
#include <span>

#include "dtfdd/channel_model.hpp"

namespace dtfdd {

/// Erlang(K, scale) density: z^(K-1) e^(-z/scale) / (scale^K (K-1)!).
double erlang_pdf(double z, int shape, double scale);

/// Erlang(K, scale) CDF: 1 - sum_{n<K} e^(-z/scale) (z/scale)^n / n!.
double erlang_cdf(double z, int shape, double scale);

/// E{(1 + gamma_i1)(1 + gamma_i2)} in closed form for the model's
/// correlation mode.
double interference_cross_moment(const InterferenceModel& model);

/// Sample estimate of E{(1 + gamma_i1)(1 + gamma_i2)}.
double interference_cross_moment(std::span<const InterferencePair> samples);

/// Inputs shared by the high-power outage asymptotes (single rate R0 on both
/// links, mu = 1/2, equal powers, iid Rayleigh links).
struct AsymptoticInputs {
    double rate = 1.0;      ///< R0, bits/symbol
    double power = 1.0;     ///< per-link transmit power P
    double mean_gain = 1.0; ///< E{|h|^2 / sigma^2} of either link
    InterferenceModel interference;
    /// Converged interference estimates of the unknown-ICI scheduler.
    double estimate_1 = 0.0;
    double estimate_2 = 0.0;
    /// Overrides the closed-form cross moment, e.g. with a sample estimate.
    std::optional<double> cross_moment;

    void validate() const;
    /// (2^R0 - 1) / P
    double threshold() const;
};

/// Known-ICI outage asymptote threshold^2 * E{(1+gi1)(1+gi2)} / mean_gain^2.
double outage_known_ici_asymptotic(const AsymptoticInputs& inputs);

struct UnknownIciOutage {
    double link_1 = 0.0; ///< link 1 chosen and fails
    double link_2 = 0.0; ///< link 2 chosen and fails
    double silent = 0.0; ///< both links judged undecodable
    double total = 0.0;
};

/// Per-link interference factor of the unknown-ICI asymptote:
///   scale * (1+other)/(1+own) * sum_{n<K} e^-a [S_n(a) + (n+1) scale S_{n+1}(a)]
/// with a = own/scale and S_n the truncated exponential series.
double unknown_ici_link_factor(double own_estimate, double other_estimate, int shape, double scale);

/// Unknown-ICI outage asymptote, split into its three events.
UnknownIciOutage outage_unknown_ici_asymptotic(const AsymptoticInputs& inputs);

} // namespace dtfdd
