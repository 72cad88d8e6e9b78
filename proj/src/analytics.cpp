#include "dtfdd/analytics.hpp"

#include <cmath>
#include <stdexcept>

namespace dtfdd {

namespace {

void check_erlang_args(double z, int shape, double scale)
{
    if (!(z >= 0.0) || shape < 1 || !(scale > 0.0)) {
        throw std::invalid_argument("erlang: need z >= 0, K >= 1, scale > 0");
    }
}

/// sum_{i=0}^{n} x^i / i!
double truncated_exp_series(double x, int n)
{
    double term = 1.0;
    double sum = 1.0;
    for (int i = 1; i <= n; ++i) {
        term *= x / i;
        sum += term;
    }
    return sum;
}

} // namespace

double erlang_pdf(double z, int shape, double scale)
{
    check_erlang_args(z, shape, scale);
    const double x = z / scale;
    return std::pow(x, shape - 1) * std::exp(-x) / (scale * std::tgamma(static_cast<double>(shape)));
}

double erlang_cdf(double z, int shape, double scale)
{
    check_erlang_args(z, shape, scale);
    const double x = z / scale;
    return 1.0 - std::exp(-x) * truncated_exp_series(x, shape - 1);
}

double interference_cross_moment(const InterferenceModel& model)
{
    model.validate();
    const double k = model.num_interferers;
    const double w = model.per_interferer_mean;
    if (model.correlation == CorrelationMode::independent) {
        return (1.0 + k * w) * (1.0 + k * w);
    }
    // E{(1+Z)^2} with E{Z^2} = K(K+1) w^2
    return 1.0 + 2.0 * k * w + k * (k + 1.0) * w * w;
}

double interference_cross_moment(std::span<const InterferencePair> samples)
{
    if (samples.empty()) {
        throw std::invalid_argument("cross moment needs at least one sample");
    }
    double sum = 0.0;
    for (const auto& s : samples) {
        sum += (1.0 + s.gamma_i1) * (1.0 + s.gamma_i2);
    }
    return sum / static_cast<double>(samples.size());
}

void AsymptoticInputs::validate() const
{
    if (!(power > 0.0) || !(rate > 0.0) || !(mean_gain > 0.0)) {
        throw std::invalid_argument("asymptotic inputs need P > 0, R0 > 0, mean_gain > 0");
    }
    if (interference.num_interferers < 1) {
        throw std::invalid_argument("asymptotic inputs need K >= 1");
    }
    interference.validate();
    if (!(estimate_1 >= 0.0) || !(estimate_2 >= 0.0)) {
        throw std::invalid_argument("interference estimates must be >= 0");
    }
}

double AsymptoticInputs::threshold() const
{
    return (std::exp2(rate) - 1.0) / power;
}

double outage_known_ici_asymptotic(const AsymptoticInputs& inputs)
{
    inputs.validate();
    const double th = inputs.threshold();
    const double moment = inputs.cross_moment ? *inputs.cross_moment : interference_cross_moment(inputs.interference);
    return th * th * moment / (inputs.mean_gain * inputs.mean_gain);
}

double unknown_ici_link_factor(double own_estimate, double other_estimate, int shape, double scale)
{
    if (shape < 1) {
        throw std::invalid_argument("unknown-ICI factor needs K >= 1");
    }
    if (scale == 0.0) {
        // No interference: the estimate can only overstate it, so no failures.
        return 0.0;
    }
    const double a = own_estimate / scale;
    const double ea = std::exp(-a);
    double sum = 0.0;
    for (int n = 0; n < shape; ++n) {
        sum += ea * (truncated_exp_series(a, n) + (n + 1) * scale * truncated_exp_series(a, n + 1));
    }
    return scale * (1.0 + other_estimate) / (1.0 + own_estimate) * sum;
}

UnknownIciOutage outage_unknown_ici_asymptotic(const AsymptoticInputs& inputs)
{
    inputs.validate();
    const double th = inputs.threshold();
    const double norm = th * th / (inputs.mean_gain * inputs.mean_gain);
    const int k = inputs.interference.num_interferers;
    const double w = inputs.interference.per_interferer_mean;

    UnknownIciOutage out;
    out.link_1 = norm * unknown_ici_link_factor(inputs.estimate_1, inputs.estimate_2, k, w);
    out.link_2 = norm * unknown_ici_link_factor(inputs.estimate_2, inputs.estimate_1, k, w);
    out.silent = norm * (1.0 + inputs.estimate_1) * (1.0 + inputs.estimate_2);
    out.total = out.link_1 + out.link_2 + out.silent;
    return out;
}

} // namespace dtfdd
