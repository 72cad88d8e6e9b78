#include "dtfdd/benchmarks.hpp"

#include <cmath>
#include <stdexcept>

#include "dtfdd/channel_model.hpp"

namespace dtfdd {

void StaticTddConfig::validate() const
{
    if (!(mu >= 0.0 && mu <= 1.0)) {
        throw std::invalid_argument("static-TDD mu must lie in [0, 1]");
    }
    if (!(rate_1 > 0.0) || !(rate_2 > 0.0)) {
        throw std::invalid_argument("static-TDD rates must be > 0");
    }
}

SlotDecision decide_static(const StaticTddConfig& config, std::uint64_t slot, std::uint64_t horizon)
{
    if (slot < 1 || slot > horizon) {
        throw std::out_of_range("static-TDD slot outside [1, horizon]");
    }
    // Small slack so that e.g. 0.9 * 10 counts as 9 slots.
    const double boundary = std::floor(config.mu * static_cast<double>(horizon) + 1e-9);
    return static_cast<double>(slot) <= boundary ? SlotDecision::u1(0) : SlotDecision::u2(0);
}

bool static_outage_indicator(double power, double fraction, double gamma, double gamma_i, double rate, bool literal)
{
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("static-TDD fraction must lie in (0, 1]");
    }
    return capacity(power / fraction, gamma, literal ? 0.0 : gamma_i) >= rate;
}

} // namespace dtfdd
