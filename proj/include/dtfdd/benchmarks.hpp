#pragma once

#include <cstdint>

#include "dtfdd/duplex_core.hpp"

namespace dtfdd {

/// Static TDD: link 1 owns the first mu*T slots, link 2 the rest, each at a
/// single fixed rate.
struct StaticTddConfig {
    double mu = 0.5;
    double rate_1 = 1.0;
    double rate_2 = 1.0;
    /// Evaluate outage without the interference term (as the textbook
    /// static-TDD indicator is written). Off by default.
    bool literal_outage = false;

    void validate() const;
    double fraction(int link) const { return link == 0 ? mu : 1.0 - mu; }
    double rate(int link) const { return link == 0 ? rate_1 : rate_2; }
};

/// `slot` is 1-based, 1 <= slot <= horizon.
SlotDecision decide_static(const StaticTddConfig& config, std::uint64_t slot, std::uint64_t horizon);

/// Decodability with power concentrated into the link's active fraction:
/// log2(1 + (P/fraction) * gamma / (1 + gamma_i)) >= rate.
bool static_outage_indicator(double power, double fraction, double gamma, double gamma_i, double rate,
                             bool literal = false);

} // namespace dtfdd
