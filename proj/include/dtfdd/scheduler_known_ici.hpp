#pragma once

#include "dtfdd/duplex_core.hpp"

namespace dtfdd {

/// Weight mu on link 1 (1 - mu on link 2) and both rate sets.
struct KnownIciConfig {
    double mu = 0.5;
    RateSet rates_1;
    RateSet rates_2;

    void validate() const;
};

/// Opportunistic state/rate selection with exact per-slot outage knowledge.
///
/// Each link scores its best rate by mu*R*O (resp. (1-mu)*R*O). Link 1 wins
/// ties, link 2 needs a strictly larger score, and the slot stays silent when
/// neither link has a positive score. Within a link, equal scores resolve to
/// the largest rate index.
SlotDecision decide_known(const KnownIciConfig& config, const OutageFlags& flags_1, const OutageFlags& flags_2);

/// Same rule evaluated directly from true capacities (no flag vectors).
SlotDecision decide_known(const KnownIciConfig& config, double capacity_1, double capacity_2);

} // namespace dtfdd
