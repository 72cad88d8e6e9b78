#include "dtfdd/scheduler_known_ici.hpp"

#include <stdexcept>

namespace dtfdd {

void KnownIciConfig::validate() const
{
    if (!(mu >= 0.0 && mu <= 1.0)) {
        throw std::invalid_argument("mu must lie in [0, 1]");
    }
}

namespace {

struct BestRate {
    double score = 0.0;
    std::size_t index = 0;
};

template <typename Decodable>
BestRate best_rate(double weight, const RateSet& rates, Decodable decodable)
{
    BestRate best{-1.0, 0};
    for (std::size_t m = 0; m < rates.size(); ++m) {
        const double score = decodable(m) ? weight * rates[m] : 0.0;
        if (score >= best.score) {
            best = {score, m};
        }
    }
    return best;
}

SlotDecision select(const BestRate& b1, const BestRate& b2)
{
    if (b1.score >= b2.score && b1.score > 0.0) {
        return SlotDecision::u1(b1.index);
    }
    if (b2.score > b1.score && b2.score > 0.0) {
        return SlotDecision::u2(b2.index);
    }
    return SlotDecision::silence();
}

} // namespace

SlotDecision decide_known(const KnownIciConfig& config, const OutageFlags& flags_1, const OutageFlags& flags_2)
{
    if (flags_1.size() != config.rates_1.size() || flags_2.size() != config.rates_2.size()) {
        throw std::invalid_argument("outage flags do not match rate set sizes");
    }
    const auto b1 = best_rate(config.mu, config.rates_1, [&](std::size_t m) { return flags_1[m]; });
    const auto b2 = best_rate(1.0 - config.mu, config.rates_2, [&](std::size_t l) { return flags_2[l]; });
    return select(b1, b2);
}

SlotDecision decide_known(const KnownIciConfig& config, double capacity_1, double capacity_2)
{
    const auto& r1 = config.rates_1;
    const auto& r2 = config.rates_2;
    const auto b1 = best_rate(config.mu, r1, [&](std::size_t m) { return outage_indicator(capacity_1, r1[m]); });
    const auto b2 = best_rate(1.0 - config.mu, r2, [&](std::size_t l) { return outage_indicator(capacity_2, r2[l]); });
    return select(b1, b2);
}

} // namespace dtfdd
