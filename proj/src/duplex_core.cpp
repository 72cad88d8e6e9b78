#include "dtfdd/duplex_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dtfdd {

RateSet::RateSet(std::vector<double> rates)
{
    if (rates.empty()) {
        throw std::invalid_argument("rate set must not be empty");
    }
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (!(rates[i] > 0.0) || !std::isfinite(rates[i])) {
            throw std::invalid_argument("rates must be finite and > 0");
        }
        if (i > 0 && !(rates[i] > rates[i - 1])) {
            throw std::invalid_argument("rates must be strictly increasing");
        }
    }
    rates_ = std::make_shared<const std::vector<double>>(std::move(rates));
}

RateSet RateSet::uniform(std::size_t levels, double base_rate)
{
    if (levels == 0) {
        throw std::invalid_argument("rate set must have at least one level");
    }
    std::vector<double> rates(levels);
    for (std::size_t j = 0; j < levels; ++j) {
        rates[j] = static_cast<double>(j + 1) * base_rate;
    }
    return RateSet(std::move(rates));
}

std::string_view to_string(LinkState state)
{
    switch (state) {
    case LinkState::silence:
        return "silence";
    case LinkState::u1_transmit:
        return "u1_transmit";
    case LinkState::u2_transmit:
        return "u2_transmit";
    }
    return "?";
}

bool OutageFlags::any() const noexcept
{
    return std::any_of(flags_.begin(), flags_.end(), [](auto f) { return f != 0; });
}

std::optional<std::size_t> OutageFlags::highest_decodable() const noexcept
{
    for (std::size_t i = flags_.size(); i-- > 0;) {
        if (flags_[i] != 0) {
            return i;
        }
    }
    return std::nullopt;
}

OutageFlags flags_for(double capacity, const RateSet& rates)
{
    std::vector<std::uint8_t> flags(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i) {
        flags[i] = outage_indicator(capacity, rates[i]) ? 1 : 0;
    }
    return OutageFlags(std::move(flags));
}

} // namespace dtfdd
