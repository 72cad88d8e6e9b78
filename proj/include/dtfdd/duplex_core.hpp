#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace dtfdd {

/// Ordered, strictly increasing set of positive rates (bits/symbol) for one
/// link. Copies share the same immutable storage.
class RateSet {
public:
    RateSet() : RateSet(std::vector<double>{1.0}) {}
    explicit RateSet(std::vector<double> rates);

    /// {R, 2R, ..., levels*R}
    static RateSet uniform(std::size_t levels, double base_rate);

    std::size_t size() const noexcept { return rates_->size(); }
    double operator[](std::size_t i) const { return (*rates_)[i]; }
    double max() const noexcept { return rates_->back(); }
    std::span<const double> values() const noexcept { return *rates_; }

    friend bool operator==(const RateSet& a, const RateSet& b) { return *a.rates_ == *b.rates_; }

private:
    std::shared_ptr<const std::vector<double>> rates_;
};

enum class LinkState : std::uint8_t { silence, u1_transmit, u2_transmit };

std::string_view to_string(LinkState state);

/// One slot's state and rate choice. At most one link is active; the rate
/// index (0-based) exists iff a link transmits.
class SlotDecision {
public:
    static SlotDecision silence() { return SlotDecision(LinkState::silence, 0); }
    static SlotDecision u1(std::size_t rate_index) { return SlotDecision(LinkState::u1_transmit, rate_index); }
    static SlotDecision u2(std::size_t rate_index) { return SlotDecision(LinkState::u2_transmit, rate_index); }
    static SlotDecision transmit(int link, std::size_t rate_index) { return link == 0 ? u1(rate_index) : u2(rate_index); }

    LinkState state() const noexcept { return state_; }
    bool is_silent() const noexcept { return state_ == LinkState::silence; }
    /// 0 for U1, 1 for U2, -1 for silence.
    int active_link() const noexcept
    {
        return state_ == LinkState::u1_transmit ? 0 : state_ == LinkState::u2_transmit ? 1 : -1;
    }
    std::optional<std::size_t> rate_index() const
    {
        if (is_silent()) {
            return std::nullopt;
        }
        return rate_index_;
    }

    friend bool operator==(const SlotDecision&, const SlotDecision&) = default;

private:
    SlotDecision(LinkState s, std::size_t idx) : state_(s), rate_index_(idx) {}

    LinkState state_;
    std::size_t rate_index_;
};

/// Per-rate decodability flags (1 = capacity supports the rate).
class OutageFlags {
public:
    OutageFlags() = default;
    explicit OutageFlags(std::vector<std::uint8_t> flags) : flags_(std::move(flags)) {}

    std::size_t size() const noexcept { return flags_.size(); }
    bool operator[](std::size_t i) const { return flags_[i] != 0; }
    bool any() const noexcept;
    /// Highest decodable index; empty when nothing decodes.
    std::optional<std::size_t> highest_decodable() const noexcept;
    std::span<const std::uint8_t> values() const noexcept { return flags_; }

    friend bool operator==(const OutageFlags&, const OutageFlags&) = default;

private:
    std::vector<std::uint8_t> flags_;
};

/// 1 iff capacity >= rate (boundary inclusive).
inline bool outage_indicator(double capacity, double rate) noexcept { return capacity >= rate; }

OutageFlags flags_for(double capacity, const RateSet& rates);

} // namespace dtfdd
