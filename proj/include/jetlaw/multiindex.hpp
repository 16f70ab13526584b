#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace jetlaw {

using VarId = std::uint32_t;
inline constexpr VarId kNoVar = 0xffffffffu;

/// Sparse multi-index: sorted (slot, count) pairs with count > 0.
/// Slots are variable ids (jet derivatives) or argument positions
/// (function-symbol derivatives); the container does not care.
class MultiIndex {
public:
    MultiIndex() = default;

    static MultiIndex unit(VarId slot) {
        MultiIndex j;
        j.entries_.emplace_back(slot, 1u);
        return j;
    }

    bool empty() const { return entries_.empty(); }
    std::uint32_t order() const {
        std::uint32_t s = 0;
        for (auto& [k, v] : entries_) s += v;
        return s;
    }
    std::uint32_t get(VarId slot) const {
        for (auto& [k, v] : entries_)
            if (k == slot) return v;
        return 0;
    }

    MultiIndex bumped(VarId slot, std::uint32_t by = 1) const;
    /// Componentwise difference; throws std::invalid_argument unless other <= *this.
    MultiIndex minus(const MultiIndex& other) const;
    MultiIndex plus(const MultiIndex& other) const;
    bool contains(const MultiIndex& other) const; // componentwise >=

    /// Entries restricted to the given slots / with the given slots removed.
    MultiIndex restrict_to(const std::vector<VarId>& slots) const;
    MultiIndex without(const std::vector<VarId>& slots) const;

    const std::vector<std::pair<VarId, std::uint32_t>>& entries() const { return entries_; }

    bool operator==(const MultiIndex& o) const { return entries_ == o.entries_; }
    bool operator!=(const MultiIndex& o) const { return !(*this == o); }
    bool operator<(const MultiIndex& o) const { return entries_ < o.entries_; }

    static MultiIndex from_pairs(std::vector<std::pair<VarId, std::uint32_t>> e);

private:
    std::vector<std::pair<VarId, std::uint32_t>> entries_;
};

} // namespace jetlaw
