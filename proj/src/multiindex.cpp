#include "jetlaw/multiindex.hpp"

#include <algorithm>

namespace jetlaw {

MultiIndex MultiIndex::from_pairs(std::vector<std::pair<VarId, std::uint32_t>> e) {
    std::sort(e.begin(), e.end());
    MultiIndex j;
    for (auto& [k, v] : e) {
        if (v == 0) continue;
        if (!j.entries_.empty() && j.entries_.back().first == k)
            j.entries_.back().second += v;
        else
            j.entries_.emplace_back(k, v);
    }
    return j;
}

MultiIndex MultiIndex::bumped(VarId slot, std::uint32_t by) const {
    auto e = entries_;
    e.emplace_back(slot, by);
    return from_pairs(std::move(e));
}

MultiIndex MultiIndex::plus(const MultiIndex& other) const {
    auto e = entries_;
    for (auto& [k, v] : other.entries_) e.emplace_back(k, v);
    return from_pairs(std::move(e));
}

bool MultiIndex::contains(const MultiIndex& other) const {
    for (auto& [k, v] : other.entries_)
        if (get(k) < v) return false;
    return true;
}

MultiIndex MultiIndex::minus(const MultiIndex& other) const {
    if (!contains(other)) throw std::invalid_argument("MultiIndex::minus: not componentwise <=");
    std::vector<std::pair<VarId, std::uint32_t>> e;
    for (auto& [k, v] : entries_) {
        std::uint32_t d = v - other.get(k);
        if (d) e.emplace_back(k, d);
    }
    return from_pairs(std::move(e));
}

MultiIndex MultiIndex::restrict_to(const std::vector<VarId>& slots) const {
    std::vector<std::pair<VarId, std::uint32_t>> e;
    for (auto& [k, v] : entries_)
        if (std::find(slots.begin(), slots.end(), k) != slots.end()) e.emplace_back(k, v);
    return from_pairs(std::move(e));
}

MultiIndex MultiIndex::without(const std::vector<VarId>& slots) const {
    std::vector<std::pair<VarId, std::uint32_t>> e;
    for (auto& [k, v] : entries_)
        if (std::find(slots.begin(), slots.end(), k) == slots.end()) e.emplace_back(k, v);
    return from_pairs(std::move(e));
}

} // namespace jetlaw
