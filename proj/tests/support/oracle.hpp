#pragma once

// Independent oracles for the recall-equalizing allocation, kept apart from
// the library implementation on purpose: recall values are exact fractions
// here and the balanced allocation is found by exhaustive enumeration, not by
// the merge. Only rank() is shared, since the property under test is the
// allocation, not the ordering.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "equitop/cohort.hpp"
#include "equitop/metrics.hpp"

namespace equitop::testing {

/// Exact rational, denominator > 0.
struct Frac {
    long long num = 0;
    long long den = 1;

    friend bool operator<(const Frac& a, const Frac& b) { return a.num * b.den < b.num * a.den; }
    friend bool operator==(const Frac& a, const Frac& b) { return a.num * b.den == b.num * a.den; }
    friend bool operator<=(const Frac& a, const Frac& b) { return !(b < a); }
    friend Frac operator-(const Frac& a, const Frac& b) {
        return {a.num * b.den - b.num * a.den, a.den * b.den};
    }
};

struct GroupCurve {
    std::string group;
    std::vector<std::size_t> cum_positives;  // cumulative positives at depth i+1
    std::size_t positives = 0;

    /// Exact recall at a depth; the zero-positive convention is the constant 1.
    Frac recall_at(std::size_t depth) const {
        if (positives == 0) return {1, 1};
        if (depth == 0) return {0, 1};
        return {static_cast<long long>(cum_positives[depth - 1]),
                static_cast<long long>(positives)};
    }
    std::size_t size() const { return cum_positives.size(); }
};

inline std::vector<GroupCurve> group_curves(const RankedList& ranked) {
    std::map<std::string, GroupCurve> curves;
    for (const auto& e : ranked.entries) {
        auto& c = curves[e.group];
        c.group = e.group;
        c.positives += static_cast<std::size_t>(e.label);
        c.cum_positives.push_back(c.positives);
    }
    std::vector<GroupCurve> out;
    for (auto& [name, c] : curves) out.push_back(std::move(c));
    return out;
}

inline Frac allocation_spread(const std::vector<GroupCurve>& curves,
                              const std::vector<std::size_t>& alloc) {
    Frac lo{1, 1};
    Frac hi{0, 1};
    for (std::size_t g = 0; g < curves.size(); ++g) {
        const Frac r = curves[g].recall_at(alloc[g]);
        if (r < lo) lo = r;
        if (hi < r) hi = r;
    }
    return lo < hi ? hi - lo : Frac{0, 1};
}

/// Minimum recall spread over every integer allocation with sum k, by
/// exhaustive enumeration, plus all allocations achieving it.
struct EnumerationResult {
    Frac min_spread{0, 1};
    std::vector<std::vector<std::size_t>> argmin;
};

inline EnumerationResult min_spread_enumeration(const std::vector<GroupCurve>& curves,
                                                std::size_t k) {
    EnumerationResult result;
    bool first = true;
    std::vector<std::size_t> alloc(curves.size(), 0);
    const std::size_t m = curves.size();

    auto recurse = [&](auto&& self, std::size_t g, std::size_t remaining) -> void {
        if (g + 1 == m) {
            if (remaining > curves[g].size()) return;
            alloc[g] = remaining;
            const Frac spread = allocation_spread(curves, alloc);
            if (first || spread < result.min_spread) {
                first = false;
                result.min_spread = spread;
                result.argmin.clear();
            }
            if (spread == result.min_spread) result.argmin.push_back(alloc);
            return;
        }
        const std::size_t cap = std::min(remaining, curves[g].size());
        for (std::size_t kg = 0; kg <= cap; ++kg) {
            alloc[g] = kg;
            self(self, g + 1, remaining - kg);
        }
    };
    recurse(recurse, 0, k);
    return result;
}

/// Independent "k smallest annotated recall values" selection: annotates
/// every ranked entry with (recall value as a fraction, within-group rank,
/// tie hash, entity id) tuples and sorts them wholesale.
struct AnnotatedEntity {
    Frac recall;
    std::size_t rank_in_group;
    uint64_t tie_key;
    std::string entity_id;
    std::string group;
};

inline std::vector<AnnotatedEntity> k_smallest_annotated(const RankedList& ranked, std::size_t k) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> depth_and_found;
    std::map<std::string, std::size_t> positives;
    for (const auto& e : ranked.entries) positives[e.group] += static_cast<std::size_t>(e.label);

    std::vector<AnnotatedEntity> annotated;
    annotated.reserve(ranked.size());
    for (const auto& e : ranked.entries) {
        auto& [depth, found] = depth_and_found[e.group];
        depth += 1;
        found += static_cast<std::size_t>(e.label);
        const std::size_t p = positives[e.group];
        const Frac r = p == 0 ? Frac{1, 1}
                              : Frac{static_cast<long long>(found), static_cast<long long>(p)};
        annotated.push_back({r, depth, e.tie_key, e.entity_id, e.group});
    }
    std::stable_sort(annotated.begin(), annotated.end(),
                     [](const AnnotatedEntity& a, const AnnotatedEntity& b) {
                         if (!(a.recall == b.recall)) return a.recall < b.recall;
                         return std::tie(a.rank_in_group, a.tie_key, a.entity_id) <
                                std::tie(b.rank_in_group, b.tie_key, b.entity_id);
                     });
    annotated.resize(std::min(k, annotated.size()));
    return annotated;
}

/// One recall step: max over positive-bearing groups of 1/positives.
inline std::optional<Frac> max_recall_step(const std::vector<GroupCurve>& curves) {
    std::optional<Frac> step;
    for (const auto& c : curves) {
        if (c.positives == 0) continue;
        const Frac s{1, static_cast<long long>(c.positives)};
        if (!step || *step < s) step = s;
    }
    return step;
}

}  // namespace equitop::testing
