#ifndef OWLINK_RANKING_HPP
#define OWLINK_RANKING_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "owlink/core.hpp"

namespace owlink {

struct RankedItem {
    Index id = 0;
    double score = 0.0;

    friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

/// Items ordered by (score desc, id asc) without duplicate ids.
class RankedList {
public:
    RankedList() = default;
    /// Sorts `items`; throws std::invalid_argument on duplicate ids.
    static RankedList from_scores(std::vector<RankedItem> items);
    /// Pairs ids[i] with scores[i].
    static RankedList from_scores(std::span<const Index> ids, std::span<const double> scores);
    /// Keeps the given order; throws std::invalid_argument on duplicate ids.
    static RankedList from_ordered(std::vector<RankedItem> items);

    /// Same order with scores replaced by their softmax. Order is kept even
    /// where tiny probabilities underflow to equal values.
    RankedList softmax() const;

    const std::vector<RankedItem>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    const RankedItem& operator[](std::size_t i) const { return items_[i]; }

    friend bool operator==(const RankedList&, const RankedList&) = default;

private:
    std::vector<RankedItem> items_;
};

inline bool ranks_before(const RankedItem& a, const RankedItem& b) {
    return a.score > b.score || (a.score == b.score && a.id < b.id);
}

struct FilteredRank {
    std::size_t rank = 0;  // 1-based; size of the filtered list + 1 when missing
    bool found = false;
};

/// Removes truths other than `target` from the list and returns the
/// target's 1-based position. Throws std::invalid_argument when `target`
/// is not one of `truths`.
FilteredRank target_filtered_rank(const RankedList& ranking, std::span<const Index> truths, Index target);

}  // namespace owlink

#endif
