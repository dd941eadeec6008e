#pragma once

#include "treemst/core.hpp"
#include "treemst/errors.hpp"

#include <algorithm>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace treemst::detail {

/// Id-indexed coordinate storage with live flags, owned by a spatial index so
/// that points inserted after the build need not belong to the original dataset.
class PointStore {
public:
    PointStore() = default;

    explicit PointStore(const Dataset& ds)
        : d_(ds.dim()), coords_(ds.flat().begin(), ds.flat().end()), live_(ds.size(), 1) {}

    std::size_t dim() const noexcept { return d_; }
    std::size_t slots() const noexcept { return live_.size(); }

    const double* data(PointId id) const noexcept { return coords_.data() + static_cast<std::size_t>(id) * d_; }
    std::span<const double> coords(PointId id) const noexcept { return {data(id), d_}; }

    bool live(PointId id) const noexcept { return id < live_.size() && live_[id] != 0; }
    void set_live(PointId id, bool value) noexcept { live_[id] = value ? 1 : 0; }

    void put(PointId id, std::span<const double> coords) {
        if (id >= live_.size()) {
            live_.resize(static_cast<std::size_t>(id) + 1, 0);
            coords_.resize(live_.size() * d_, 0.0);
        }
        std::copy(coords.begin(), coords.end(), coords_.begin() + static_cast<std::ptrdiff_t>(id) * d_);
    }

    void check_dim(std::size_t d, const char* what) const {
        if (d != d_)
            throw ContractViolation(std::string(what) + ": dimension mismatch (tree " + std::to_string(d_) +
                                    ", point " + std::to_string(d) + ")");
    }

private:
    std::size_t d_ = 0;
    std::vector<double> coords_;
    std::vector<unsigned char> live_;
};

/// Bounded max-heap of the k best neighbors under (distance, id).
class KnnCollector {
public:
    explicit KnnCollector(std::size_t k) : k_(k) { heap_.reserve(k); }

    bool full() const noexcept { return heap_.size() == k_; }

    /// Current k-th best distance, or +inf while fewer than k are held.
    double bound() const noexcept {
        return full() ? heap_.front().distance : std::numeric_limits<double>::infinity();
    }

    void offer(PointId id, double distance) {
        const Neighbor cand{id, distance};
        if (!full()) {
            heap_.push_back(cand);
            std::push_heap(heap_.begin(), heap_.end());
        } else if (cand < heap_.front()) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = cand;
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    NeighborList take() && {
        std::sort_heap(heap_.begin(), heap_.end());
        return std::move(heap_);
    }

private:
    std::size_t k_;
    NeighborList heap_;
};

} // namespace treemst::detail
