#pragma once

#include "treemst/core.hpp"
#include "treemst/detail/point_store.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace treemst {

/// Closed axis-aligned box. An empty box has mins = +inf and maxs = -inf.
struct BoundingBox {
    std::vector<double> mins;
    std::vector<double> maxs;

    static BoundingBox empty(std::size_t d);

    std::size_t dim() const noexcept { return mins.size(); }
    bool is_empty() const noexcept { return mins.empty() || mins[0] > maxs[0]; }
    void expand(std::span<const double> p);
    bool contains(std::span<const double> p) const;
};

/// Distance from q to the nearest point of the box; 0 when q is inside.
double box_min_distance(const BoundingBox& box, std::span<const double> q);

/// Smallest distance between any point of `a` and any point of `b`.
double box_box_min_distance(const BoundingBox& a, const BoundingBox& b);

/// kd-tree with bucket leaves, median splits on the axis of widest spread,
/// tombstone deletion and threshold-triggered subtree rebuilds.
///
/// The tree owns a copy of its point coordinates, so inserted points are not
/// required to come from the build dataset. Reads may run concurrently;
/// mutations need exclusive access.
class KdTree {
public:
    static constexpr std::size_t default_leaf_capacity = 20;

    struct Node {
        BoundingBox box;
        std::size_t live = 0; // live points in the subtree
        std::size_t dead = 0; // tombstones in the subtree
        std::size_t split_dim = 0;
        double split_value = 0.0;
        std::unique_ptr<Node> left;
        std::unique_ptr<Node> right;
        std::vector<PointId> ids; // leaves only; includes tombstones
        Node* parent = nullptr;

        bool is_leaf() const noexcept { return !left; }
    };

    /// Throws InvalidArgument for an empty dataset or zero leaf capacity.
    explicit KdTree(const Dataset& ds, std::size_t leaf_capacity = default_leaf_capacity);

    KdTree(KdTree&&) noexcept = default;
    KdTree& operator=(KdTree&&) noexcept = default;

    /// Throws ContractViolation on a dimension mismatch and InvalidArgument
    /// when p.id is already live.
    void insert(const Point& p);

    /// Throws NotFound when `id` is not live.
    void remove(PointId id);

    /// Exact k nearest live points ordered by (distance, id).
    NeighborList knn(std::span<const double> q, std::size_t k) const;

    std::size_t size() const noexcept { return root_->live; }
    std::size_t dim() const noexcept { return store_.dim(); }
    std::size_t leaf_capacity() const noexcept { return leaf_capacity_; }
    std::size_t tombstones() const noexcept { return root_->dead; }

    const Node& root() const noexcept { return *root_; }
    std::span<const double> coords(PointId id) const noexcept { return store_.coords(id); }
    const double* data(PointId id) const noexcept { return store_.data(id); }
    bool is_live(PointId id) const noexcept { return store_.live(id); }

    /// Live ids in left-to-right leaf order.
    std::vector<PointId> leaf_order() const;
    /// Edges on the longest root-to-leaf path.
    std::size_t depth() const;

    /// Walks the whole structure and throws ContractViolation naming the first
    /// broken invariant (partition, box containment, counts, id uniqueness).
    void audit() const;

private:
    detail::PointStore store_;
    std::size_t leaf_capacity_;
    std::unique_ptr<Node> root_;
    std::vector<Node*> leaf_of_; // leaf currently holding each id, live or tombstoned

    std::unique_ptr<Node> build(std::span<PointId> ids, Node* parent);
    void rebuild(Node* node);
    void purge_tombstone(PointId id);
};

} // namespace treemst
