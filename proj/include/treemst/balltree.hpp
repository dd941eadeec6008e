#pragma once

#include "treemst/core.hpp"
#include "treemst/detail/point_store.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace treemst {

/// Result of scanning every axis for the cheapest split of a node.
struct SplitChoice {
    std::size_t dim = 0;
    double value = 0.0;
    double cost = 0.0;
    /// Points sent left, taken in (coordinate on dim, id) order.
    std::size_t left_count = 0;

    friend bool operator==(const SplitChoice&, const SplitChoice&) = default;
};

/// Sorts the points along each axis and evaluates, at every boundary position,
///
///     cost = n_left * r_left^2 + n_right * r_right^2
///
/// where r is half the child's extent along that axis. Returns the minimizer,
/// preferring the lowest axis and then the lowest position. When every axis
/// has zero extent the points are split half and half.
///
/// Throws InvalidArgument for fewer than two points.
SplitChoice choose_split(std::span<const PointId> ids, const Dataset& ds);

/// Ball tree: every node bounds its subtree by a hypersphere centred at the
/// centroid of the points it was built from. Deletion and rebuild policy match
/// KdTree.
class BallTree {
public:
    static constexpr std::size_t default_leaf_capacity = 20;

    struct Node {
        std::vector<double> center;
        double radius = 0.0;
        std::size_t live = 0;
        std::size_t dead = 0;
        std::unique_ptr<Node> left;
        std::unique_ptr<Node> right;
        std::vector<PointId> ids; // leaves only; includes tombstones
        Node* parent = nullptr;

        bool is_leaf() const noexcept { return !left; }
    };

    explicit BallTree(const Dataset& ds, std::size_t leaf_capacity = default_leaf_capacity);

    BallTree(BallTree&&) noexcept = default;
    BallTree& operator=(BallTree&&) noexcept = default;

    void insert(const Point& p);
    void remove(PointId id);
    NeighborList knn(std::span<const double> q, std::size_t k) const;

    std::size_t size() const noexcept { return root_->live; }
    std::size_t dim() const noexcept { return store_.dim(); }
    std::size_t leaf_capacity() const noexcept { return leaf_capacity_; }
    std::size_t tombstones() const noexcept { return root_->dead; }

    const Node& root() const noexcept { return *root_; }
    std::span<const double> coords(PointId id) const noexcept { return store_.coords(id); }
    const double* data(PointId id) const noexcept { return store_.data(id); }
    bool is_live(PointId id) const noexcept { return store_.live(id); }

    std::vector<PointId> leaf_order() const;

    /// Throws ContractViolation when a live point lies farther than
    /// radius + 1e-9 from any ancestor's center, or counts/ids are inconsistent.
    void audit() const;

private:
    detail::PointStore store_;
    std::size_t leaf_capacity_;
    std::unique_ptr<Node> root_;
    std::vector<Node*> leaf_of_;

    std::unique_ptr<Node> build(std::span<PointId> ids, Node* parent);
    void rebuild(Node* node);
    void purge_tombstone(PointId id);
};

/// max(0, |q - center| - radius). Throws ContractViolation on a dimension mismatch.
double ball_min_distance(const BallTree::Node& node, std::span<const double> q);

/// Lower bound on the distance between points of two balls.
double ball_ball_min_distance(const BallTree::Node& a, const BallTree::Node& b);

namespace detail {

/// Slack added to ball bounds before pruning. The radius and the bound are both
/// rounded, so the triangle inequality can be off by a few ulps.
inline double ball_prune_slack(double scale) { return 1e-12 * scale; }

} // namespace detail

} // namespace treemst
