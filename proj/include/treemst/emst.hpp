#pragma once

#include "treemst/balltree.hpp"
#include "treemst/core.hpp"
#include "treemst/kdtree.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace treemst {

/// Union-find with path compression and union by rank.
class DisjointSet {
public:
    explicit DisjointSet(std::size_t n);

    PointId find(PointId x);
    /// Joins the sets of a and b; returns false when they were already joined.
    bool unite(PointId a, PointId b);

    std::size_t size() const noexcept { return parent_.size(); }
    std::size_t component_count() const noexcept { return components_; }

private:
    std::vector<PointId> parent_;
    std::vector<unsigned char> rank_;
    std::size_t components_;
};

/// Best outgoing edge per component, indexed by the component's root id.
/// Non-root entries are always empty.
using ComponentCandidates = std::vector<std::optional<Edge>>;

enum class Backend { kd, ball };

std::string_view to_string(Backend backend);
Backend parse_backend(std::string_view name);

struct BoruvkaStats {
    std::size_t rounds = 0;
};

/// One dual-tree pass of the index against itself that finds, for every
/// component of `dsu`, its nearest point in any other component under the
/// (weight, min id, max id) order.
///
/// `dsu` must span the index's id range and have at least two components;
/// otherwise ContractViolation is thrown.
ComponentCandidates find_component_neighbors(const KdTree& index, DisjointSet& dsu);
ComponentCandidates find_component_neighbors(const BallTree& index, DisjointSet& dsu);

/// Euclidean MST by Boruvka rounds whose candidate edges come from dual-tree
/// traversals of a kd-tree or ball-tree built once over `ds`.
EdgeList dual_tree_boruvka(const Dataset& ds, Backend backend,
                           std::size_t leaf_capacity = KdTree::default_leaf_capacity,
                           BoruvkaStats* stats = nullptr);

/// Boruvka with an all-pairs scan per round. O(n^2) per round.
EdgeList naive_boruvka(const Dataset& ds, BoruvkaStats* stats = nullptr);

/// Kruskal over the complete graph. Materializes n(n-1)/2 edges.
EdgeList kruskal_mst(const Dataset& ds);

/// "u,v,weight" per edge (17 significant digits) in ascending total order,
/// then "# total_weight=<value>".
void write_edges(const EdgeList& mst, std::ostream& out);

/// Reads the format produced by write_edges. Throws ParseError.
EdgeList read_edges(std::istream& in);

} // namespace treemst
