#pragma once

#include "treemst/core.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace treemst {

struct MergeStep {
    Edge edge;
    std::size_t components_before = 0;

    friend bool operator==(const MergeStep&, const MergeStep&) = default;
};

/// Single-linkage merge sequence: the MST edges in ascending total order.
using Dendrogram = std::vector<MergeStep>;

/// Cluster index per point id. Labels are canonical: the cluster holding the
/// smallest id is 0, the cluster holding the next smallest unseen id is 1, ...
using ClusterLabels = std::vector<std::size_t>;

/// Throws ContractViolation unless `mst` is a spanning tree over ids 0..n-1.
Dendrogram dendrogram(const EdgeList& mst, std::size_t n);

/// Cuts the k-1 heaviest MST edges. Throws InvalidArgument unless 1 <= k <= n.
ClusterLabels single_linkage(const EdgeList& mst, std::size_t n, std::size_t k);

/// Relabels arbitrary cluster ids into canonical order.
ClusterLabels canonicalize(const std::vector<std::size_t>& raw);

/// "point_id,cluster_label" lines in ascending point id order.
void write_labels(const ClusterLabels& labels, std::ostream& out);

} // namespace treemst
