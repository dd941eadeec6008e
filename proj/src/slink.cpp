#include "treemst/slink.hpp"

#include "treemst/emst.hpp"
#include "treemst/errors.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>

namespace treemst {

namespace {

void require_spanning_tree(const EdgeList& mst, std::size_t n) {
    if (n == 0)
        throw ContractViolation("single linkage: no points");
    if (mst.edges.size() + 1 != n)
        throw ContractViolation("single linkage: " + std::to_string(mst.edges.size()) + " edges cannot span " +
                                std::to_string(n) + " points");
    DisjointSet dsu(n);
    for (const Edge& e : mst.edges) {
        if (e.u >= n || e.v >= n)
            throw ContractViolation("single linkage: edge endpoint outside 0.." + std::to_string(n - 1));
        if (!dsu.unite(e.u, e.v))
            throw ContractViolation("single linkage: edges contain a cycle");
    }
}

} // namespace

Dendrogram dendrogram(const EdgeList& mst, std::size_t n) {
    require_spanning_tree(mst, n);
    const EdgeList sorted = mst.normalized();
    Dendrogram steps;
    steps.reserve(sorted.edges.size());
    std::size_t components = n;
    for (const Edge& e : sorted.edges)
        steps.push_back(MergeStep{e, components--});
    return steps;
}

ClusterLabels canonicalize(const std::vector<std::size_t>& raw) {
    constexpr std::size_t unseen = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> mapping;
    ClusterLabels labels(raw.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] >= mapping.size())
            mapping.resize(raw[i] + 1, unseen);
        if (mapping[raw[i]] == unseen)
            mapping[raw[i]] = next++;
        labels[i] = mapping[raw[i]];
    }
    return labels;
}

ClusterLabels single_linkage(const EdgeList& mst, std::size_t n, std::size_t k) {
    if (k < 1 || k > n)
        throw InvalidArgument("single_linkage: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    const Dendrogram steps = dendrogram(mst, n);
    DisjointSet dsu(n);
    for (std::size_t i = 0; i + k < n; ++i)
        dsu.unite(steps[i].edge.u, steps[i].edge.v);
    std::vector<std::size_t> roots(n);
    for (PointId i = 0; i < n; ++i)
        roots[i] = dsu.find(i);
    return canonicalize(roots);
}

void write_labels(const ClusterLabels& labels, std::ostream& out) {
    std::string line;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        line = std::to_string(i);
        line += ',';
        line += std::to_string(labels[i]);
        line += '\n';
        out << line;
    }
}

} // namespace treemst
