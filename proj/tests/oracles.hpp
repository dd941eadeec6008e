#pragma once

// Test-only reference implementations. None of these share code paths with the
// library beyond euclidean_distance and the Edge/Neighbor orderings.

#include "treemst/core.hpp"
#include "treemst/emst.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace treemst::oracle {

/// Point set with arbitrary ids, mirroring what a mutated index should hold.
struct LiveSet {
    std::size_t d = 0;
    std::map<PointId, std::vector<double>> points;

    static LiveSet of(const Dataset& ds) {
        LiveSet s;
        s.d = ds.dim();
        for (PointId i = 0; i < ds.size(); ++i) {
            auto c = ds.coords(i);
            s.points[i] = std::vector<double>(c.begin(), c.end());
        }
        return s;
    }
};

/// O(n log n) scan: every live distance, fully sorted, first k kept.
inline NeighborList brute_knn(const LiveSet& set, std::span<const double> q, std::size_t k) {
    NeighborList all;
    for (const auto& [id, coords] : set.points)
        all.push_back(Neighbor{id, euclidean_distance(coords, q)});
    std::sort(all.begin(), all.end());
    if (all.size() > k)
        all.resize(k);
    return all;
}

/// Per component root, the best edge to any other component by exhaustive scan.
inline ComponentCandidates scan_candidates(const Dataset& ds, const std::vector<PointId>& label) {
    ComponentCandidates out(ds.size());
    for (PointId i = 0; i < ds.size(); ++i) {
        for (PointId j = 0; j < ds.size(); ++j) {
            if (label[i] == label[j])
                continue;
            const Edge e = Edge::between(i, j, euclidean_distance(ds.coords(i), ds.coords(j)));
            auto& slot = out[label[i]];
            if (!slot || e < *slot)
                slot = e;
        }
    }
    return out;
}

/// Agglomerative single linkage by repeated closest-cluster merging, O(n^3).
/// Returns the merge heights in order and the labels after each merge count.
struct NaiveSingleLinkage {
    std::vector<double> heights;
    /// labels_by_k[k] = raw cluster ids (smallest member id) when k clusters remain.
    std::vector<std::vector<std::size_t>> labels_by_k;
};

inline NaiveSingleLinkage naive_single_linkage(const Dataset& ds) {
    const std::size_t n = ds.size();
    std::vector<std::vector<PointId>> clusters(n);
    for (PointId i = 0; i < n; ++i)
        clusters[i] = {i};

    auto snapshot = [&] {
        std::vector<std::size_t> raw(n);
        for (const auto& c : clusters) {
            const PointId smallest = *std::min_element(c.begin(), c.end());
            for (PointId p : c)
                raw[p] = smallest;
        }
        return raw;
    };

    NaiveSingleLinkage result;
    result.labels_by_k.resize(n + 1);
    result.labels_by_k[n] = snapshot();
    while (clusters.size() > 1) {
        std::optional<Edge> best;
        std::size_t bi = 0, bj = 0;
        for (std::size_t a = 0; a < clusters.size(); ++a) {
            for (std::size_t b = a + 1; b < clusters.size(); ++b) {
                for (PointId p : clusters[a]) {
                    for (PointId q : clusters[b]) {
                        const Edge e = Edge::between(p, q, euclidean_distance(ds.coords(p), ds.coords(q)));
                        if (!best || e < *best) {
                            best = e;
                            bi = a;
                            bj = b;
                        }
                    }
                }
            }
        }
        result.heights.push_back(best->weight);
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
        result.labels_by_k[clusters.size()] = snapshot();
    }
    return result;
}

/// Union-find stand-in that relabels every member on each union.
class LabelPropagation {
public:
    explicit LabelPropagation(std::size_t n) : label_(n) {
        for (std::size_t i = 0; i < n; ++i)
            label_[i] = i;
    }
    std::size_t label(std::size_t x) const { return label_[x]; }
    void unite(std::size_t a, std::size_t b) {
        const std::size_t from = label_[b], to = label_[a];
        if (from == to)
            return;
        for (auto& l : label_) {
            if (l == from)
                l = to;
        }
    }

private:
    std::vector<std::size_t> label_;
};

/// Every MST edge must be the lightest edge across the cut it induces.
inline bool satisfies_cut_property(const Dataset& ds, const EdgeList& mst) {
    const std::size_t n = ds.size();
    for (std::size_t skip = 0; skip < mst.edges.size(); ++skip) {
        LabelPropagation side(n);
        for (std::size_t i = 0; i < mst.edges.size(); ++i) {
            if (i != skip)
                side.unite(mst.edges[i].u, mst.edges[i].v);
        }
        const Edge& e = mst.edges[skip];
        for (PointId a = 0; a < n; ++a) {
            for (PointId b = a + 1; b < n; ++b) {
                if (side.label(a) == side.label(b))
                    continue;
                const Edge cross{a, b, euclidean_distance(ds.coords(a), ds.coords(b))};
                if (cross < e)
                    return false;
            }
        }
    }
    return true;
}

inline std::size_t ceil_log2(std::size_t n) {
    std::size_t r = 0;
    while ((std::size_t{1} << r) < n)
        ++r;
    return r;
}

} // namespace treemst::oracle
