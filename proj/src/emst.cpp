#include "treemst/emst.hpp"

#include "dual_tree.hpp"
#include "treemst/errors.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

namespace treemst {

DisjointSet::DisjointSet(std::size_t n) : parent_(n), rank_(n, 0), components_(n) {
    for (PointId i = 0; i < n; ++i)
        parent_[i] = i;
}

PointId DisjointSet::find(PointId x) {
    PointId root = x;
    while (parent_[root] != root)
        root = parent_[root];
    while (parent_[x] != root) {
        const PointId next = parent_[x];
        parent_[x] = root;
        x = next;
    }
    return root;
}

bool DisjointSet::unite(PointId a, PointId b) {
    a = find(a);
    b = find(b);
    if (a == b)
        return false;
    if (rank_[a] < rank_[b])
        std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b])
        ++rank_[a];
    --components_;
    return true;
}

std::string_view to_string(Backend backend) {
    return backend == Backend::kd ? "kd" : "ball";
}

Backend parse_backend(std::string_view name) {
    if (name == "kd")
        return Backend::kd;
    if (name == "ball")
        return Backend::ball;
    throw InvalidArgument("unknown backend '" + std::string(name) + "'");
}

ComponentCandidates find_component_neighbors(const KdTree& index, DisjointSet& dsu) {
    return detail::ComponentNeighborSearch<KdTree>(index).run(dsu);
}

ComponentCandidates find_component_neighbors(const BallTree& index, DisjointSet& dsu) {
    return detail::ComponentNeighborSearch<BallTree>(index).run(dsu);
}

namespace {

/// Adds every candidate whose endpoints are still apart, visiting components in
/// ascending root order. Two components that nominate the same edge add it once.
std::size_t accept_candidates(const ComponentCandidates& candidates, DisjointSet& dsu, EdgeList& out) {
    std::size_t accepted = 0;
    for (const auto& cand : candidates) {
        if (cand && dsu.unite(cand->u, cand->v)) {
            out.push_back(*cand);
            ++accepted;
        }
    }
    return accepted;
}

template <class Tree>
EdgeList boruvka_over(const Tree& tree, std::size_t n, BoruvkaStats* stats) {
    EdgeList out;
    DisjointSet dsu(n);
    detail::ComponentNeighborSearch<Tree> search(tree);
    std::size_t rounds = 0;
    while (dsu.component_count() > 1) {
        const auto candidates = search.run(dsu);
        ++rounds;
        if (accept_candidates(candidates, dsu, out) == 0)
            throw ContractViolation("dual_tree_boruvka: round made no progress");
    }
    if (stats)
        stats->rounds = rounds;
    return out;
}

} // namespace

EdgeList dual_tree_boruvka(const Dataset& ds, Backend backend, std::size_t leaf_capacity, BoruvkaStats* stats) {
    if (ds.empty())
        throw InvalidArgument("dual_tree_boruvka: empty dataset");
    if (backend == Backend::kd)
        return boruvka_over(KdTree(ds, leaf_capacity), ds.size(), stats);
    return boruvka_over(BallTree(ds, leaf_capacity), ds.size(), stats);
}

EdgeList naive_boruvka(const Dataset& ds, BoruvkaStats* stats) {
    if (ds.empty())
        throw InvalidArgument("naive_boruvka: empty dataset");
    const std::size_t n = ds.size();
    const std::size_t d = ds.dim();
    const Edge none{0, 0, std::numeric_limits<double>::infinity()};

    EdgeList out;
    DisjointSet dsu(n);
    std::vector<PointId> label(n);
    std::vector<Edge> best(n);
    std::size_t rounds = 0;
    while (dsu.component_count() > 1) {
        for (PointId i = 0; i < n; ++i)
            label[i] = dsu.find(i);
        std::fill(best.begin(), best.end(), none);
        for (PointId i = 0; i < n; ++i) {
            for (PointId j = i + 1; j < n; ++j) {
                if (label[i] == label[j])
                    continue;
                const Edge e{i, j, detail::distance(ds.coords(i).data(), ds.coords(j).data(), d)};
                if (e < best[label[i]])
                    best[label[i]] = e;
                if (e < best[label[j]])
                    best[label[j]] = e;
            }
        }
        ComponentCandidates candidates(n);
        for (PointId i = 0; i < n; ++i) {
            if (best[i].weight != none.weight)
                candidates[i] = best[i];
        }
        ++rounds;
        accept_candidates(candidates, dsu, out);
    }
    if (stats)
        stats->rounds = rounds;
    return out;
}

EdgeList kruskal_mst(const Dataset& ds) {
    if (ds.empty())
        throw InvalidArgument("kruskal_mst: empty dataset");
    const std::size_t n = ds.size();
    std::vector<Edge> all;
    all.reserve(n * (n - 1) / 2);
    for (PointId i = 0; i < n; ++i) {
        for (PointId j = i + 1; j < n; ++j)
            all.push_back(Edge{i, j, detail::distance(ds.coords(i).data(), ds.coords(j).data(), ds.dim())});
    }
    std::sort(all.begin(), all.end(), [](const Edge& a, const Edge& b) { return a < b; });

    EdgeList out;
    DisjointSet dsu(n);
    for (const Edge& e : all) {
        if (dsu.unite(e.u, e.v)) {
            out.push_back(e);
            if (out.edges.size() + 1 == n)
                break;
        }
    }
    return out;
}

void write_edges(const EdgeList& mst, std::ostream& out) {
    const EdgeList sorted = mst.normalized();
    std::string line;
    for (const Edge& e : sorted.edges) {
        line = std::to_string(e.u);
        line += ',';
        line += std::to_string(e.v);
        line += ',';
        line += format_real(e.weight);
        line += '\n';
        out << line;
    }
    out << "# total_weight=" << format_real(sorted.total_weight) << '\n';
}

EdgeList read_edges(std::istream& in) {
    EdgeList out;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
            throw ParseError("edge row " + std::to_string(row) + ": expected u,v,weight", row);
        try {
            const std::string u = line.substr(0, c1);
            const std::string v = line.substr(c1 + 1, c2 - c1 - 1);
            std::size_t used_u = 0, used_v = 0;
            const unsigned long a = std::stoul(u, &used_u);
            const unsigned long b = std::stoul(v, &used_v);
            if (used_u != u.size() || used_v != v.size() || a == b)
                throw InvalidArgument("bad ids");
            out.push_back(Edge::between(static_cast<PointId>(a), static_cast<PointId>(b),
                                        parse_real(std::string_view(line).substr(c2 + 1))));
        } catch (const std::exception&) {
            throw ParseError("edge row " + std::to_string(row) + ": malformed edge '" + line + "'", row);
        }
    }
    return out;
}

} // namespace treemst
