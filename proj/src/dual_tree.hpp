#pragma once

#include "treemst/balltree.hpp"
#include "treemst/emst.hpp"
#include "treemst/errors.hpp"
#include "treemst/kdtree.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace treemst::detail {

/// Region-to-region lower bound for a backend, plus the slack that must be
/// added to a candidate bound before pruning against it.
template <class Tree>
struct RegionBound;

template <>
struct RegionBound<KdTree> {
    struct Result {
        double value;
        double slack;
    };
    // Box bounds share the distance expression shape and need no slack.
    static Result between(const KdTree::Node& a, const KdTree::Node& b) { return {box_box_min_distance(a.box, b.box), 0.0}; }
    static Result to_point(const KdTree::Node& a, const double* x, std::size_t d) {
        return {box_min_distance(a.box, {x, d}), 0.0};
    }
    /// Whether q should meet the right child of a split before the left one.
    static bool right_first(const KdTree::Node& q, const KdTree::Node& left, const KdTree::Node& right) {
        const double l = box_box_min_distance(q.box, left.box);
        const double r = box_box_min_distance(q.box, right.box);
        if (l != r)
            return r < l;
        // Overlapping boxes in high dimension often tie at zero.
        const KdTree::Node& parent = *left.parent;
        const std::size_t axis = parent.split_dim;
        return q.box.mins[axis] + (q.box.maxs[axis] - q.box.mins[axis]) / 2.0 > parent.split_value;
    }
};

template <>
struct RegionBound<BallTree> {
    struct Result {
        double value;
        double slack;
    };
    static Result between(const BallTree::Node& a, const BallTree::Node& b) {
        const double centers = distance(a.center.data(), b.center.data(), a.center.size());
        return {std::max(0.0, centers - a.radius - b.radius), ball_prune_slack(centers + a.radius + b.radius)};
    }
    static Result to_point(const BallTree::Node& a, const double* x, std::size_t d) {
        const double center = distance(a.center.data(), x, d);
        return {std::max(0.0, center - a.radius), ball_prune_slack(center + a.radius)};
    }
    static bool right_first(const BallTree::Node& q, const BallTree::Node& left, const BallTree::Node& right) {
        return between(q, right).value < between(q, left).value;
    }
};

/// Dual-tree search for each component's nearest foreign point.
///
/// The tree is flattened once into pre-order slots, with the live points of
/// each leaf copied contiguously in leaf order; every round refreshes the
/// per-slot component marks bottom-up and resets the per-slot candidate bounds.
/// A node pair is skipped when both nodes lie wholly inside one component, or
/// when their region distance exceeds the largest candidate weight among the
/// points of both nodes.
template <class Tree>
class ComponentNeighborSearch {
public:
    using Node = typename Tree::Node;

    explicit ComponentNeighborSearch(const Tree& tree) : tree_(tree), stride_((tree.dim() + 3) & ~std::size_t{3}) {
        flatten(tree.root());
    }

    ComponentCandidates run(DisjointSet& dsu) {
        const std::size_t slots = dsu.size();
        if (dsu.component_count() < 2)
            throw ContractViolation("find_component_neighbors: need at least two components");
        for (PointId id : ids_) {
            if (id >= slots)
                throw ContractViolation("find_component_neighbors: disjoint set does not cover id " +
                                        std::to_string(id));
        }

        label_.resize(ids_.size());
        for (std::size_t i = 0; i < ids_.size(); ++i)
            label_[i] = dsu.find(ids_[i]);

        refresh_marks();
        best_.assign(slots, Edge{0, 0, inf});
        seed_candidates();
        if (!slots_.empty())
            visit(0, 0);

        ComponentCandidates out(slots);
        for (PointId i = 0; i < slots; ++i) {
            if (best_[i].weight != inf)
                out[i] = best_[i];
        }
        return out;
    }

private:
    static constexpr double inf = std::numeric_limits<double>::infinity();
    static constexpr std::int64_t mixed = -1;
    static constexpr std::int64_t empty = -2;

    struct Slot {
        const Node* node;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::int64_t component = mixed;
        double bound = inf;
        std::size_t begin = 0;
        std::size_t end = 0;
    };

    const Tree& tree_;
    std::size_t stride_;
    std::vector<Slot> slots_;
    std::vector<PointId> ids_;
    std::vector<double> coords_;
    std::vector<PointId> label_;
    std::vector<Edge> best_;
    std::vector<const double*> rows_;
    std::vector<std::size_t> picked_;
    std::vector<double> dist_;

    std::int32_t flatten(const Node& node) {
        const auto index = static_cast<std::int32_t>(slots_.size());
        slots_.push_back(Slot{&node});
        if (node.is_leaf()) {
            slots_[index].begin = ids_.size();
            for (PointId id : node.ids) {
                if (!tree_.is_live(id))
                    continue;
                ids_.push_back(id);
                const double* x = tree_.data(id);
                coords_.insert(coords_.end(), x, x + tree_.dim());
                coords_.resize(ids_.size() * stride_, 0.0);
            }
            slots_[index].end = ids_.size();
        } else {
            const std::int32_t l = flatten(*node.left);
            const std::int32_t r = flatten(*node.right);
            slots_[index].left = l;
            slots_[index].right = r;
        }
        return index;
    }

    void refresh_marks() {
        for (auto it = slots_.rbegin(); it != slots_.rend(); ++it) {
            Slot& s = *it;
            if (s.node->live == 0) {
                s.component = empty;
                s.bound = -inf;
                continue;
            }
            s.bound = inf;
            if (s.node->is_leaf()) {
                s.component = empty;
                for (std::size_t i = s.begin; i < s.end; ++i) {
                    const auto c = static_cast<std::int64_t>(label_[i]);
                    if (s.component == empty) {
                        s.component = c;
                    } else if (s.component != c) {
                        s.component = mixed;
                        break;
                    }
                }
            } else {
                const std::int64_t l = slots_[s.left].component;
                const std::int64_t r = slots_[s.right].component;
                s.component = l == empty ? r : (r == empty ? l : (l == r ? l : mixed));
            }
        }
    }

    /// Visits each unordered node pair once; a point pair's distance updates
    /// the candidates of both components.
    void visit(std::int32_t ai, std::int32_t bi) {
        Slot& a = slots_[ai];
        Slot& b = slots_[bi];
        if (a.component == empty || b.component == empty)
            return;
        if (a.component >= 0 && a.component == b.component)
            return;
        if (ai == bi) {
            if (a.node->is_leaf()) {
                base_case(a, a, true, 0.0);
            } else {
                visit(a.left, a.left);
                visit(a.right, a.right);
                visit(a.left, a.right);
                a.bound = std::max(slots_[a.left].bound, slots_[a.right].bound);
            }
            return;
        }
        const auto bound = RegionBound<Tree>::between(*a.node, *b.node);
        if (bound.value > std::max(a.bound, b.bound) + bound.slack)
            return;

        if (a.node->is_leaf() && b.node->is_leaf()) {
            base_case(a, b, false, bound.slack);
            return;
        }
        if (a.node->is_leaf() || (!b.node->is_leaf() && b.node->live > a.node->live)) {
            visit_ordered(ai, b.left, b.right);
            b.bound = std::max(slots_[b.left].bound, slots_[b.right].bound);
        } else {
            visit_ordered(bi, a.left, a.right);
            a.bound = std::max(slots_[a.left].bound, slots_[a.right].bound);
        }
    }

    /// Visits (qi, x) and (qi, y) for the children x, y of one node, nearer first.
    void visit_ordered(std::int32_t qi, std::int32_t x, std::int32_t y) {
        const Slot& q = slots_[qi];
        const Slot& sx = slots_[x];
        const Slot& sy = slots_[y];
        if (sx.component != empty && sy.component != empty && RegionBound<Tree>::right_first(*q.node, *sx.node, *sy.node))
            std::swap(x, y);
        visit(qi, x);
        visit(qi, y);
    }

    /// Gives each component a finite starting candidate from points close
    /// together in leaf order.
    void seed_candidates() {
        const std::size_t d = tree_.dim();
        const std::size_t n = ids_.size();
        const std::size_t w = stride_;
        constexpr std::size_t reach = 32;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n && j <= i + reach; ++j) {
                if (label_[j] == label_[i])
                    continue;
                const Edge e = Edge::between(ids_[i], ids_[j], distance(&coords_[i * w], &coords_[j * w], d));
                if (e < best_[label_[i]])
                    best_[label_[i]] = e;
                if (e < best_[label_[j]])
                    best_[label_[j]] = e;
                break;
            }
        }
    }

    double leaf_bound(const Slot& s) const {
        double out = -inf;
        for (std::size_t i = s.begin; i < s.end; ++i)
            out = std::max(out, best_[label_[i]].weight);
        return out;
    }

    void base_case(Slot& a, Slot& b, bool same, double slack) {
        const std::size_t d = tree_.dim();
        const std::size_t span = b.end - b.begin;
        rows_.resize(span);
        picked_.resize(span);
        dist_.resize(span);
        for (std::size_t i = a.begin; i < a.end; ++i) {
            const PointId cq = label_[i];
            const double* x = &coords_[i * stride_];
            if (!same) {
                const auto own = RegionBound<Tree>::to_point(*b.node, x, d);
                if (own.value > std::max(best_[cq].weight, b.bound) + own.slack + slack)
                    continue;
            }
            std::size_t m = 0;
            for (std::size_t j = same ? i + 1 : b.begin; j < b.end; ++j) {
                rows_[m] = &coords_[j * stride_];
                picked_[m] = j;
                m += label_[j] != cq;
            }
            distances_to(x, rows_.data(), m, stride_, dist_.data());
            for (std::size_t k = 0; k < m; ++k) {
                const std::size_t j = picked_[k];
                Edge& bq = best_[cq];
                Edge& br = best_[label_[j]];
                if (dist_[k] > bq.weight && dist_[k] > br.weight)
                    continue;
                const Edge e = Edge::between(ids_[i], ids_[j], dist_[k]);
                if (e < bq)
                    bq = e;
                if (e < br)
                    br = e;
            }
        }
        a.bound = leaf_bound(a);
        if (!same)
            b.bound = leaf_bound(b);
    }
};

} // namespace treemst::detail
