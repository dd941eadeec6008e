#include "treemst/balltree.hpp"

#include "treemst/errors.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <utility>

namespace treemst {

namespace {

/// choose_split over any coordinate source.
template <class CoordOf>
SplitChoice choose_split_impl(std::span<const PointId> ids, std::size_t d, CoordOf coord_of) {
    const std::size_t m = ids.size();
    if (m < 2)
        throw InvalidArgument("choose_split: need at least 2 points, got " + std::to_string(m));

    SplitChoice best;
    best.cost = std::numeric_limits<double>::infinity();
    bool any_extent = false;
    std::vector<std::pair<double, PointId>> sorted(m);

    for (std::size_t axis = 0; axis < d; ++axis) {
        for (std::size_t i = 0; i < m; ++i)
            sorted[i] = {coord_of(ids[i])[axis], ids[i]};
        std::sort(sorted.begin(), sorted.end());
        const double lo = sorted.front().first;
        const double hi = sorted.back().first;
        if (hi > lo)
            any_extent = true;
        else
            continue;
        for (std::size_t pos = 1; pos < m; ++pos) {
            const double r_left = (sorted[pos - 1].first - lo) / 2.0;
            const double r_right = (hi - sorted[pos].first) / 2.0;
            const double cost = static_cast<double>(pos) * r_left * r_left +
                                static_cast<double>(m - pos) * r_right * r_right;
            if (cost < best.cost) {
                best.dim = axis;
                best.left_count = pos;
                best.cost = cost;
                best.value = sorted[pos - 1].first + (sorted[pos].first - sorted[pos - 1].first) / 2.0;
            }
        }
    }

    if (!any_extent) {
        // All points coincide: force progress with a half/half split.
        best.dim = 0;
        best.left_count = m / 2;
        best.cost = 0.0;
        best.value = coord_of(ids[0])[0];
    }
    return best;
}

/// Reorders ids so the first `left_count` are the lowest by (coordinate, id).
template <class CoordOf>
void partition_by(std::span<PointId> ids, const SplitChoice& split, CoordOf coord_of) {
    auto less = [&](PointId a, PointId b) {
        const double ca = coord_of(a)[split.dim];
        const double cb = coord_of(b)[split.dim];
        return ca < cb || (ca == cb && a < b);
    };
    std::nth_element(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(split.left_count), ids.end(), less);
}

} // namespace

SplitChoice choose_split(std::span<const PointId> ids, const Dataset& ds) {
    for (PointId id : ids) {
        if (id >= ds.size())
            throw InvalidArgument("choose_split: id " + std::to_string(id) + " outside dataset");
    }
    return choose_split_impl(ids, ds.dim(), [&ds](PointId id) { return ds.coords(id).data(); });
}

double ball_min_distance(const BallTree::Node& node, std::span<const double> q) {
    if (node.center.size() != q.size())
        throw ContractViolation("ball_min_distance: dimension mismatch (ball " + std::to_string(node.center.size()) +
                                ", point " + std::to_string(q.size()) + ")");
    return std::max(0.0, detail::distance(q.data(), node.center.data(), q.size()) - node.radius);
}

double ball_ball_min_distance(const BallTree::Node& a, const BallTree::Node& b) {
    if (a.center.size() != b.center.size())
        throw ContractViolation("ball_ball_min_distance: dimension mismatch");
    return std::max(0.0, detail::distance(a.center.data(), b.center.data(), a.center.size()) - a.radius - b.radius);
}

BallTree::BallTree(const Dataset& ds, std::size_t leaf_capacity) : leaf_capacity_(leaf_capacity) {
    if (ds.empty())
        throw InvalidArgument("ball-tree build: empty dataset");
    if (leaf_capacity == 0)
        throw InvalidArgument("ball-tree build: leaf capacity must be positive");
    store_ = detail::PointStore(ds);
    leaf_of_.assign(ds.size(), nullptr);
    std::vector<PointId> ids(ds.size());
    for (PointId i = 0; i < ids.size(); ++i)
        ids[i] = i;
    root_ = build(ids, nullptr);
}

std::unique_ptr<BallTree::Node> BallTree::build(std::span<PointId> ids, Node* parent) {
    const std::size_t d = dim();
    auto node = std::make_unique<Node>();
    node->parent = parent;
    node->live = ids.size();

    node->center.assign(d, 0.0);
    for (PointId id : ids) {
        const double* p = store_.data(id);
        for (std::size_t i = 0; i < d; ++i)
            node->center[i] += p[i];
    }
    for (auto& c : node->center)
        c /= static_cast<double>(ids.size());
    for (PointId id : ids)
        node->radius = std::max(node->radius, detail::distance(node->center.data(), store_.data(id), d));

    if (ids.size() <= leaf_capacity_) {
        node->ids.assign(ids.begin(), ids.end());
        for (PointId id : ids)
            leaf_of_[id] = node.get();
        return node;
    }

    auto coord_of = [this](PointId id) { return store_.data(id); };
    const SplitChoice split = choose_split_impl(ids, d, coord_of);
    partition_by(ids, split, coord_of);
    node->left = build(ids.first(split.left_count), node.get());
    node->right = build(ids.subspan(split.left_count), node.get());
    return node;
}

void BallTree::rebuild(Node* node) {
    std::vector<PointId> live_ids;
    live_ids.reserve(node->live);
    std::vector<Node*> stack{node};
    while (!stack.empty()) {
        Node* n = stack.back();
        stack.pop_back();
        if (n->is_leaf()) {
            for (PointId id : n->ids) {
                if (store_.live(id))
                    live_ids.push_back(id);
                else
                    leaf_of_[id] = nullptr;
            }
        } else {
            stack.push_back(n->right.get());
            stack.push_back(n->left.get());
        }
    }

    const std::size_t removed = node->dead;
    Node* parent = node->parent;
    std::unique_ptr<Node> fresh;
    if (live_ids.empty()) {
        fresh = std::make_unique<Node>();
        fresh->parent = parent;
    } else {
        std::sort(live_ids.begin(), live_ids.end());
        fresh = build(live_ids, parent);
    }

    if (!parent) {
        root_ = std::move(fresh);
    } else {
        auto& slot = parent->left.get() == node ? parent->left : parent->right;
        slot = std::move(fresh);
    }
    for (Node* a = parent; a; a = a->parent)
        a->dead -= removed;
}

void BallTree::purge_tombstone(PointId id) {
    Node* leaf = leaf_of_[id];
    leaf->ids.erase(std::find(leaf->ids.begin(), leaf->ids.end(), id));
    for (Node* a = leaf; a; a = a->parent)
        --a->dead;
    leaf_of_[id] = nullptr;
}

void BallTree::insert(const Point& p) {
    store_.check_dim(p.coords.size(), "ball-tree insert");
    if (store_.live(p.id))
        throw InvalidArgument("ball-tree insert: id " + std::to_string(p.id) + " is already live");
    for (double c : p.coords) {
        if (!std::isfinite(c))
            throw InvalidArgument("ball-tree insert: non-finite coordinate");
    }
    if (p.id < leaf_of_.size() && leaf_of_[p.id])
        purge_tombstone(p.id);

    store_.put(p.id, p.coords);
    store_.set_live(p.id, true);
    if (leaf_of_.size() <= p.id)
        leaf_of_.resize(static_cast<std::size_t>(p.id) + 1, nullptr);

    const std::size_t d = dim();
    const double* x = p.coords.data();
    Node* node = root_.get();
    while (true) {
        if (node->live == 0) {
            node->center = p.coords;
            node->radius = 0.0;
        } else {
            node->radius = std::max(node->radius, detail::distance(node->center.data(), x, d));
        }
        ++node->live;
        if (node->is_leaf())
            break;
        // An internal node with live points always has a non-empty child.
        const Node* l = node->left.get();
        const Node* r = node->right.get();
        const double dl = l->live ? detail::distance(l->center.data(), x, d) : std::numeric_limits<double>::infinity();
        const double dr = r->live ? detail::distance(r->center.data(), x, d) : std::numeric_limits<double>::infinity();
        node = dl <= dr ? node->left.get() : node->right.get();
    }
    node->ids.push_back(p.id);
    leaf_of_[p.id] = node;
    if (node->live > leaf_capacity_)
        rebuild(node);
}

void BallTree::remove(PointId id) {
    if (!store_.live(id))
        throw NotFound("ball-tree remove: id " + std::to_string(id) + " is not live");
    store_.set_live(id, false);

    Node* highest = nullptr;
    for (Node* a = leaf_of_[id]; a; a = a->parent) {
        --a->live;
        ++a->dead;
        if (a->dead > a->live)
            highest = a;
    }
    if (highest)
        rebuild(highest);
}

NeighborList BallTree::knn(std::span<const double> q, std::size_t k) const {
    store_.check_dim(q.size(), "ball-tree knn");
    if (k == 0)
        throw InvalidArgument("ball-tree knn: k must be positive");
    detail::KnnCollector best(k);
    const std::size_t d = dim();
    const double* x = q.data();
    constexpr double inf = std::numeric_limits<double>::infinity();

    struct Bound {
        double value;
        double slack;
    };
    auto bound_of = [&](const Node& n) -> Bound {
        if (!n.live)
            return {inf, 0.0};
        const double to_center = detail::distance(x, n.center.data(), d);
        return {std::max(0.0, to_center - n.radius), detail::ball_prune_slack(to_center + n.radius)};
    };

    auto visit = [&](auto& self, const Node& node) -> void {
        if (node.is_leaf()) {
            for (PointId id : node.ids) {
                if (store_.live(id))
                    best.offer(id, detail::distance(x, store_.data(id), d));
            }
            return;
        }
        const Node* near = node.left.get();
        const Node* far = node.right.get();
        Bound near_bound = bound_of(*near);
        Bound far_bound = bound_of(*far);
        if (far_bound.value < near_bound.value) {
            std::swap(near, far);
            std::swap(near_bound, far_bound);
        }
        if (near->live && !(near_bound.value > best.bound() + near_bound.slack))
            self(self, *near);
        if (far->live && !(far_bound.value > best.bound() + far_bound.slack))
            self(self, *far);
    };
    if (root_->live)
        visit(visit, *root_);
    return std::move(best).take();
}

std::vector<PointId> BallTree::leaf_order() const {
    std::vector<PointId> out;
    auto walk = [&](auto& self, const Node& node) -> void {
        if (node.is_leaf()) {
            for (PointId id : node.ids) {
                if (store_.live(id))
                    out.push_back(id);
            }
            return;
        }
        self(self, *node.left);
        self(self, *node.right);
    };
    walk(walk, *root_);
    return out;
}

void BallTree::audit() const {
    auto fail = [](const std::string& msg) { throw ContractViolation("ball-tree audit: " + msg); };
    constexpr double containment_slack = 1e-9;
    std::vector<unsigned char> seen(store_.slots(), 0);
    const std::size_t d = dim();

    auto walk = [&](auto& self, const Node& node, const Node* parent) -> std::vector<PointId> {
        if (node.parent != parent)
            fail("broken parent link");
        if (node.radius < 0.0)
            fail("negative radius");
        std::vector<PointId> members;
        std::size_t dead = 0;
        if (node.is_leaf()) {
            if (node.right)
                fail("node with only a right child");
            for (PointId id : node.ids) {
                if (id >= leaf_of_.size() || leaf_of_[id] != &node)
                    fail("leaf map disagrees for id " + std::to_string(id));
                if (store_.live(id)) {
                    if (seen[id]++)
                        fail("id " + std::to_string(id) + " appears twice");
                    members.push_back(id);
                } else {
                    ++dead;
                }
            }
            if (members.size() > leaf_capacity_)
                fail("leaf holds " + std::to_string(members.size()) + " live points");
            if (dead != node.dead)
                fail("leaf tombstone count mismatch");
        } else {
            auto left = self(self, *node.left, &node);
            auto right = self(self, *node.right, &node);
            if (node.dead != node.left->dead + node.right->dead)
                fail("tombstone count is not the sum of its children");
            members = std::move(left);
            members.insert(members.end(), right.begin(), right.end());
        }
        if (members.size() != node.live)
            fail("live count " + std::to_string(node.live) + " but " + std::to_string(members.size()) +
                 " live points reachable");
        for (PointId id : members) {
            const double dist = detail::distance(node.center.data(), store_.data(id), d);
            if (dist > node.radius + containment_slack)
                fail("point " + std::to_string(id) + " at distance " + format_real(dist) + " outside radius " +
                     format_real(node.radius));
        }
        return members;
    };
    auto all = walk(walk, *root_, nullptr);
    for (PointId id = 0; id < store_.slots(); ++id) {
        if (store_.live(id) && !seen[id])
            fail("live id " + std::to_string(id) + " unreachable");
    }
    if (all.size() != size())
        fail("size mismatch");
}

} // namespace treemst
