#include "treemst/kdtree.hpp"

#include "treemst/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

namespace treemst {

BoundingBox BoundingBox::empty(std::size_t d) {
    return BoundingBox{std::vector<double>(d, std::numeric_limits<double>::infinity()),
                       std::vector<double>(d, -std::numeric_limits<double>::infinity())};
}

void BoundingBox::expand(std::span<const double> p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        mins[i] = std::min(mins[i], p[i]);
        maxs[i] = std::max(maxs[i], p[i]);
    }
}

bool BoundingBox::contains(std::span<const double> p) const {
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < mins[i] || p[i] > maxs[i])
            return false;
    }
    return true;
}

namespace {

inline double larger(double a, double b) {
    return a > b ? a : b;
}

/// sqrt of the sum over i of max(a1[i] - b1[i], a2[i] - b2[i], 0)^2, with the
/// same accumulator layout as detail::accumulate_squares, so the result is
/// bitwise what that expression gives.
double gap_norm(const double* a1, const double* b1, const double* a2, const double* b2, std::size_t d) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
#if defined(__SSE2__)
    // Lanes (0, 1) and (2, 3) of each block carry s0, s1 and s2, s3.
    __m128d v01 = _mm_setzero_pd(), v23 = _mm_setzero_pd();
    const __m128d zero = _mm_setzero_pd();
    for (; i + 4 <= d; i += 4) {
        const __m128d g01 = _mm_max_pd(_mm_max_pd(_mm_sub_pd(_mm_loadu_pd(a1 + i), _mm_loadu_pd(b1 + i)),
                                                  _mm_sub_pd(_mm_loadu_pd(a2 + i), _mm_loadu_pd(b2 + i))),
                                       zero);
        const __m128d g23 = _mm_max_pd(_mm_max_pd(_mm_sub_pd(_mm_loadu_pd(a1 + i + 2), _mm_loadu_pd(b1 + i + 2)),
                                                  _mm_sub_pd(_mm_loadu_pd(a2 + i + 2), _mm_loadu_pd(b2 + i + 2))),
                                       zero);
        v01 = _mm_add_pd(v01, _mm_mul_pd(g01, g01));
        v23 = _mm_add_pd(v23, _mm_mul_pd(g23, g23));
    }
    double lanes[4];
    _mm_storeu_pd(lanes, v01);
    _mm_storeu_pd(lanes + 2, v23);
    s0 = lanes[0];
    s1 = lanes[1];
    s2 = lanes[2];
    s3 = lanes[3];
#endif
    auto term = [&](std::size_t k) { return larger(larger(a1[k] - b1[k], a2[k] - b2[k]), 0.0); };
    for (; i + 4 <= d; i += 4) {
        const double t0 = term(i), t1 = term(i + 1), t2 = term(i + 2), t3 = term(i + 3);
        s0 += t0 * t0;
        s1 += t1 * t1;
        s2 += t2 * t2;
        s3 += t3 * t3;
    }
    switch (d - i) {
    case 3: { const double t = term(i + 2); s2 += t * t; } [[fallthrough]];
    case 2: { const double t = term(i + 1); s1 += t * t; } [[fallthrough]];
    case 1: { const double t = term(i); s0 += t * t; } break;
    default: break;
    }
    return std::sqrt((s0 + s1) + (s2 + s3));
}

} // namespace

double box_min_distance(const BoundingBox& box, std::span<const double> q) {
    if (box.dim() != q.size())
        throw ContractViolation("box_min_distance: dimension mismatch (box " + std::to_string(box.dim()) +
                                ", point " + std::to_string(q.size()) + ")");
    return gap_norm(box.mins.data(), q.data(), q.data(), box.maxs.data(), q.size());
}

double box_box_min_distance(const BoundingBox& a, const BoundingBox& b) {
    if (a.dim() != b.dim())
        throw ContractViolation("box_box_min_distance: dimension mismatch");
    return gap_norm(a.mins.data(), b.maxs.data(), b.mins.data(), a.maxs.data(), a.dim());
}

KdTree::KdTree(const Dataset& ds, std::size_t leaf_capacity) : leaf_capacity_(leaf_capacity) {
    if (ds.empty())
        throw InvalidArgument("kd-tree build: empty dataset");
    if (leaf_capacity == 0)
        throw InvalidArgument("kd-tree build: leaf capacity must be positive");
    store_ = detail::PointStore(ds);
    leaf_of_.assign(ds.size(), nullptr);
    std::vector<PointId> ids(ds.size());
    for (PointId i = 0; i < ids.size(); ++i)
        ids[i] = i;
    root_ = build(ids, nullptr);
}

std::unique_ptr<KdTree::Node> KdTree::build(std::span<PointId> ids, Node* parent) {
    const std::size_t d = dim();
    auto node = std::make_unique<Node>();
    node->parent = parent;
    node->live = ids.size();
    node->box = BoundingBox::empty(d);
    for (PointId id : ids)
        node->box.expand(store_.coords(id));

    if (ids.size() <= leaf_capacity_) {
        node->ids.assign(ids.begin(), ids.end());
        for (PointId id : ids)
            leaf_of_[id] = node.get();
        return node;
    }

    std::size_t axis = 0;
    double widest = -1.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double spread = node->box.maxs[i] - node->box.mins[i];
        if (spread > widest) {
            widest = spread;
            axis = i;
        }
    }

    // Ordering by (coordinate, id) sends ties on the median left until the left
    // half is full, so both children are non-empty even for duplicate points.
    const std::size_t mid = ids.size() / 2;
    auto less = [this, axis](PointId a, PointId b) {
        const double ca = store_.data(a)[axis];
        const double cb = store_.data(b)[axis];
        return ca < cb || (ca == cb && a < b);
    };
    std::nth_element(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(mid), ids.end(), less);
    const double right_min = store_.data(ids[mid])[axis];
    double left_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mid; ++i)
        left_max = std::max(left_max, store_.data(ids[i])[axis]);

    node->split_dim = axis;
    node->split_value = left_max + (right_min - left_max) / 2.0;
    node->left = build(ids.first(mid), node.get());
    node->right = build(ids.subspan(mid), node.get());
    return node;
}

void KdTree::rebuild(Node* node) {
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
        fresh->box = BoundingBox::empty(dim());
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

void KdTree::purge_tombstone(PointId id) {
    Node* leaf = leaf_of_[id];
    leaf->ids.erase(std::find(leaf->ids.begin(), leaf->ids.end(), id));
    for (Node* a = leaf; a; a = a->parent)
        --a->dead;
    leaf_of_[id] = nullptr;
}

void KdTree::insert(const Point& p) {
    store_.check_dim(p.coords.size(), "kd-tree insert");
    if (store_.live(p.id))
        throw InvalidArgument("kd-tree insert: id " + std::to_string(p.id) + " is already live");
    for (double c : p.coords) {
        if (!std::isfinite(c))
            throw InvalidArgument("kd-tree insert: non-finite coordinate");
    }
    if (p.id < leaf_of_.size() && leaf_of_[p.id])
        purge_tombstone(p.id);

    store_.put(p.id, p.coords);
    store_.set_live(p.id, true);
    if (leaf_of_.size() <= p.id)
        leaf_of_.resize(static_cast<std::size_t>(p.id) + 1, nullptr);

    Node* node = root_.get();
    while (true) {
        node->box.expand(p.coords);
        ++node->live;
        if (node->is_leaf())
            break;
        node = p.coords[node->split_dim] <= node->split_value ? node->left.get() : node->right.get();
    }
    node->ids.push_back(p.id);
    leaf_of_[p.id] = node;
    if (node->live > leaf_capacity_)
        rebuild(node);
}

void KdTree::remove(PointId id) {
    if (!store_.live(id))
        throw NotFound("kd-tree remove: id " + std::to_string(id) + " is not live");
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

NeighborList KdTree::knn(std::span<const double> q, std::size_t k) const {
    store_.check_dim(q.size(), "kd-tree knn");
    if (k == 0)
        throw InvalidArgument("kd-tree knn: k must be positive");
    detail::KnnCollector best(k);
    const std::size_t d = dim();
    const double* x = q.data();

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
        double near_bound = near->live ? box_min_distance(near->box, q) : std::numeric_limits<double>::infinity();
        double far_bound = far->live ? box_min_distance(far->box, q) : std::numeric_limits<double>::infinity();
        if (far_bound < near_bound) {
            std::swap(near, far);
            std::swap(near_bound, far_bound);
        }
        if (near->live && !(near_bound > best.bound()))
            self(self, *near);
        if (far->live && !(far_bound > best.bound()))
            self(self, *far);
    };
    if (root_->live)
        visit(visit, *root_);
    return std::move(best).take();
}

std::vector<PointId> KdTree::leaf_order() const {
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

std::size_t KdTree::depth() const {
    auto walk = [](auto& self, const Node& node) -> std::size_t {
        if (node.is_leaf())
            return 0;
        return 1 + std::max(self(self, *node.left), self(self, *node.right));
    };
    return walk(walk, *root_);
}

void KdTree::audit() const {
    auto fail = [](const std::string& msg) { throw ContractViolation("kd-tree audit: " + msg); };
    std::vector<unsigned char> seen(store_.slots(), 0);
    std::size_t live_total = 0;

    // Returns the live ids of the subtree so parents can check their split.
    auto walk = [&](auto& self, const Node& node, const Node* parent) -> std::vector<PointId> {
        if (node.parent != parent)
            fail("broken parent link");
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
            for (PointId id : left) {
                if (store_.data(id)[node.split_dim] > node.split_value)
                    fail("left point " + std::to_string(id) + " beyond split value");
            }
            for (PointId id : right) {
                if (store_.data(id)[node.split_dim] < node.split_value)
                    fail("right point " + std::to_string(id) + " below split value");
            }
            if (node.dead != node.left->dead + node.right->dead)
                fail("tombstone count is not the sum of its children");
            members = std::move(left);
            members.insert(members.end(), right.begin(), right.end());
        }
        if (members.size() != node.live)
            fail("live count " + std::to_string(node.live) + " but " + std::to_string(members.size()) +
                 " live points reachable");
        for (PointId id : members) {
            if (!node.box.contains(store_.coords(id)))
                fail("point " + std::to_string(id) + " outside its bounding box");
        }
        if (!members.empty()) {
            for (std::size_t i = 0; i < dim(); ++i) {
                if (node.box.mins[i] > node.box.maxs[i])
                    fail("inverted box");
            }
        }
        return members;
    };
    auto all = walk(walk, *root_, nullptr);
    live_total = all.size();
    for (PointId id = 0; id < store_.slots(); ++id) {
        if (store_.live(id) && !seen[id])
            fail("live id " + std::to_string(id) + " unreachable");
    }
    if (live_total != size())
        fail("size mismatch");
}

} // namespace treemst
