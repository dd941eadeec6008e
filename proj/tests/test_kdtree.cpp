#include <gtest/gtest.h>

#include "oracles.hpp"
#include "treemst/errors.hpp"
#include "treemst/kdtree.hpp"

#include <cmath>
#include <random>

using namespace treemst;

namespace {

BoundingBox unit_square() {
    return BoundingBox{{0.0, 0.0}, {1.0, 1.0}};
}

} // namespace

TEST(BoxMinDistance, Examples) {
    const auto box = unit_square();
    EXPECT_EQ(box_min_distance(box, std::vector<double>{0.5, 0.5}), 0.0);
    EXPECT_EQ(box_min_distance(box, std::vector<double>{2.0, 0.5}), 1.0);
    EXPECT_NEAR(box_min_distance(box, std::vector<double>{2.0, 2.0}), std::sqrt(2.0), 1e-12);
    EXPECT_THROW(box_min_distance(box, std::vector<double>{1, 2, 3}), ContractViolation);
}

TEST(BoxMinDistance, NeverExceedsDistanceToContainedPoint) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10, 10);
    std::uniform_real_distribution<double> unit(0, 1);
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t d = 1 + trial % 30;
        BoundingBox box = BoundingBox::empty(d);
        std::vector<double> a(d), b(d), p(d), q(d);
        for (std::size_t i = 0; i < d; ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
            q[i] = u(rng) * 2;
        }
        box.expand(a);
        box.expand(b);
        for (std::size_t i = 0; i < d; ++i)
            p[i] = box.mins[i] + unit(rng) * (box.maxs[i] - box.mins[i]);
        ASSERT_TRUE(box.contains(p));
        // Corners and interior points alike; the bound shares the distance's
        // rounding, so the comparison is exact.
        ASSERT_LE(box_min_distance(box, q), euclidean_distance(p, q));
        ASSERT_LE(box_min_distance(box, q), euclidean_distance(a, q));
        ASSERT_LE(box_min_distance(box, q), euclidean_distance(b, q));
    }
}

TEST(BoxBoxMinDistance, BoundsPointPairs) {
    const BoundingBox a{{0, 0}, {1, 1}};
    const BoundingBox b{{3, 0}, {4, 1}};
    EXPECT_EQ(box_box_min_distance(a, b), 2.0);
    EXPECT_EQ(box_box_min_distance(a, a), 0.0);
    const BoundingBox c{{2, 3}, {5, 5}};
    EXPECT_NEAR(box_box_min_distance(a, c), std::sqrt(5.0), 1e-15);
}

TEST(BoxMinDistance, MatchesPlainPerAxisSum) {
    // Written out one axis at a time, with no shortcuts.
    auto plain = [](const std::vector<double>& lo, const std::vector<double>& hi, const std::vector<double>& x) {
        return std::sqrt(detail::accumulate_squares(lo.size(), [&](std::size_t i) {
            if (x[i] < lo[i])
                return lo[i] - x[i];
            if (x[i] > hi[i])
                return x[i] - hi[i];
            return 0.0;
        }));
    };
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (std::size_t d = 1; d <= 13; ++d) {
        for (int trial = 0; trial < 200; ++trial) {
            BoundingBox a = BoundingBox::empty(d), b = BoundingBox::empty(d);
            std::vector<double> p(d), q(d), x(d);
            for (auto* v : {&p, &q, &x})
                for (auto& c : *v)
                    c = u(rng);
            a.expand(p);
            a.expand(q);
            for (auto& c : p)
                c = u(rng);
            b.expand(p);
            ASSERT_EQ(box_min_distance(a, x), plain(a.mins, a.maxs, x));
            // Box-to-box is the point case with the other box's nearest corner.
            std::vector<double> corner(d);
            for (std::size_t i = 0; i < d; ++i)
                corner[i] = b.mins[i] > a.maxs[i] ? b.mins[i] : (b.maxs[i] < a.mins[i] ? b.maxs[i] : a.mins[i]);
            ASSERT_EQ(box_box_min_distance(a, b), box_box_min_distance(b, a));
            ASSERT_EQ(box_box_min_distance(a, b), plain(a.mins, a.maxs, corner)) << "d=" << d;
        }
    }
}

TEST(KdTree, SinglePointIsLeafRoot) {
    const Dataset ds(3, {1.0, 2.0, 3.0});
    KdTree tree(ds, 20);
    ASSERT_TRUE(tree.root().is_leaf());
    EXPECT_EQ(tree.root().ids, std::vector<PointId>{0});
    EXPECT_EQ(tree.size(), 1u);
}

TEST(KdTree, FourPointsSplitAtMedian) {
    const Dataset ds(1, {3.0, 0.0, 2.0, 1.0});
    KdTree tree(ds, 1);
    const auto& root = tree.root();
    ASSERT_FALSE(root.is_leaf());
    EXPECT_EQ(root.split_dim, 0u);
    // Any value in [1, 2] is a median of {0, 1, 2, 3}.
    EXPECT_GE(root.split_value, 1.0);
    EXPECT_LE(root.split_value, 2.0);
    EXPECT_EQ(root.left->live, 2u);
    EXPECT_EQ(root.right->live, 2u);
    EXPECT_EQ(tree.depth(), 2u);
    tree.audit();
}

TEST(KdTree, SplitsOnWidestAxis) {
    const Dataset ds(3, {0, 0, 0, 0.1, 5, 0.2, 0.2, 9, 0.1, 0.3, 2, 0.3});
    KdTree tree(ds, 1);
    EXPECT_EQ(tree.root().split_dim, 1u);
}

TEST(KdTree, DepthBound) {
    for (std::size_t n : {2u, 3u, 17u, 100u, 1000u, 4097u}) {
        const auto ds = generate_synthetic(n, 3, Distribution::uniform, n);
        KdTree tree(ds, 1);
        EXPECT_LE(tree.depth(), 2 * oracle::ceil_log2(n) + 1) << "n=" << n;
        tree.audit();
    }
}

TEST(KdTree, ForcedSplitOnInsert) {
    const Dataset ds(2, {0.0, 0.0});
    KdTree tree(ds, 1);
    tree.insert(Point{1, {1.0, 1.0}});
    const auto& root = tree.root();
    ASSERT_FALSE(root.is_leaf());
    EXPECT_TRUE(root.left->is_leaf());
    EXPECT_TRUE(root.right->is_leaf());
    EXPECT_EQ(tree.size(), 2u);
    tree.audit();
}

TEST(KdTree, InsertExpandsAncestorBoxes) {
    const auto ds = generate_synthetic(100, 2, Distribution::uniform, 3);
    KdTree tree(ds, 4);
    tree.insert(Point{100, {7.0, -3.0}});
    EXPECT_EQ(tree.root().box.maxs[0], 7.0);
    EXPECT_EQ(tree.root().box.mins[1], -3.0);
    tree.audit();
}

TEST(KdTree, PartitionHoldsWithDuplicateHeavyData) {
    std::vector<double> coords;
    for (int i = 0; i < 300; ++i)
        coords.push_back(i < 200 ? 1.0 : static_cast<double>(i % 7));
    KdTree tree(Dataset(1, coords), 2);
    tree.audit();
    for (PointId id = 0; id < 300; id += 3)
        tree.remove(id);
    for (PointId id = 300; id < 400; ++id)
        tree.insert(Point{id, {1.0}});
    tree.audit();
}
