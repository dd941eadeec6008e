#include <gtest/gtest.h>

#include "treemst/core.hpp"
#include "treemst/errors.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

using namespace treemst;

namespace {

Dataset parse(const std::string& text) {
    std::istringstream in(text);
    return parse_dataset(in);
}

} // namespace

TEST(EuclideanDistance, Examples) {
    const std::vector<double> o{0, 0}, p{3, 4}, ones{1, 1, 1}, diag{1, 1};
    EXPECT_EQ(euclidean_distance(o, p), 5.0);
    EXPECT_EQ(euclidean_distance(ones, ones), 0.0);
    EXPECT_NEAR(euclidean_distance(o, diag), 1.4142135623730951, 1e-12);
}

TEST(EuclideanDistance, DimensionMismatchNamesBoth) {
    const std::vector<double> a{0, 0}, b{1, 2, 3};
    try {
        euclidean_distance(a, b);
        FAIL() << "expected ContractViolation";
    } catch (const ContractViolation& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find('2'), std::string::npos);
        EXPECT_NE(msg.find('3'), std::string::npos);
    }
}

TEST(EuclideanDistance, MatchesSequentialSumClosely) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    for (std::size_t d = 1; d <= 60; ++d) {
        std::vector<double> a(d), b(d);
        double ref = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
            ref += (a[i] - b[i]) * (a[i] - b[i]);
        }
        EXPECT_NEAR(euclidean_distance(a, b), std::sqrt(ref), 1e-12 * std::sqrt(ref));
    }
}

TEST(EuclideanDistance, SymmetricAndTriangleProperty) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-100, 100);
    std::uniform_int_distribution<std::size_t> dims(1, 50);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t d = dims(rng);
        std::vector<double> a(d), b(d), c(d);
        for (std::size_t i = 0; i < d; ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
            c[i] = u(rng);
        }
        const double ab = euclidean_distance(a, b);
        EXPECT_EQ(ab, euclidean_distance(b, a));
        EXPECT_LE(euclidean_distance(a, c), ab + euclidean_distance(b, c) + 1e-9);
        EXPECT_GE(ab, 0.0);
    }
}

TEST(DistancesTo, BitwiseEqualToDistanceOnPaddedRows) {
    for (std::size_t d : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 13u, 15u, 50u, 51u}) {
        const std::size_t stride = (d + 3) / 4 * 4;
        const auto ds = generate_synthetic(23, d, Distribution::gaussian, d);
        std::vector<double> padded(ds.size() * stride, 0.0);
        std::vector<const double*> rows;
        for (PointId j = 0; j < ds.size(); ++j) {
            std::copy(ds.coords(j).begin(), ds.coords(j).end(), padded.begin() + j * stride);
            rows.push_back(&padded[j * stride]);
        }
        for (std::size_t count = 0; count <= ds.size(); count += 1 + count / 4) {
            std::vector<double> out(count, -1.0);
            detail::distances_to(rows[0], rows.data(), count, stride, out.data());
            for (std::size_t k = 0; k < count; ++k) {
                const double want = euclidean_distance(ds.coords(0), ds.coords(static_cast<PointId>(k)));
                ASSERT_EQ(std::memcmp(&out[k], &want, sizeof want), 0) << "d=" << d << " k=" << k;
            }
        }
    }
}

TEST(GenerateSynthetic, Deterministic) {
    const auto a = generate_synthetic(5, 3, Distribution::uniform, 42);
    const auto b = generate_synthetic(5, 3, Distribution::uniform, 42);
    ASSERT_EQ(a.flat().size(), b.flat().size());
    EXPECT_EQ(std::memcmp(a.flat().data(), b.flat().data(), a.flat().size_bytes()), 0);
    EXPECT_NE(a, generate_synthetic(5, 3, Distribution::uniform, 43));
}

TEST(GenerateSynthetic, SingleGaussianPoint) {
    const auto ds = generate_synthetic(1, 50, Distribution::gaussian, 0);
    EXPECT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds.dim(), 50u);
    for (double c : ds.coords(0))
        EXPECT_TRUE(std::isfinite(c));
}

TEST(GenerateSynthetic, UniformRange) {
    const auto ds = generate_synthetic(10000, 50, Distribution::uniform, 7);
    for (double c : ds.flat()) {
        ASSERT_GE(c, 0.0);
        ASSERT_LT(c, 1.0);
    }
}

TEST(GenerateSynthetic, GaussianMoments) {
    const auto ds = generate_synthetic(20000, 5, Distribution::gaussian, 9);
    double sum = 0.0, sq = 0.0;
    for (double c : ds.flat()) {
        sum += c;
        sq += c * c;
    }
    const double m = static_cast<double>(ds.flat().size());
    EXPECT_NEAR(sum / m, 0.0, 0.02);
    EXPECT_NEAR(sq / m, 1.0, 0.03);
}

TEST(GenerateSynthetic, RejectsEmptyShapes) {
    EXPECT_THROW(generate_synthetic(0, 3, Distribution::uniform, 1), InvalidArgument);
    EXPECT_THROW(generate_synthetic(3, 0, Distribution::uniform, 1), InvalidArgument);
}

TEST(Dataset, RejectsNonFinite) {
    EXPECT_THROW(Dataset(2, {0.0, std::nan("")}), InvalidArgument);
    EXPECT_THROW(Dataset(2, {0.0, INFINITY}), InvalidArgument);
    EXPECT_THROW(Dataset(2, {0.0, 1.0, 2.0}), InvalidArgument);
}

TEST(LoadDataset, MinimalAndHeader) {
    auto ds = parse("0,0\n3,4\n");
    EXPECT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds.dim(), 2u);
    EXPECT_EQ(ds.coords(1)[1], 4.0);

    ds = parse("x,y\n0,0\n3,4\n");
    EXPECT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds.dim(), 2u);
    EXPECT_EQ(ds.coords(0)[0], 0.0);

    ds = parse("1.5,-2e3\r\n4,5");
    EXPECT_EQ(ds.coords(0)[1], -2000.0);
}

TEST(LoadDataset, RaggedRowNamesRow) {
    try {
        parse("0,0\n1\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2u);
        EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
    }
}

TEST(LoadDataset, NonNumericFieldNamesRowAndColumn) {
    try {
        parse("0,0\n1,abc\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2u);
        EXPECT_EQ(e.column(), 2u);
    }
    // A partly numeric first line is not a header.
    EXPECT_THROW(parse("1,x\n0,0\n"), ParseError);
}

TEST(LoadDataset, EmptyInput) {
    EXPECT_THROW(parse(""), InvalidInput);
    EXPECT_THROW(parse("x,y\n"), InvalidInput);
    EXPECT_THROW(load_dataset("/nonexistent/points.csv"), InvalidInput);
}

TEST(LoadDataset, WriteRoundTrip) {
    for (auto dist : {Distribution::uniform, Distribution::gaussian}) {
        const auto ds = generate_synthetic(300, 7, dist, 5);
        std::stringstream buf;
        write_dataset(ds, buf);
        const auto back = parse_dataset(buf);
        ASSERT_EQ(back.size(), ds.size());
        for (std::size_t i = 0; i < ds.flat().size(); ++i) {
            const double a = ds.flat()[i], b = back.flat()[i];
            EXPECT_LE(std::abs(a - b), 1e-15 * std::abs(a));
        }
    }
}

TEST(FormatReal, SeventeenDigits) {
    EXPECT_EQ(format_real(5.0), "5");
    EXPECT_EQ(format_real(0.1), "0.10000000000000001");
    EXPECT_EQ(parse_real(format_real(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_THROW(parse_real("1.5x"), InvalidArgument);
    EXPECT_THROW(parse_real(""), InvalidArgument);
}

TEST(Edge, NormalizedOrderAndTotalOrder) {
    const Edge e = Edge::between(7, 3, 1.0);
    EXPECT_EQ(e.u, 3u);
    EXPECT_EQ(e.v, 7u);
    EXPECT_LT(Edge::between(0, 5, 1.0), Edge::between(1, 2, 1.0));
    EXPECT_LT(Edge::between(1, 2, 1.0), Edge::between(1, 3, 1.0));
    EXPECT_LT(Edge::between(9, 8, 0.5), Edge::between(0, 1, 1.0));
}
