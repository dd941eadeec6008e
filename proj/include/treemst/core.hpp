#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace treemst {

using PointId = std::uint32_t;

namespace detail {

/// Sum of `term(i)^2` for i in [0, d) using four interleaved accumulators,
/// combined as (s0 + s1) + (s2 + s3).
///
/// Every distance and every pruning bound in the library goes through this one
/// expression shape. Rounding is monotone in each operand, so a bound whose
/// per-axis terms are no larger than a point pair's terms can never exceed that
/// pair's computed distance, and distances are bitwise symmetric.
template <class Term>
inline double accumulate_squares(std::size_t d, Term term) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
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
    return (s0 + s1) + (s2 + s3);
}

/// Distance between two coordinate arrays of length d; no dimension check.
inline double distance(const double* a, const double* b, std::size_t d) {
    return std::sqrt(accumulate_squares(d, [a, b](std::size_t i) { return a[i] - b[i]; }));
}

/// out[k] = distance(x, rows[k], stride) for k < count, four rows at a time.
/// `stride` must be a multiple of 4. Zero padding past the real dimension
/// leaves every distance bitwise unchanged.
void distances_to(const double* x, const double* const* rows, std::size_t count, std::size_t stride, double* out);

} // namespace detail

/// Euclidean distance. Throws ContractViolation if the dimensions differ.
double euclidean_distance(std::span<const double> a, std::span<const double> b);

struct Point {
    PointId id = 0;
    std::vector<double> coords;
};

/// Immutable set of n points in d dimensions with ids 0..n-1, stored row-major.
class Dataset {
public:
    Dataset() = default;

    /// `coords` holds n*d values, row-major. Throws InvalidArgument when d is
    /// zero, the length is not a multiple of d, or any value is not finite.
    Dataset(std::size_t d, std::vector<double> coords);

    static Dataset from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return d_; }
    bool empty() const noexcept { return n_ == 0; }

    std::span<const double> coords(PointId id) const {
        return {coords_.data() + static_cast<std::size_t>(id) * d_, d_};
    }
    Point point(PointId id) const;

    std::span<const double> flat() const noexcept { return coords_; }

    /// First `count` points as a new dataset (ids preserved).
    Dataset prefix(std::size_t count) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> coords_;
};

/// Weighted pair of point ids, always stored with u < v.
struct Edge {
    PointId u = 0;
    PointId v = 0;
    double weight = 0.0;

    static Edge between(PointId a, PointId b, double weight) {
        return a < b ? Edge{a, b, weight} : Edge{b, a, weight};
    }

    /// Total order used everywhere: weight, then smaller id, then larger id.
    friend auto operator<=>(const Edge& x, const Edge& y) {
        if (auto c = x.weight <=> y.weight; c != 0)
            return c;
        if (x.u != y.u)
            return x.u < y.u ? std::partial_ordering::less : std::partial_ordering::greater;
        if (x.v != y.v)
            return x.v < y.v ? std::partial_ordering::less : std::partial_ordering::greater;
        return std::partial_ordering::equivalent;
    }
    friend bool operator==(const Edge&, const Edge&) = default;
};

struct EdgeList {
    std::vector<Edge> edges;
    double total_weight = 0.0;

    void push_back(const Edge& e) {
        edges.push_back(e);
        total_weight += e.weight;
    }

    /// Edges sorted ascending by the total order.
    EdgeList normalized() const;
};

/// One k-NN result entry. Lists are ordered ascending by (distance, id).
struct Neighbor {
    PointId id = 0;
    double distance = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
    friend bool operator<(const Neighbor& a, const Neighbor& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
    }
};

using NeighborList = std::vector<Neighbor>;

enum class Distribution { uniform, gaussian };

std::string_view to_string(Distribution dist);
Distribution parse_distribution(std::string_view name);

/// Seeded generator. The engine is std::mt19937_64; uniform variates take the
/// top 53 bits of one draw scaled by 2^-53, and gaussian variates come in
/// pairs from the Box-Muller transform of two uniform variates.
class SyntheticRng {
public:
    explicit SyntheticRng(std::uint64_t seed);

    /// Uniform in [0, 1).
    double uniform();
    /// Standard normal.
    double gaussian();
    /// Uniform integer in [0, bound). `bound` must be positive.
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Deterministic dataset: ids are assigned in draw order, coordinates drawn
/// row by row. Throws InvalidArgument when n or d is zero.
Dataset generate_synthetic(std::size_t n, std::size_t d, Distribution dist, std::uint64_t seed);

/// Parses comma-separated points, one per line. A first line that fails to
/// parse as numbers is treated as a header and skipped.
Dataset parse_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);

/// Writes one row per point with 17 significant digits, '\n' terminated.
void write_dataset(const Dataset& ds, std::ostream& out);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

/// `value` printed with 17 significant digits (%.17g), which round-trips.
std::string format_real(double value);

/// Strict decimal parse of the whole field; throws InvalidArgument on failure.
double parse_real(std::string_view field);

} // namespace treemst
