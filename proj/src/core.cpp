#include "treemst/core.hpp"

#include "treemst/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace treemst {

namespace detail {
namespace {

// Lane k accumulates the axes congruent to k mod 4, as accumulate_squares does.
typedef double lanes __attribute__((vector_size(32)));

inline lanes load(const double* p) {
    lanes v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

inline double finish(lanes s) {
    return std::sqrt((s[0] + s[1]) + (s[2] + s[3]));
}

} // namespace

__attribute__((target_clones("avx2", "default")))
void distances_to(const double* x, const double* const* rows, std::size_t count, std::size_t stride, double* out) {
    std::size_t k = 0;
    for (; k + 4 <= count; k += 4) {
        const double *r0 = rows[k], *r1 = rows[k + 1], *r2 = rows[k + 2], *r3 = rows[k + 3];
        lanes s0 = {0, 0, 0, 0}, s1 = s0, s2 = s0, s3 = s0;
        for (std::size_t i = 0; i < stride; i += 4) {
            const lanes xv = load(x + i);
            const lanes t0 = xv - load(r0 + i), t1 = xv - load(r1 + i), t2 = xv - load(r2 + i), t3 = xv - load(r3 + i);
            s0 += t0 * t0;
            s1 += t1 * t1;
            s2 += t2 * t2;
            s3 += t3 * t3;
        }
        out[k] = finish(s0);
        out[k + 1] = finish(s1);
        out[k + 2] = finish(s2);
        out[k + 3] = finish(s3);
    }
    for (; k < count; ++k) {
        lanes s = {0, 0, 0, 0};
        for (std::size_t i = 0; i < stride; i += 4) {
            const lanes t = load(x + i) - load(rows[k] + i);
            s += t * t;
        }
        out[k] = finish(s);
    }
}

} // namespace detail

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ContractViolation("euclidean_distance: dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
    }
    return detail::distance(a.data(), b.data(), a.size());
}

Dataset::Dataset(std::size_t d, std::vector<double> coords) : d_(d), coords_(std::move(coords)) {
    if (d_ == 0)
        throw InvalidArgument("dataset dimension must be positive");
    if (coords_.size() % d_ != 0)
        throw InvalidArgument("coordinate count " + std::to_string(coords_.size()) +
                              " is not a multiple of dimension " + std::to_string(d_));
    for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (!std::isfinite(coords_[i]))
            throw InvalidArgument("non-finite coordinate at point " + std::to_string(i / d_) + ", axis " +
                                  std::to_string(i % d_));
    }
    n_ = coords_.size() / d_;
    if (n_ > std::numeric_limits<PointId>::max())
        throw InvalidArgument("too many points for 32-bit ids");
}

Dataset Dataset::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty())
        throw InvalidArgument("from_rows: no rows");
    const std::size_t d = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d)
            throw InvalidArgument("from_rows: row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                  " values, expected " + std::to_string(d));
        flat.insert(flat.end(), rows[i].begin(), rows[i].end());
    }
    return Dataset(d, std::move(flat));
}

Point Dataset::point(PointId id) const {
    auto c = coords(id);
    return Point{id, std::vector<double>(c.begin(), c.end())};
}

Dataset Dataset::prefix(std::size_t count) const {
    if (count > n_)
        throw InvalidArgument("prefix longer than dataset");
    return Dataset(d_, std::vector<double>(coords_.begin(), coords_.begin() + static_cast<std::ptrdiff_t>(count * d_)));
}

EdgeList EdgeList::normalized() const {
    EdgeList out;
    out.edges = edges;
    std::sort(out.edges.begin(), out.edges.end(), [](const Edge& a, const Edge& b) { return a < b; });
    for (const auto& e : out.edges)
        out.total_weight += e.weight;
    return out;
}

std::string_view to_string(Distribution dist) {
    return dist == Distribution::uniform ? "uniform" : "gaussian";
}

Distribution parse_distribution(std::string_view name) {
    if (name == "uniform")
        return Distribution::uniform;
    if (name == "gaussian")
        return Distribution::gaussian;
    throw InvalidArgument("unknown distribution '" + std::string(name) + "'");
}

SyntheticRng::SyntheticRng(std::uint64_t seed) : engine_(seed) {}

double SyntheticRng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SyntheticRng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t SyntheticRng::below(std::uint64_t bound) {
    // Rejection keeps the result unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

Dataset generate_synthetic(std::size_t n, std::size_t d, Distribution dist, std::uint64_t seed) {
    if (n == 0 || d == 0)
        throw InvalidArgument("generate_synthetic: n and d must be positive (got n=" + std::to_string(n) +
                              ", d=" + std::to_string(d) + ")");
    SyntheticRng rng(seed);
    std::vector<double> coords(n * d);
    for (auto& c : coords)
        c = dist == Distribution::uniform ? rng.uniform() : rng.gaussian();
    return Dataset(d, std::move(coords));
}

std::string format_real(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_real(std::string_view field) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
        field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t'))
        field.remove_suffix(1);
    if (!field.empty() && field.front() == '+')
        field.remove_prefix(1);
    double value = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(value))
        throw InvalidArgument("not a finite number: '" + std::string(field) + "'");
    return value;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t'; });
}

bool parses(std::string_view field) {
    try {
        parse_real(field);
        return true;
    } catch (const InvalidArgument&) {
        return false;
    }
}

} // namespace

Dataset parse_dataset(std::istream& in) {
    std::vector<double> coords;
    std::size_t d = 0;
    std::size_t row = 0;
    bool seen_first = false;
    std::string line;
    while (std::getline(in, line)) {
        ++row;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r')
            view.remove_suffix(1);
        if (is_blank(view))
            continue;
        auto fields = split_fields(view);
        if (!seen_first) {
            seen_first = true;
            if (std::none_of(fields.begin(), fields.end(), parses))
                continue; // header
        }
        if (d == 0) {
            d = fields.size();
        } else if (fields.size() != d) {
            throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(d) + " fields, found " +
                                 std::to_string(fields.size()),
                             row);
        }
        for (std::size_t col = 0; col < fields.size(); ++col) {
            try {
                coords.push_back(parse_real(fields[col]));
            } catch (const InvalidArgument&) {
                throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                                     ": not a finite number '" + std::string(fields[col]) + "'",
                                 row, col + 1);
            }
        }
    }
    if (coords.empty())
        throw InvalidInput("dataset contains no points");
    return Dataset(d, std::move(coords));
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open dataset '" + path.string() + "'");
    try {
        return parse_dataset(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.row(), e.column());
    } catch (const InvalidInput& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

void write_dataset(const Dataset& ds, std::ostream& out) {
    std::string line;
    for (PointId id = 0; id < ds.size(); ++id) {
        line.clear();
        auto c = ds.coords(id);
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (i)
                line += ',';
            line += format_real(c[i]);
        }
        line += '\n';
        out << line;
    }
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InvalidInput("cannot write '" + path.string() + "'");
    write_dataset(ds, out);
    if (!out)
        throw InvalidInput("write failed for '" + path.string() + "'");
}

} // namespace treemst
