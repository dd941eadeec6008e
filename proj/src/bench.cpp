#include "treemst/bench.hpp"

#include "treemst/balltree.hpp"
#include "treemst/errors.hpp"
#include "treemst/kdtree.hpp"

#include <json.hpp>

#include <sys/utsname.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace treemst::bench {

using json = nlohmann::ordered_json;

std::string_view to_string(Operation op) {
    switch (op) {
    case Operation::build: return "build";
    case Operation::insert: return "insert";
    case Operation::remove: return "delete";
    case Operation::nn_search: return "nn_search";
    case Operation::emst: return "emst";
    }
    return "?";
}

Operation parse_operation(std::string_view name) {
    for (Operation op : {Operation::build, Operation::insert, Operation::remove, Operation::nn_search, Operation::emst}) {
        if (to_string(op) == name)
            return op;
    }
    throw InvalidArgument("unknown operation '" + std::string(name) + "'");
}

void BenchConfig::validate() const {
    auto positive = [](std::size_t v, const char* field) {
        if (v < 1)
            throw InvalidArgument(std::string("bench config: ") + field + " must be >= 1");
    };
    if (sizes.empty())
        throw InvalidArgument("bench config: sizes is empty");
    if (dims.empty())
        throw InvalidArgument("bench config: dims is empty");
    for (auto n : sizes)
        positive(n, "sizes");
    for (auto d : dims)
        positive(d, "dims");
    if (trials < 3)
        throw InvalidArgument("bench config: trials must be >= 3");
    positive(knn_queries, "knn_queries");
    positive(knn_k, "knn_k");
    positive(leaf_capacity, "leaf_capacity");
    if (mutation_count)
        positive(*mutation_count, "mutation_count");
    if (operations.empty())
        throw InvalidArgument("bench config: operations is empty");
    if (backends.empty())
        throw InvalidArgument("bench config: backends is empty");
}

std::size_t BenchConfig::mutations_for(std::size_t n) const {
    return mutation_count ? *mutation_count : std::max<std::size_t>(1, n / 10);
}

BenchConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("bench config: ") + e.what());
    }
    if (!doc.is_object())
        throw InvalidArgument("bench config: expected a JSON object");

    BenchConfig cfg;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "sizes") {
                cfg.sizes = value.get<std::vector<std::size_t>>();
            } else if (key == "dims") {
                cfg.dims = value.get<std::vector<std::size_t>>();
            } else if (key == "distribution") {
                cfg.distribution = parse_distribution(value.get<std::string>());
            } else if (key == "seed") {
                cfg.seed = value.get<std::uint64_t>();
            } else if (key == "trials") {
                cfg.trials = value.get<std::size_t>();
            } else if (key == "knn_queries") {
                cfg.knn_queries = value.get<std::size_t>();
            } else if (key == "knn_k") {
                cfg.knn_k = value.get<std::size_t>();
            } else if (key == "mutation_count") {
                if (value.is_null())
                    cfg.mutation_count.reset();
                else
                    cfg.mutation_count = value.get<std::size_t>();
            } else if (key == "operations") {
                cfg.operations.clear();
                for (const auto& op : value)
                    cfg.operations.push_back(parse_operation(op.get<std::string>()));
            } else if (key == "backends") {
                cfg.backends.clear();
                for (const auto& b : value)
                    cfg.backends.push_back(parse_backend(b.get<std::string>()));
            } else if (key == "leaf_capacity") {
                cfg.leaf_capacity = value.get<std::size_t>();
            } else {
                throw InvalidArgument("bench config: unknown key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("bench config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

namespace {

json config_json(const BenchConfig& cfg) {
    json j;
    j["sizes"] = cfg.sizes;
    j["dims"] = cfg.dims;
    j["distribution"] = std::string(to_string(cfg.distribution));
    j["seed"] = cfg.seed;
    j["trials"] = cfg.trials;
    j["knn_queries"] = cfg.knn_queries;
    j["knn_k"] = cfg.knn_k;
    j["mutation_count"] = cfg.mutation_count ? json(*cfg.mutation_count) : json(nullptr);
    j["operations"] = json::array();
    for (Operation op : cfg.operations)
        j["operations"].push_back(std::string(to_string(op)));
    j["backends"] = json::array();
    for (Backend b : cfg.backends)
        j["backends"].push_back(std::string(to_string(b)));
    j["leaf_capacity"] = cfg.leaf_capacity;
    return j;
}

} // namespace

std::string config_to_json(const BenchConfig& cfg) {
    return config_json(cfg).dump(2);
}

double median(std::vector<double> values) {
    if (values.empty())
        throw InvalidArgument("median of no values");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1)
        return values[mid];
    return values[mid - 1] + (values[mid] - values[mid - 1]) / 2.0;
}

std::vector<RatioRecord> compute_ratios(const std::vector<TimingRecord>& records) {
    using Key = std::tuple<Operation, std::size_t, std::size_t>;
    std::map<Key, double> kd;
    std::map<Key, double> ball;
    std::vector<Key> order;
    for (const auto& r : records) {
        const Key key{r.operation, r.n, r.d};
        if (!kd.count(key) && !ball.count(key))
            order.push_back(key);
        (r.backend == Backend::kd ? kd : ball)[key] = r.elapsed_ms;
    }
    std::vector<RatioRecord> out;
    for (const Key& key : order) {
        auto k = kd.find(key);
        auto b = ball.find(key);
        if (k != kd.end() && b != ball.end())
            out.push_back(RatioRecord{std::get<0>(key), std::get<1>(key), std::get<2>(key), b->second / k->second});
    }
    return out;
}

std::string describe_environment() {
    std::ostringstream out;
    utsname info{};
    if (uname(&info) == 0)
        out << info.sysname << ' ' << info.release << ' ' << info.machine << "; ";
#if defined(__clang__)
    out << "clang " << __clang_major__ << '.' << __clang_minor__ << '.' << __clang_patchlevel__;
#elif defined(__GNUC__)
    out << "gcc " << __GNUC__ << '.' << __GNUC_MINOR__ << '.' << __GNUC_PATCHLEVEL__;
#else
    out << "unknown compiler";
#endif
#ifdef NDEBUG
    out << "; optimized";
#else
    out << "; debug";
#endif
    return out.str();
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Workloads for one (n, d) cell, all derived from the config seed.
struct CellWorkload {
    Dataset base;                  // ids 0..n-1, the build set
    std::vector<Point> additions;  // ids n..n+m-1, inserted one at a time
    std::vector<PointId> removals; // m distinct live ids to delete
    Dataset queries;
};

CellWorkload make_workload(const BenchConfig& cfg, std::size_t n, std::size_t d) {
    const std::size_t m = cfg.mutations_for(n);
    CellWorkload w;
    const Dataset all = generate_synthetic(n + m, d, cfg.distribution, cfg.seed);
    w.base = all.prefix(n);
    for (std::size_t i = n; i < n + m; ++i)
        w.additions.push_back(all.point(static_cast<PointId>(i)));
    w.queries = generate_synthetic(cfg.knn_queries, d, cfg.distribution, cfg.seed + 1);

    // Partial Fisher-Yates over the build ids.
    std::vector<PointId> ids(n);
    std::iota(ids.begin(), ids.end(), PointId{0});
    SyntheticRng rng(cfg.seed + 2);
    const std::size_t count = std::min(m, n);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(ids[i], ids[j]);
    }
    w.removals.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(count));
    return w;
}

volatile double sink = 0.0;

template <class Tree>
double time_once(Operation op, const CellWorkload& w, const BenchConfig& cfg, Backend backend, const Tree* prebuilt) {
    switch (op) {
    case Operation::build: {
        const auto start = Clock::now();
        Tree tree(w.base, cfg.leaf_capacity);
        const double ms = elapsed_ms(start);
        sink = sink + static_cast<double>(tree.size());
        return ms;
    }
    case Operation::insert: {
        Tree tree(w.base, cfg.leaf_capacity);
        const auto start = Clock::now();
        for (const Point& p : w.additions)
            tree.insert(p);
        const double ms = elapsed_ms(start);
        sink = sink + static_cast<double>(tree.size());
        return ms;
    }
    case Operation::remove: {
        Tree tree(w.base, cfg.leaf_capacity);
        const auto start = Clock::now();
        for (PointId id : w.removals)
            tree.remove(id);
        const double ms = elapsed_ms(start);
        sink = sink + static_cast<double>(tree.size());
        return ms;
    }
    case Operation::nn_search: {
        double acc = 0.0;
        const auto start = Clock::now();
        for (PointId i = 0; i < w.queries.size(); ++i) {
            const auto result = prebuilt->knn(w.queries.coords(i), cfg.knn_k);
            acc += result.empty() ? 0.0 : result.back().distance;
        }
        const double ms = elapsed_ms(start);
        sink = sink + acc;
        return ms;
    }
    case Operation::emst: {
        const auto start = Clock::now();
        const EdgeList mst = dual_tree_boruvka(w.base, backend, cfg.leaf_capacity);
        const double ms = elapsed_ms(start);
        sink = sink + mst.total_weight;
        return ms;
    }
    }
    return 0.0;
}

template <class Tree>
TimingRecord time_cell(Operation op, const CellWorkload& w, const BenchConfig& cfg, Backend backend) {
    std::optional<Tree> prebuilt;
    if (op == Operation::nn_search)
        prebuilt.emplace(w.base, cfg.leaf_capacity);
    const Tree* tree = prebuilt ? &*prebuilt : nullptr;

    time_once<Tree>(op, w, cfg, backend, tree); // warmup
    TimingRecord rec;
    rec.backend = backend;
    rec.operation = op;
    rec.n = w.base.size();
    rec.d = w.base.dim();
    rec.seed = cfg.seed;
    for (std::size_t t = 0; t < cfg.trials; ++t)
        rec.trial_values_ms.push_back(time_once<Tree>(op, w, cfg, backend, tree));
    rec.elapsed_ms = median(rec.trial_values_ms);
    return rec;
}

} // namespace

BenchmarkReport run_suite(const BenchConfig& cfg, const ProgressFn& progress) {
    cfg.validate();
    BenchmarkReport report;
    report.config = cfg;
    report.environment = describe_environment();

    for (std::size_t n : cfg.sizes) {
        for (std::size_t d : cfg.dims) {
            const CellWorkload w = make_workload(cfg, n, d);
            for (Operation op : cfg.operations) {
                for (Backend backend : cfg.backends) {
                    try {
                        TimingRecord rec = backend == Backend::kd ? time_cell<KdTree>(op, w, cfg, backend)
                                                                  : time_cell<BallTree>(op, w, cfg, backend);
                        if (progress)
                            progress(rec);
                        report.records.push_back(std::move(rec));
                    } catch (const std::exception& e) {
                        throw BenchError("bench cell " + std::string(to_string(backend)) + "/" +
                                         std::string(to_string(op)) + " n=" + std::to_string(n) +
                                         " d=" + std::to_string(d) + " failed: " + e.what());
                    }
                }
            }
        }
    }
    report.ratios = compute_ratios(report.records);
    return report;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "csv")
        return ReportFormat::csv;
    if (name == "json")
        return ReportFormat::json;
    throw InvalidArgument("unknown report format '" + std::string(name) + "'");
}

namespace {

constexpr std::string_view csv_header = "backend,operation,n,d,elapsed_ms,trials,seed";
constexpr std::string_view ratio_marker = "# ratios";
constexpr std::string_view ratio_header = "operation,n,d,ball_over_kd";

std::string emit_csv(const BenchmarkReport& report) {
    std::string out(csv_header);
    out += '\n';
    for (const auto& r : report.records) {
        out += to_string(r.backend);
        out += ',';
        out += to_string(r.operation);
        out += ',' + std::to_string(r.n) + ',' + std::to_string(r.d) + ',' + format_real(r.elapsed_ms) + ',';
        for (std::size_t i = 0; i < r.trial_values_ms.size(); ++i) {
            if (i)
                out += ';';
            out += format_real(r.trial_values_ms[i]);
        }
        out += ',' + std::to_string(r.seed) + '\n';
    }
    if (report.records.empty())
        return out;
    out += ratio_marker;
    out += '\n';
    out += ratio_header;
    out += '\n';
    for (const auto& r : report.ratios) {
        out += to_string(r.operation);
        out += ',' + std::to_string(r.n) + ',' + std::to_string(r.d) + ',' + format_real(r.ball_over_kd) + '\n';
    }
    return out;
}

std::string emit_json(const BenchmarkReport& report) {
    json j;
    j["config"] = config_json(report.config);
    j["records"] = json::array();
    for (const auto& r : report.records) {
        json rec;
        rec["backend"] = std::string(to_string(r.backend));
        rec["operation"] = std::string(to_string(r.operation));
        rec["n"] = r.n;
        rec["d"] = r.d;
        rec["elapsed_ms"] = r.elapsed_ms;
        rec["trial_values_ms"] = r.trial_values_ms;
        rec["seed"] = r.seed;
        j["records"].push_back(std::move(rec));
    }
    j["environment"] = report.environment;
    j["ratios"] = json::array();
    for (const auto& r : report.ratios) {
        json rat;
        rat["operation"] = std::string(to_string(r.operation));
        rat["n"] = r.n;
        rat["d"] = r.d;
        rat["ball_over_kd"] = r.ball_over_kd;
        j["ratios"].push_back(std::move(rat));
    }
    return j.dump(2) + "\n";
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::uint64_t parse_unsigned(std::string_view field) {
    std::uint64_t value = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw InvalidArgument("not an unsigned integer: '" + std::string(field) + "'");
    return value;
}

} // namespace

std::string emit_report(const BenchmarkReport& report, ReportFormat format) {
    return format == ReportFormat::csv ? emit_csv(report) : emit_json(report);
}

BenchmarkReport parse_report_csv(std::string_view text) {
    BenchmarkReport report;
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty())
        lines.pop_back();
    if (lines.empty() || lines.front() != csv_header)
        throw ParseError("report: missing header line", 1);

    bool in_ratios = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t row = i + 1;
        const std::string_view line = lines[i];
        if (line == ratio_marker) {
            if (i + 1 >= lines.size() || lines[i + 1] != ratio_header)
                throw ParseError("report: ratio section without its header", row + 1);
            in_ratios = true;
            ++i;
            continue;
        }
        const auto f = split(line, ',');
        try {
            if (!in_ratios) {
                if (f.size() != 7)
                    throw ParseError("report: expected 7 fields", row);
                TimingRecord r;
                r.backend = parse_backend(f[0]);
                r.operation = parse_operation(f[1]);
                r.n = parse_unsigned(f[2]);
                r.d = parse_unsigned(f[3]);
                r.elapsed_ms = parse_real(f[4]);
                for (auto t : split(f[5], ';'))
                    r.trial_values_ms.push_back(parse_real(t));
                r.seed = parse_unsigned(f[6]);
                report.records.push_back(std::move(r));
            } else {
                if (f.size() != 4)
                    throw ParseError("report: expected 4 ratio fields", row);
                report.ratios.push_back(
                    RatioRecord{parse_operation(f[0]), parse_unsigned(f[1]), parse_unsigned(f[2]), parse_real(f[3])});
            }
        } catch (const InvalidArgument& e) {
            throw ParseError("report row " + std::to_string(row) + ": " + e.what(), row);
        }
    }
    return report;
}

} // namespace treemst::bench
