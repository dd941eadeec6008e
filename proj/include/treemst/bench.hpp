#pragma once

#include "treemst/core.hpp"
#include "treemst/emst.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace treemst::bench {

enum class Operation { build, insert, remove, nn_search, emst };

/// Report names: build, insert, delete, nn_search, emst.
std::string_view to_string(Operation op);
Operation parse_operation(std::string_view name);

struct BenchConfig {
    std::vector<std::size_t> sizes{1000, 5000, 20000};
    std::vector<std::size_t> dims{15, 25, 50};
    Distribution distribution = Distribution::uniform;
    std::uint64_t seed = 42;
    std::size_t trials = 3;
    std::size_t knn_queries = 1000;
    std::size_t knn_k = 1;
    /// Inserts and deletes per cell; n/10 (at least 1) when unset.
    std::optional<std::size_t> mutation_count;
    std::vector<Operation> operations{Operation::build, Operation::insert, Operation::remove, Operation::nn_search,
                                      Operation::emst};
    std::vector<Backend> backends{Backend::kd, Backend::ball};
    std::size_t leaf_capacity = 20;

    /// Throws InvalidArgument naming the offending field.
    void validate() const;
    std::size_t mutations_for(std::size_t n) const;
};

/// Parses a JSON object whose keys are the BenchConfig field names; missing
/// keys keep their defaults, unknown keys are rejected.
BenchConfig parse_config(std::string_view json_text);
std::string config_to_json(const BenchConfig& cfg);

struct TimingRecord {
    Backend backend = Backend::kd;
    Operation operation = Operation::build;
    std::size_t n = 0;
    std::size_t d = 0;
    double elapsed_ms = 0.0; // median of trial_values_ms
    std::vector<double> trial_values_ms;
    std::uint64_t seed = 0;

    friend bool operator==(const TimingRecord&, const TimingRecord&) = default;
};

struct RatioRecord {
    Operation operation = Operation::build;
    std::size_t n = 0;
    std::size_t d = 0;
    double ball_over_kd = 0.0;

    friend bool operator==(const RatioRecord&, const RatioRecord&) = default;
};

struct BenchmarkReport {
    BenchConfig config;
    std::vector<TimingRecord> records;
    std::string environment;
    std::vector<RatioRecord> ratios;
};

class BenchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Median of the values; the mean of the middle pair for even counts.
double median(std::vector<double> values);

/// Ratios ball/kd for every (operation, n, d) present for both backends, in
/// record order.
std::vector<RatioRecord> compute_ratios(const std::vector<TimingRecord>& records);

/// Host and compiler description recorded in reports.
std::string describe_environment();

using ProgressFn = std::function<void(const TimingRecord&)>;

/// Times every requested (n, d, operation, backend) cell: one untimed warmup,
/// then `trials` timed runs on a monotonic clock. All workloads derive from
/// cfg.seed. Throws BenchError naming the cell when a run fails.
BenchmarkReport run_suite(const BenchConfig& cfg, const ProgressFn& progress = {});

enum class ReportFormat { csv, json };

ReportFormat parse_report_format(std::string_view name);

/// CSV: "backend,operation,n,d,elapsed_ms,trials,seed" then one row per record
/// (trials holds the raw trial values joined by ';'); when records exist, a
/// "# ratios" line, the header "operation,n,d,ball_over_kd" and one row per
/// ratio. JSON: {config, records, environment, ratios} in that key order.
std::string emit_report(const BenchmarkReport& report, ReportFormat format);

/// Reads the CSV form back into records and ratios. Throws ParseError.
BenchmarkReport parse_report_csv(std::string_view text);

} // namespace treemst::bench
