#include "cli.hpp"

#include "treemst/bench.hpp"
#include "treemst/core.hpp"
#include "treemst/emst.hpp"
#include "treemst/errors.hpp"
#include "treemst/slink.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

namespace treemst::cli {

namespace {

/// Usage errors detected after CLI11 accepted the syntax.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InvalidInput("cannot write '" + path + "'");
    return out;
}

EdgeList compute_mst(const Dataset& ds, const std::string& backend, std::size_t leaf_capacity) {
    if (backend == "naive")
        return naive_boruvka(ds);
    if (backend == "kruskal")
        return kruskal_mst(ds);
    return dual_tree_boruvka(ds, parse_backend(backend), leaf_capacity);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidInput("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spatial indexes, Euclidean MST and single-linkage clustering", "treemst"};
    app.require_subcommand(1);

    const std::vector<std::string> mst_backends{"kd", "ball", "naive", "kruskal"};

    // gen
    auto* gen = app.add_subcommand("gen", "Write a synthetic dataset");
    std::size_t gen_n = 0, gen_d = 0;
    std::string gen_dist = "uniform", gen_out;
    std::uint64_t gen_seed = 0;
    gen->add_option("--n", gen_n, "Number of points")->required();
    gen->add_option("--d", gen_d, "Dimension")->required();
    gen->add_option("--dist", gen_dist, "uniform or gaussian")->check(CLI::IsMember({"uniform", "gaussian"}));
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output CSV")->required();

    // emst
    auto* emst = app.add_subcommand("emst", "Compute the Euclidean MST of a CSV dataset");
    std::string emst_in, emst_out, emst_backend = "kd";
    std::size_t emst_leaf = KdTree::default_leaf_capacity;
    emst->add_option("--in", emst_in, "Input CSV")->required();
    emst->add_option("--backend", emst_backend, "kd, ball, naive or kruskal")->check(CLI::IsMember(mst_backends));
    emst->add_option("--leaf-capacity", emst_leaf, "Leaf bucket size")->check(CLI::PositiveNumber);
    emst->add_option("--out", emst_out, "Output edge file")->required();

    // cluster
    auto* cluster = app.add_subcommand("cluster", "Single-linkage clustering of a CSV dataset");
    std::string cl_in, cl_out, cl_backend = "kd";
    std::size_t cl_k = 0, cl_leaf = KdTree::default_leaf_capacity;
    cluster->add_option("--in", cl_in, "Input CSV")->required();
    cluster->add_option("--k", cl_k, "Number of clusters")->required();
    cluster->add_option("--backend", cl_backend, "kd, ball, naive or kruskal")->check(CLI::IsMember(mst_backends));
    cluster->add_option("--leaf-capacity", cl_leaf, "Leaf bucket size")->check(CLI::PositiveNumber);
    cluster->add_option("--out", cl_out, "Output label file")->required();

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Time build/insert/delete/search/EMST per backend");
    bench::BenchConfig flags;
    std::string b_config, b_dist, b_format = "csv", b_out;
    std::vector<std::string> b_ops, b_backends;
    std::size_t b_mutations = 0;
    bench_cmd->add_option("--config", b_config, "JSON config file");
    auto* o_sizes = bench_cmd->add_option("--sizes", flags.sizes, "Point counts")->delimiter(',');
    auto* o_dims = bench_cmd->add_option("--dims", flags.dims, "Dimensions")->delimiter(',');
    auto* o_dist = bench_cmd->add_option("--dist", b_dist, "uniform or gaussian")
                       ->check(CLI::IsMember({"uniform", "gaussian"}));
    auto* o_seed = bench_cmd->add_option("--seed", flags.seed, "Workload seed");
    auto* o_trials = bench_cmd->add_option("--trials", flags.trials, "Timed trials per cell (>= 3)");
    auto* o_queries = bench_cmd->add_option("--knn-queries", flags.knn_queries, "Queries per search cell");
    auto* o_k = bench_cmd->add_option("--knn-k", flags.knn_k, "Neighbors per query");
    auto* o_mut = bench_cmd->add_option("--mutations", b_mutations, "Inserts/deletes per cell (default n/10)");
    auto* o_ops = bench_cmd->add_option("--ops", b_ops, "build,insert,delete,nn_search,emst")->delimiter(',');
    auto* o_backends = bench_cmd->add_option("--backends", b_backends, "kd,ball")->delimiter(',');
    auto* o_leaf = bench_cmd->add_option("--leaf-capacity", flags.leaf_capacity, "Leaf bucket size");
    bench_cmd->add_option("--format", b_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    bench_cmd->add_option("--out", b_out, "Report file")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (gen->parsed()) {
            if (gen_n == 0 || gen_d == 0)
                throw UsageError("--n and --d must be positive");
            const Dataset ds = generate_synthetic(gen_n, gen_d, parse_distribution(gen_dist), gen_seed);
            save_dataset(ds, gen_out);
            out << "points=" << ds.size() << " dim=" << ds.dim() << '\n';
        } else if (emst->parsed()) {
            const Dataset ds = load_dataset(emst_in);
            const EdgeList mst = compute_mst(ds, emst_backend, emst_leaf).normalized();
            auto file = open_output(emst_out);
            write_edges(mst, file);
            out << "total_weight=" << format_real(mst.total_weight) << '\n';
        } else if (cluster->parsed()) {
            const Dataset ds = load_dataset(cl_in);
            if (cl_k < 1 || cl_k > ds.size())
                throw UsageError("--k must be in [1, " + std::to_string(ds.size()) + "]");
            const EdgeList mst = compute_mst(ds, cl_backend, cl_leaf);
            const ClusterLabels labels = single_linkage(mst, ds.size(), cl_k);
            auto file = open_output(cl_out);
            write_labels(labels, file);
            out << "clusters=" << cl_k << '\n';
        } else if (bench_cmd->parsed()) {
            bench::BenchConfig cfg = b_config.empty() ? bench::BenchConfig{} : bench::parse_config(read_file(b_config));
            if (o_sizes->count())
                cfg.sizes = flags.sizes;
            if (o_dims->count())
                cfg.dims = flags.dims;
            if (o_dist->count())
                cfg.distribution = parse_distribution(b_dist);
            if (o_seed->count())
                cfg.seed = flags.seed;
            if (o_trials->count())
                cfg.trials = flags.trials;
            if (o_queries->count())
                cfg.knn_queries = flags.knn_queries;
            if (o_k->count())
                cfg.knn_k = flags.knn_k;
            if (o_mut->count())
                cfg.mutation_count = b_mutations;
            if (o_leaf->count())
                cfg.leaf_capacity = flags.leaf_capacity;
            if (o_ops->count()) {
                cfg.operations.clear();
                for (const auto& op : b_ops)
                    cfg.operations.push_back(bench::parse_operation(op));
            }
            if (o_backends->count()) {
                cfg.backends.clear();
                for (const auto& b : b_backends)
                    cfg.backends.push_back(parse_backend(b));
            }
            try {
                cfg.validate();
            } catch (const InvalidArgument& e) {
                throw UsageError(e.what());
            }
            const auto report = bench::run_suite(cfg);
            auto file = open_output(b_out);
            file << bench::emit_report(report, bench::parse_report_format(b_format));
            out << "records=" << report.records.size() << " ratios=" << report.ratios.size() << '\n';
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidArgument& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace treemst::cli
