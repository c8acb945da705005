// Command-line front end: approximate, weights, separability, bench.
//
// Exit codes: 0 success, 2 usage or validation error, 1 internal error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <cadzow/bench/experiment.hpp>
#include <cadzow/format.hpp>
#include <cadzow/io.hpp>
#include <cadzow/separability.hpp>
#include <cadzow/solvers.hpp>
#include <cadzow/weights.hpp>

namespace
{

using namespace cadzow;
using io::json;

struct usage_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw usage_error("cannot open '" + path + "' for writing");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

Vector read_series(const std::string& path, const std::string& column)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw usage_error("cannot open '" + path + "'");
    }
    try {
        return io::read_series_csv(in, column);
    } catch (const io::input_error& e) {
        throw usage_error(path + ": " + e.what());
    }
}

// ---- approximate -----------------------------------------------------------

struct ApproximateOptions
{
    std::string input;
    std::string column;
    std::string output;
    std::string trace;
    std::string algorithm = "cadzow";
    std::string extension = "recurrent";
    Index window          = 0;
    Index rank            = 0;
    double alpha          = 1.0;
    double tol            = 1e-8;
    Index max_iter        = 1000;
    Index iterations      = 0;
    double inner_tol      = 1e-4;
    Index inner_max_iter  = 1000;
    bool adjust           = false;
    bool rank_diagnostics = false;
};

int run_approximate(const ApproximateOptions& o)
{
    const Vector x = read_series(o.input, o.column);
    SolverConfig config;
    const auto alg = parse_algorithm(o.algorithm);
    if (!alg) {
        throw usage_error("unknown algorithm '" + o.algorithm + "'");
    }
    const auto ext = parse_extension(o.extension);
    if (!ext) {
        throw usage_error("unknown extension policy '" + o.extension + "'");
    }
    config.algorithm        = *alg;
    config.extension        = *ext;
    config.window           = o.window;
    config.rank             = o.rank;
    config.alpha            = o.alpha;
    config.adjust           = o.adjust;
    config.rank_diagnostics = o.rank_diagnostics;
    config.stop = o.iterations > 0 ? StopRule::iterations(o.iterations) : StopRule::mean_square_delta(o.tol, o.max_iter);
    config.inner = EmStop{o.inner_max_iter, o.inner_tol};

    const SolveResult result = solve(x, config);

    std::ostringstream csv;
    csv << "index,observed,estimate\n";
    for (Index i = 0; i < x.size(); ++i) {
        csv << (i + 1) << ',' << format_double(x[i]) << ',' << format_double(result.estimate[i]) << '\n';
    }
    write_text(o.output, csv.str());
    if (!o.trace.empty()) {
        json trace      = io::trace_to_json(result.trace);
        trace["config"] = io::config_to_json(config);
        write_text(o.trace, trace.dump(2) + "\n");
    }
    return 0;
}

// ---- weights ---------------------------------------------------------------

struct WeightsOptions
{
    std::string scheme;
    Index length   = 0;
    Index window   = 0;
    double alpha   = 1.0;
    bool normalize = false;
    std::string output;
};

int run_weights(const WeightsOptions& o)
{
    check_window(o.length, o.window);
    std::ostringstream csv;
    if (o.scheme == "alpha-metric" || o.scheme == "chat-metric") {
        const DiagonalMetric metric =
            o.scheme == "alpha-metric"        ? alpha_metric(o.length, o.window, o.alpha)
            : o.length >= 3 * (o.window - 1) ? chat_metric_closed_form(o.length, o.window)
                                              : chat_metric(o.length, o.window);
        Vector c = metric.diagonal();
        if (o.normalize) {
            c = normalize_weights(SeriesWeights(c)).values();
        }
        csv << "k,c_k\n";
        for (Index k = 0; k < c.size(); ++k) {
            csv << (k + 1) << ',' << format_double(c[k]) << '\n';
        }
    } else {
        const auto kind = parse_scheme(o.scheme);
        if (!kind) {
            throw usage_error("unknown weight scheme '" + o.scheme + "'");
        }
        SeriesWeights q = scheme_series_weights(WeightScheme{*kind, o.alpha}, o.length, o.window);
        if (o.normalize) {
            q = normalize_weights(q);
        }
        csv << "i,q_i\n";
        for (Index i = 0; i < q.size(); ++i) {
            csv << (i + 1) << ',' << format_double(q[i]) << '\n';
        }
    }
    write_text(o.output, csv.str());
    return 0;
}

// ---- separability ----------------------------------------------------------

struct SeparabilityOptions
{
    std::string input1;
    std::string input2;
    std::string column;
    Index length    = 0;
    double omega    = 1.0 / 6.0;
    Index window    = 0;
    std::string metric = "identity";
    double alpha    = 1.0;
    std::vector<Index> sweep_lengths;
    std::vector<double> sweep_alphas;
    double window_ratio = 0.5;
    std::string output;
};

Vector sine(Index n, double omega)
{
    Vector v(n);
    for (Index k = 1; k <= n; ++k) {
        v[k - 1] = std::cos(2.0 * std::numbers::pi * omega * static_cast<double>(k));
    }
    return v;
}

DiagonalMetric metric_for(const std::string& name, Index n, Index window, double alpha)
{
    const Index cols = n - window + 1;
    if (name == "identity") return DiagonalMetric::identity(cols);
    if (name == "alpha") return alpha_metric(n, window, alpha);
    if (name == "chat") return chat_metric(n, window);
    throw usage_error("unknown metric '" + name + "' (identity, alpha, chat)");
}

json peak_json(const CorrelationPeak& p) { return {{"value", p.value}, {"first", p.first}, {"second", p.second}}; }

int run_separability(const SeparabilityOptions& o)
{
    const bool synthetic = o.input1.empty();
    if (synthetic != o.input2.empty()) {
        throw usage_error("give both --input1 and --input2, or neither (sine vs constant)");
    }
    if (!o.sweep_lengths.empty() || !o.sweep_alphas.empty()) {
        if (!synthetic) {
            throw usage_error("sweeps use the built-in sine-vs-constant pair");
        }
        std::ostringstream csv;
        csv << "N,L,alpha,rho,bound\n";
        auto row = [&](Index n, Index window, double alpha, const std::string& metric) {
            const Vector x1 = sine(n, o.omega);
            const Vector x2 = Vector::Ones(n);
            const auto rep  = weak_separability(x1, x2, window, metric_for(metric, n, window, alpha));
            const double bound = metric == "identity" ? separability_bounds(n, window, 1.0, o.omega).bound
                               : metric == "alpha"   ? separability_bounds(n, window, alpha, o.omega).bound
                                                     : std::numeric_limits<double>::quiet_NaN();
            csv << n << ',' << window << ',' << format_double(alpha) << ',' << format_double(rep.rho) << ','
                << (std::isnan(bound) ? std::string() : format_double(bound)) << '\n';
        };
        for (Index n : o.sweep_lengths) {
            const auto window = static_cast<Index>(static_cast<double>(n) * o.window_ratio);
            row(n, window, o.metric == "alpha" ? o.alpha : 1.0, o.metric);
        }
        for (double a : o.sweep_alphas) {
            if (o.length <= 0 || o.window <= 0) {
                throw usage_error("--sweep-alphas needs --length and --window");
            }
            row(o.length, o.window, a, "alpha");
        }
        write_text(o.output, csv.str());
        return 0;
    }

    Vector x1;
    Vector x2;
    if (synthetic) {
        if (o.length <= 0) {
            throw usage_error("--length is required for the sine-vs-constant pair");
        }
        x1 = sine(o.length, o.omega);
        x2 = Vector::Ones(o.length);
    } else {
        x1 = read_series(o.input1, o.column);
        x2 = read_series(o.input2, o.column);
    }
    const Index n      = x1.size();
    const Index window = o.window;
    check_window(n, window);
    const auto rep = weak_separability(x1, x2, window, metric_for(o.metric, n, window, o.alpha));
    json out       = {
        {"N", n},
        {"L", window},
        {"metric", o.metric},
        {"max_col_corr", rep.max_col_corr},
        {"max_row_corr", rep.max_row_corr},
        {"rho", rep.rho},
        {"col_peak", peak_json(rep.col_peak)},
        {"row_peak", peak_json(rep.row_peak)},
        {"excluded_rows", rep.excluded_rows},
    };
    if (o.metric == "alpha") {
        out["alpha"] = o.alpha;
    }
    if (synthetic && (o.metric == "identity" || (o.metric == "alpha" && o.alpha > 0.0))) {
        const auto b   = separability_bounds(n, window, o.metric == "alpha" ? o.alpha : 1.0, o.omega);
        out["omega"]   = o.omega;
        out["bound"]   = {{"c_lk", b.c_lk}, {"d_lk", b.d_lk}, {"value", b.bound}};
    }
    write_text(o.output, out.dump(2) + "\n");
    return 0;
}

// ---- bench -----------------------------------------------------------------

struct BenchOptions
{
    std::string spec;
    std::string out_dir = ".";
    unsigned threads    = 1;
    std::optional<std::uint64_t> seed;
    std::optional<Index> replications;
};

int run_bench(const BenchOptions& o)
{
    std::ifstream in(o.spec, std::ios::binary);
    if (!in) {
        throw usage_error("cannot open spec '" + o.spec + "'");
    }
    json raw;
    try {
        raw = json::parse(in);
    } catch (const json::parse_error& e) {
        throw usage_error(o.spec + ": " + e.what());
    }
    if (o.seed) {
        raw["seed"] = *o.seed;
    }
    if (o.replications) {
        raw["replications"] = *o.replications;
    }
    io::BenchSpec spec;
    try {
        spec = io::bench_spec_from_json(raw);
    } catch (const io::input_error& e) {
        throw usage_error(o.spec + ": " + e.what());
    }
    const std::string hash = io::spec_hash(raw);
    const std::string dir  = o.out_dir.empty() ? "." : o.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw usage_error("cannot create output directory '" + dir + "': " + ec.message());
    }
    auto path              = [&](const std::string& name, const std::string& suffix) {
        return dir + "/" + name + suffix;
    };

    switch (spec.kind) {
    case io::SpecKind::weights_profile: {
        write_text(path(spec.profile.name, ".csv"),
                   io::provenance_header(hash, 0) + io::weights_profile_csv(spec.profile));
        break;
    }
    case io::SpecKind::experiment: {
        const auto& e      = spec.experiment;
        const auto result  = bench::run_experiment(e, o.threads);
        const auto header  = io::provenance_header(hash, e.seed);
        write_text(path(e.name, "_summary.csv"), header + io::experiment_summary_csv(result));
        write_text(path(e.name, "_points.csv"), header + io::experiment_points_csv(result));
        write_text(path(e.name, ".json"), io::experiment_to_json(result, hash).dump(2) + "\n");
        break;
    }
    case io::SpecKind::alpha_sweep: {
        const auto& s     = spec.sweep;
        const auto points = bench::alpha_sweep(s.base, s.alphas, s.window, s.rank, s.tol, s.max_iter, o.threads);
        write_text(path(s.base.name, ".csv"), io::provenance_header(hash, s.base.seed) + io::sweep_csv(points));
        break;
    }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Finite-rank time series approximation by Cadzow-type iterations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cadzow 1.0.0");

    ApproximateOptions ao;
    auto* approx = app.add_subcommand("approximate", "Approximate a series from CSV by a finite-rank series");
    approx->add_option("-i,--input", ao.input, "Input CSV (one numeric column, header optional)")->required();
    approx->add_option("--column", ao.column, "Column name or 1-based index");
    approx->add_option("-o,--output", ao.output, "Output CSV (index,observed,estimate); default stdout");
    approx->add_option("--trace", ao.trace, "Write the iteration trace as JSON");
    approx->add_option("-L,--window", ao.window, "Window length")->required();
    approx->add_option("-r,--rank", ao.rank, "Target rank")->required();
    approx->add_option("-a,--algorithm", ao.algorithm, "cadzow, weighted, extended, alpha, chat")->capture_default_str();
    approx->add_option("--alpha", ao.alpha, "Alpha for the alpha algorithm")->capture_default_str();
    approx->add_option("--extension", ao.extension, "Extended Cadzow padding: recurrent, zeros, constant")
        ->capture_default_str();
    approx->add_option("--tol", ao.tol, "Stop when the mean squared series change drops below this")
        ->capture_default_str();
    approx->add_option("--max-iter", ao.max_iter, "Iteration guard for --tol")->capture_default_str();
    approx->add_option("--iterations", ao.iterations, "Run exactly this many iterations (overrides --tol)");
    approx->add_option("--inner-tol", ao.inner_tol, "Inner EM tolerance")->capture_default_str();
    approx->add_option("--inner-max-iter", ao.inner_max_iter, "Inner EM iteration limit")->capture_default_str();
    approx->add_flag("--adjust", ao.adjust, "Rescale the estimate by the least-squares factor");
    approx->add_flag("--rank-diagnostics", ao.rank_diagnostics, "Record the numerical rank of each iterate");

    WeightsOptions wo;
    auto* weights = app.add_subcommand("weights", "Print series weights or a diagonal metric as CSV");
    weights
        ->add_option("-s,--scheme", wo.scheme,
                     "unit, trapezoid, inverse, alpha, chat, extended, alpha-metric, chat-metric")
        ->required();
    weights->add_option("-N,--length", wo.length, "Series length")->required();
    weights->add_option("-L,--window", wo.window, "Window length")->required();
    weights->add_option("--alpha", wo.alpha, "Alpha for alpha schemes")->capture_default_str();
    weights->add_flag("--normalize", wo.normalize, "Scale to unit sum");
    weights->add_option("-o,--output", wo.output, "Output CSV; default stdout");

    SeparabilityOptions so;
    auto* sep = app.add_subcommand("separability", "Weak separability of two series");
    sep->add_option("--input1", so.input1, "First series CSV");
    sep->add_option("--input2", so.input2, "Second series CSV");
    sep->add_option("--column", so.column, "Column name or 1-based index");
    sep->add_option("-N,--length", so.length, "Length of the built-in cos(2 pi omega k) vs constant pair");
    sep->add_option("--omega", so.omega, "Frequency of the built-in pair")->capture_default_str();
    sep->add_option("-L,--window", so.window, "Window length");
    sep->add_option("--metric", so.metric, "identity, alpha, chat")->capture_default_str();
    sep->add_option("--alpha", so.alpha, "Alpha for the alpha metric")->capture_default_str();
    sep->add_option("--sweep-lengths", so.sweep_lengths, "CSV of rho against N (L = ratio * N)")->delimiter(',');
    sep->add_option("--sweep-alphas", so.sweep_alphas, "CSV of rho against alpha at fixed N, L")->delimiter(',');
    sep->add_option("--window-ratio", so.window_ratio, "L / N for --sweep-lengths")->capture_default_str();
    sep->add_option("-o,--output", so.output, "Output file; default stdout");

    BenchOptions bo;
    auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark spec (JSON)");
    bench_cmd->add_option("spec", bo.spec, "Spec file")->required();
    bench_cmd->add_option("--out-dir", bo.out_dir, "Directory for result files")->capture_default_str();
    bench_cmd->add_option("--threads", bo.threads, "Worker threads")->capture_default_str();
    bench_cmd->add_option("--seed", bo.seed, "Override the spec seed");
    bench_cmd->add_option("--replications", bo.replications, "Override the replication count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*approx) return run_approximate(ao);
        if (*weights) return run_weights(wo);
        if (*sep) return run_separability(so);
        if (*bench_cmd) return run_bench(bo);
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const parameter_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const degenerate_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
