#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <cadzow/bench/experiment.hpp>
#include <cadzow/common.hpp>
#include <cadzow/format.hpp>
#include <cadzow/solvers.hpp>
#include <cadzow/weights.hpp>

namespace cadzow::io
{

using json = nlohmann::json;

/// Malformed input; `line` is 1-based, 0 when not tied to a line.
class input_error : public std::runtime_error
{
public:
    input_error(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

namespace detail
{

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            fields.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    fields.push_back(field);
    return fields;
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

} // namespace detail

///
/// Reads one numeric column. `column` is a header name or a 1-based index;
/// empty selects the first column. A header row is recognized when the first
/// non-blank line does not parse as a number in the selected column.
///
inline Vector read_series_csv(std::istream& in, const std::string& column = {})
{
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> index;
    bool first_row = true;

    std::optional<std::size_t> numeric_column;
    if (!column.empty()) {
        double d = 0.0;
        if (parse_double(column, d)) {
            if (d < 1.0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
                throw input_error("column index must be a positive integer");
            }
            numeric_column = static_cast<std::size_t>(d) - 1;
        }
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty() || line[0] == '#') {
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (first_row) {
            first_row = false;
            if (numeric_column) {
                index = *numeric_column;
            } else if (column.empty()) {
                index = 0;
            }
            double d = 0.0;
            const bool numeric = index && *index < fields.size() && parse_double(fields[*index], d);
            if (!numeric) {
                // Header row.
                if (!index) {
                    for (std::size_t i = 0; i < fields.size(); ++i) {
                        if (detail::trim(fields[i]) == column) {
                            index = i;
                        }
                    }
                    if (!index) {
                        throw input_error("no column named '" + column + "'", line_no);
                    }
                }
                continue;
            }
        }
        if (*index >= fields.size()) {
            throw input_error("missing column " + std::to_string(*index + 1), line_no);
        }
        double v = 0.0;
        if (!parse_double(fields[*index], v)) {
            throw input_error("not a number: '" + detail::trim(fields[*index]) + "'", line_no);
        }
        if (!std::isfinite(v)) {
            throw input_error("non-finite value", line_no);
        }
        values.push_back(v);
    }
    if (values.size() < 3) {
        throw input_error("series needs at least 3 values, got " + std::to_string(values.size()));
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

/// 64-bit FNV-1a of a string, as 16 hex digits.
inline std::string hash_hex(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : text) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Hash of the canonical (sorted-key, compact) serialization.
inline std::string spec_hash(const json& spec) { return hash_hex(spec.dump()); }

// ---- traces ----------------------------------------------------------------

inline json trace_to_json(const SolverTrace& trace)
{
    json records = json::array();
    for (const auto& r : trace.records) {
        json rec = {
            {"iter", r.iter},
            {"objective", r.objective},
            {"hankel_gap", r.hankel_gap},
            {"series_delta", r.series_delta},
            {"pyth_residual", r.pyth_residual},
            {"inner_iterations", r.inner_iterations},
            {"inner_converged", r.inner_converged},
        };
        rec["num_rank"] = r.num_rank >= 0 ? json(r.num_rank) : json(nullptr);
        records.push_back(std::move(rec));
    }
    json out = {
        {"iterations", trace.iterations},
        {"stop_reason", trace.stop_reason == StopReason::tolerance ? "tolerance" : "iteration_limit"},
        {"converged", trace.converged},
        {"not_converged", !trace.converged},
        {"inner_failures", trace.inner_failures},
        {"degenerate_spectrum", trace.degenerate_spectrum},
        {"outside_support", trace.outside_support},
        {"records", std::move(records)},
    };
    out["adjustment"] = trace.adjustment ? json(*trace.adjustment) : json(nullptr);
    return out;
}

// ---- solver configs --------------------------------------------------------

inline json config_to_json(const SolverConfig& c)
{
    json stop = {{"max_iter", c.stop.max_iter}};
    stop["tol"] = c.stop.tol ? json(*c.stop.tol) : json(nullptr);
    json out    = {
        {"algorithm", std::string(algorithm_name(c.algorithm))},
        {"window", c.window},
        {"rank", c.rank},
        {"stop", std::move(stop)},
        {"adjust", c.adjust},
    };
    if (c.algorithm == Algorithm::cadzow_alpha) {
        out["alpha"] = c.alpha;
    }
    if (c.algorithm == Algorithm::extended_cadzow) {
        out["extension"] = c.extension == ExtensionPolicy::recurrent ? "recurrent"
                         : c.extension == ExtensionPolicy::zeros     ? "zeros"
                                                                     : "constant";
    }
    if (c.algorithm == Algorithm::weighted_cadzow || c.algorithm == Algorithm::extended_cadzow) {
        out["inner"] = {{"max_iter", c.inner.max_iter}, {"tol", c.inner.tol}};
    }
    return out;
}

namespace detail
{

template <typename T>
T field(const json& j, const char* key, T fallback)
{
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw input_error(std::string("field '") + key + "' has the wrong type");
    }
}

inline const json& required(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) {
        throw input_error(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

} // namespace detail

inline SolverConfig config_from_json(const json& j)
{
    if (!j.is_object()) {
        throw input_error("solver config must be an object");
    }
    SolverConfig c;
    const auto name = detail::field<std::string>(j, "algorithm", "cadzow");
    const auto alg  = parse_algorithm(name);
    if (!alg) {
        throw input_error("unknown algorithm '" + name + "'");
    }
    c.algorithm = *alg;
    c.window    = detail::field<Index>(j, "window", 0);
    c.rank      = detail::field<Index>(j, "rank", 0);
    c.alpha     = detail::field<double>(j, "alpha", 1.0);
    c.adjust    = detail::field<bool>(j, "adjust", false);
    const auto ext = detail::field<std::string>(j, "extension", "recurrent");
    const auto pol = parse_extension(ext);
    if (!pol) {
        throw input_error("unknown extension policy '" + ext + "'");
    }
    c.extension = *pol;
    if (j.contains("stop")) {
        const json& s = j.at("stop");
        c.stop.max_iter = detail::field<Index>(s, "max_iter", 1000);
        if (s.contains("tol") && !s.at("tol").is_null()) {
            c.stop.tol = detail::field<double>(s, "tol", 0.0);
        } else {
            c.stop.tol.reset();
        }
    }
    if (j.contains("inner")) {
        const json& s  = j.at("inner");
        c.inner.max_iter = detail::field<Index>(s, "max_iter", 1000);
        c.inner.tol      = detail::field<double>(s, "tol", 1e-4);
    }
    c.allow_degenerate_metric = detail::field<bool>(j, "allow_degenerate_metric", false);
    return c;
}

// ---- bench specs -----------------------------------------------------------

enum class SpecKind
{
    experiment,
    alpha_sweep,
    weights_profile,
};

struct ProfileCurve
{
    std::string label;
    WeightScheme scheme;
};

struct WeightsProfileSpec
{
    std::string name = "weights";
    Index length     = 0;
    Index window     = 0;
    bool normalize   = true;
    std::vector<ProfileCurve> curves;
};

struct AlphaSweepSpec
{
    bench::ExperimentSpec base;
    std::vector<double> alphas;
    Index window   = 0;
    Index rank     = 0;
    double tol     = 1e-8;
    Index max_iter = 1000;
};

struct BenchSpec
{
    SpecKind kind = SpecKind::experiment;
    bench::ExperimentSpec experiment;
    AlphaSweepSpec sweep;
    WeightsProfileSpec profile;
};

namespace detail
{

inline bench::SignalModel signal_from_json(const json& j)
{
    const auto name = j.is_string() ? j.get<std::string>() : field<std::string>(j, "model", "sine");
    if (name == "sine") {
        return bench::SignalModel::sine_wave();
    }
    if (name == "wine") {
        return bench::SignalModel::wine_model();
    }
    throw input_error("unknown signal model '" + name + "'");
}

inline bench::NoiseModel noise_from_json(const json& j)
{
    bench::NoiseModel n;
    n.scale = field<double>(j, "scale", 1.0);
    n.base  = field<double>(j, "base", 1.0);
    if (!(n.scale >= 0.0) || !(n.base > 0.0)) {
        throw input_error("noise needs scale >= 0 and base > 0");
    }
    return n;
}

inline void fill_common(const json& j, bench::ExperimentSpec& e)
{
    e.name         = field<std::string>(j, "name", "experiment");
    e.signal       = signal_from_json(j.contains("signal") ? j.at("signal") : json("sine"));
    e.noise        = j.contains("noise") ? noise_from_json(j.at("noise")) : bench::NoiseModel::white(1.0);
    e.length       = field<Index>(j, "length", 40);
    e.replications = field<Index>(j, "replications", 1000);
    e.seed         = field<std::uint64_t>(j, "seed", 0);
    if (e.length < 3 || e.replications < 1) {
        throw input_error("experiment needs length >= 3 and replications >= 1");
    }
}

} // namespace detail

inline BenchSpec bench_spec_from_json(const json& j)
{
    if (!j.is_object()) {
        throw input_error("bench spec must be a JSON object");
    }
    BenchSpec spec;
    const auto kind = detail::field<std::string>(j, "kind", "experiment");
    if (kind == "experiment") {
        spec.kind = SpecKind::experiment;
        auto& e   = spec.experiment;
        detail::fill_common(j, e);
        e.report_adjusted = detail::field<bool>(j, "report_adjusted", false);
        e.checkpoints     = detail::field<std::vector<Index>>(j, "checkpoints", {0});
        const json& methods = detail::required(j, "methods");
        if (!methods.is_array() || methods.empty()) {
            throw input_error("'methods' must be a non-empty array");
        }
        for (const auto& m : methods) {
            e.methods.push_back({detail::field<std::string>(m, "label", "method"),
                                 config_from_json(detail::required(m, "config"))});
        }
    } else if (kind == "alpha_sweep") {
        spec.kind = SpecKind::alpha_sweep;
        auto& s   = spec.sweep;
        detail::fill_common(j, s.base);
        s.alphas   = detail::field<std::vector<double>>(j, "alphas", {});
        s.window   = detail::field<Index>(j, "window", 0);
        s.rank     = detail::field<Index>(j, "rank", 0);
        s.tol      = detail::field<double>(j, "tol", 1e-8);
        s.max_iter = detail::field<Index>(j, "max_iter", 1000);
        if (s.alphas.empty()) {
            throw input_error("'alphas' must be a non-empty array");
        }
    } else if (kind == "weights_profile") {
        spec.kind   = SpecKind::weights_profile;
        auto& p     = spec.profile;
        p.name      = detail::field<std::string>(j, "name", "weights");
        p.length    = detail::required(j, "length").get<Index>();
        p.window    = detail::required(j, "window").get<Index>();
        p.normalize = detail::field<bool>(j, "normalize", true);
        for (const auto& c : detail::required(j, "curves")) {
            const auto scheme = detail::field<std::string>(c, "scheme", "");
            const auto sk     = parse_scheme(scheme);
            if (!sk) {
                throw input_error("unknown weight scheme '" + scheme + "'");
            }
            p.curves.push_back({detail::field<std::string>(c, "label", scheme),
                                WeightScheme{*sk, detail::field<double>(c, "alpha", 1.0)}});
        }
        if (p.curves.empty()) {
            throw input_error("'curves' must be a non-empty array");
        }
    } else {
        throw input_error("unknown spec kind '" + kind + "'");
    }
    return spec;
}

// ---- result writers --------------------------------------------------------

inline std::string provenance_header(const std::string& hash, std::uint64_t seed)
{
    return "# spec_hash=" + hash + " seed=" + std::to_string(seed) + "\n";
}

/// One row per method x checkpoint.
inline std::string experiment_summary_csv(const bench::ExperimentResult& r)
{
    std::ostringstream out;
    out << "label,iteration,adjusted,rmse_signal,rmse_series,mean_iterations,failures\n";
    for (const auto& m : r.methods) {
        for (const auto& c : m.checkpoints) {
            out << m.label << ',' << c.iteration << ',' << (c.adjusted ? 1 : 0) << ',' << format_double(c.rmse_signal)
                << ',' << format_double(c.rmse_series) << ',' << format_double(m.mean_iterations) << ','
                << m.failures << '\n';
        }
    }
    return out.str();
}

/// Per-index RMSE curves, one column per method x checkpoint.
inline std::string experiment_points_csv(const bench::ExperimentResult& r)
{
    std::ostringstream out;
    out << "index";
    Index n = 0;
    for (const auto& m : r.methods) {
        for (const auto& c : m.checkpoints) {
            out << ',' << m.label << "@" << c.iteration << (c.adjusted ? "adj" : "");
            n = std::max(n, static_cast<Index>(c.per_point_rmse.size()));
        }
    }
    out << '\n';
    for (Index i = 0; i < n; ++i) {
        out << (i + 1);
        for (const auto& m : r.methods) {
            for (const auto& c : m.checkpoints) {
                out << ',' << (i < c.per_point_rmse.size() ? format_double(c.per_point_rmse[i]) : "");
            }
        }
        out << '\n';
    }
    return out.str();
}

inline json experiment_to_json(const bench::ExperimentResult& r, const std::string& hash)
{
    json methods = json::array();
    for (const auto& m : r.methods) {
        json cps = json::array();
        for (const auto& c : m.checkpoints) {
            cps.push_back({{"iteration", c.iteration},
                           {"adjusted", c.adjusted},
                           {"rmse_signal", c.rmse_signal},
                           {"rmse_series", c.rmse_series}});
        }
        methods.push_back({{"label", m.label},
                           {"mean_iterations", m.mean_iterations},
                           {"failures", m.failures},
                           {"failure_messages", m.failure_messages},
                           {"checkpoints", std::move(cps)}});
    }
    return {{"name", r.name},  {"spec_hash", hash},         {"seed", r.seed},
            {"replications", r.replications}, {"methods", std::move(methods)}};
}

inline std::string sweep_csv(const std::vector<bench::AlphaSweepPoint>& points)
{
    std::ostringstream out;
    out << "alpha,rmse_signal,rmse_series,mean_iterations\n";
    for (const auto& p : points) {
        out << format_double(p.alpha) << ',' << format_double(p.rmse_signal) << ',' << format_double(p.rmse_series)
            << ',' << format_double(p.mean_iterations) << '\n';
    }
    return out.str();
}

/// Columns i, then one q column per curve.
inline std::string weights_profile_csv(const WeightsProfileSpec& spec)
{
    std::vector<SeriesWeights> columns;
    for (const auto& c : spec.curves) {
        SeriesWeights q = scheme_series_weights(c.scheme, spec.length, spec.window);
        columns.push_back(spec.normalize ? normalize_weights(q) : q);
    }
    std::ostringstream out;
    out << 'i';
    for (const auto& c : spec.curves) {
        out << ',' << c.label;
    }
    out << '\n';
    for (Index i = 0; i < spec.length; ++i) {
        out << (i + 1);
        for (const auto& q : columns) {
            out << ',' << format_double(q[i]);
        }
        out << '\n';
    }
    return out.str();
}

} // namespace cadzow::io
