#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstring>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <cadzow/bench/rng.hpp>
#include <cadzow/bench/signal.hpp>
#include <cadzow/common.hpp>
#include <cadzow/format.hpp>
#include <cadzow/solvers.hpp>

namespace cadzow::bench
{

struct MethodSpec
{
    std::string label;
    SolverConfig config;
};

///
/// A seeded Monte Carlo study: every method sees the same noise realization
/// in each replication. Checkpoint k records the estimate after iteration k
/// (or the final one if the method stopped earlier); checkpoint 0 is the final
/// estimate.
///
struct ExperimentSpec
{
    std::string name = "experiment";
    SignalModel signal = SignalModel::sine_wave();
    NoiseModel noise   = NoiseModel::white(1.0);
    Index length       = 40;
    Index replications = 1000;
    std::uint64_t seed = 0;
    std::vector<MethodSpec> methods;
    std::vector<Index> checkpoints = {0};
    /// Also report the adjusted estimate gamma * y at every checkpoint.
    bool report_adjusted = false;
};

struct CheckpointResult
{
    Index iteration = 0;
    bool adjusted   = false;
    double rmse_signal = 0.0;
    double rmse_series = 0.0;
    Vector per_point_rmse; ///< per series index, against the signal
    std::vector<double> mse_signal; ///< per successful replication
    std::vector<double> mse_series;
};

struct MethodResult
{
    std::string label;
    std::vector<CheckpointResult> checkpoints;
    double mean_iterations = 0.0;
    std::vector<Index> iterations; ///< per successful replication
    Index failures = 0;
    std::vector<std::string> failure_messages;
};

struct ExperimentResult
{
    std::string name;
    Index replications = 0;
    std::uint64_t seed = 0;
    std::vector<MethodResult> methods;
    /// FNV-1a hash of each replication's noise draw.
    std::vector<std::uint64_t> noise_hashes;

    const MethodResult& method(const std::string& label) const
    {
        for (const auto& m : methods) {
            if (m.label == label) {
                return m;
            }
        }
        throw parameter_error("no method labelled '" + label + "'");
    }

    const CheckpointResult& at(const std::string& label, Index iteration, bool adjusted = false) const
    {
        for (const auto& c : method(label).checkpoints) {
            if (c.iteration == iteration && c.adjusted == adjusted) {
                return c;
            }
        }
        throw parameter_error("no checkpoint " + std::to_string(iteration) + " for '" + label + "'");
    }
};

inline std::uint64_t fnv1a(const Vector& v)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (Index i = 0; i < v.size(); ++i) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v[i], sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

namespace detail
{

// Squared errors of one method in one replication, per checkpoint slot.
struct ReplicationOutcome
{
    bool ok = true;
    std::string message;
    Index iterations = 0;
    std::vector<Vector> sq_signal; ///< per slot, per point
    std::vector<double> mse_series;
};

struct Slot
{
    Index iteration;
    bool adjusted;
};

inline std::vector<Slot> slots_for(const ExperimentSpec& spec)
{
    std::vector<Slot> slots;
    for (Index k : spec.checkpoints) {
        slots.push_back({k, false});
        if (spec.report_adjusted) {
            slots.push_back({k, true});
        }
    }
    return slots;
}

inline ReplicationOutcome run_one(const MethodSpec& method, const Vector& signal, const Vector& observed,
                                  const std::vector<Index>& checkpoints, bool with_adjusted)
{
    ReplicationOutcome out;
    const Index n = observed.size();
    std::vector<Vector> snapshots(checkpoints.size());
    IterateObserver observer = [&](Index iter, const Vector& estimate) {
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            if (checkpoints[c] == iter) {
                snapshots[c] = estimate;
            }
        }
    };
    SolverConfig config = method.config;
    config.adjust       = false;
    try {
        const SolveResult result = solve(observed, config, observer);
        out.iterations           = result.trace.iterations;
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            const Vector& snap = (checkpoints[c] == 0 || snapshots[c].size() == 0) ? result.estimate : snapshots[c];
            const Vector raw   = method.config.adjust ? adjust(observed, snap) : snap;
            auto push = [&](const Vector& est) {
                out.sq_signal.push_back((est - signal).array().square().matrix());
                out.mse_series.push_back((est - observed).squaredNorm() / static_cast<double>(n));
            };
            push(raw);
            if (with_adjusted) {
                push(adjust(observed, raw));
            }
        }
    } catch (const std::exception& e) {
        out.ok      = false;
        out.message = e.what();
    }
    return out;
}

} // namespace detail

///
/// Runs every method on `replications` seeded noise draws. Replication r
/// uses NormalStream(seed, r); results are reduced in replication order, so
/// the output does not depend on `threads`.
///
inline ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads = 1)
{
    cadzow::detail::require(spec.replications >= 1, "experiment needs at least one replication");
    cadzow::detail::require(!spec.methods.empty(), "experiment has no methods");
    cadzow::detail::require(!spec.checkpoints.empty(), "experiment has no checkpoints");
    for (const auto& m : spec.methods) {
        validate(m.config, spec.length);
    }

    const Vector signal            = spec.signal.generate(spec.length);
    const auto slots               = detail::slots_for(spec);
    const std::size_t method_count = spec.methods.size();
    const auto reps                = static_cast<std::size_t>(spec.replications);

    std::vector<std::vector<detail::ReplicationOutcome>> outcomes(reps);
    std::vector<std::uint64_t> hashes(reps);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
            const Vector noise    = spec.noise.draw(spec.length, spec.seed, r);
            const Vector observed = signal + noise;
            hashes[r]             = fnv1a(noise);
            outcomes[r].reserve(method_count);
            for (const auto& method : spec.methods) {
                outcomes[r].push_back(
                    detail::run_one(method, signal, observed, spec.checkpoints, spec.report_adjusted));
            }
        }
    };
    threads = std::max(1u, threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    ExperimentResult result;
    result.name         = spec.name;
    result.replications = spec.replications;
    result.seed         = spec.seed;
    result.noise_hashes = std::move(hashes);
    const double n      = static_cast<double>(spec.length);
    for (std::size_t m = 0; m < method_count; ++m) {
        MethodResult mr;
        mr.label = spec.methods[m].label;
        std::vector<Vector> sum_sq(slots.size(), Vector::Zero(spec.length));
        std::vector<double> sum_series(slots.size(), 0.0);
        mr.checkpoints.resize(slots.size());
        double iter_sum = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            const auto& o = outcomes[r][m];
            if (!o.ok) {
                ++mr.failures;
                mr.failure_messages.push_back("replication " + std::to_string(r) + ": " + o.message);
                continue;
            }
            mr.iterations.push_back(o.iterations);
            iter_sum += static_cast<double>(o.iterations);
            for (std::size_t s = 0; s < slots.size(); ++s) {
                sum_sq[s] += o.sq_signal[s];
                sum_series[s] += o.mse_series[s];
                mr.checkpoints[s].mse_signal.push_back(o.sq_signal[s].sum() / n);
                mr.checkpoints[s].mse_series.push_back(o.mse_series[s]);
            }
        }
        const double used  = static_cast<double>(mr.iterations.size());
        mr.mean_iterations = used > 0 ? iter_sum / used : 0.0;
        for (std::size_t s = 0; s < slots.size(); ++s) {
            auto& cp     = mr.checkpoints[s];
            cp.iteration = slots[s].iteration;
            cp.adjusted  = slots[s].adjusted;
            if (used > 0) {
                cp.per_point_rmse = (sum_sq[s] / used).array().sqrt();
                cp.rmse_signal    = std::sqrt(sum_sq[s].sum() / (used * n));
                cp.rmse_series    = std::sqrt(sum_series[s] / used);
            }
        }
        result.methods.push_back(std::move(mr));
    }
    return result;
}

/// Per-index RMSE curve of one method at one checkpoint.
inline Vector per_point_rmse(const ExperimentResult& result, const std::string& label, Index iteration,
                             bool adjusted = false)
{
    return result.at(label, iteration, adjusted).per_point_rmse;
}

struct AlphaSweepPoint
{
    double alpha = 1.0;
    double rmse_signal = 0.0;
    double rmse_series = 0.0;
    double mean_iterations = 0.0;
};

///
/// Cadzow(alpha) for each alpha on a shared sample, run until the mean squared
/// series change drops below `tol` (guarded by `max_iter`).
///
inline std::vector<AlphaSweepPoint> alpha_sweep(ExperimentSpec base, const std::vector<double>& alphas,
                                                Index window, Index rank, double tol = 1e-8,
                                                Index max_iter = 1000, unsigned threads = 1)
{
    base.methods.clear();
    base.checkpoints     = {0};
    base.report_adjusted = false;
    for (double a : alphas) {
        SolverConfig cfg;
        cfg.algorithm = Algorithm::cadzow_alpha;
        cfg.window    = window;
        cfg.rank      = rank;
        cfg.alpha     = a;
        cfg.stop      = StopRule::mean_square_delta(tol, max_iter);
        base.methods.push_back({"alpha=" + format_double(a), cfg});
    }
    const ExperimentResult result = run_experiment(base, threads);
    std::vector<AlphaSweepPoint> out;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const auto& m  = result.methods[i];
        const auto& cp = m.checkpoints.front();
        out.push_back({alphas[i], cp.rmse_signal, cp.rmse_series, m.mean_iterations});
    }
    return out;
}

/// The wine-model study: L = 84, r = 11, tolerance 1e-4, one Cadzow(alpha) per grid value.
inline ExperimentSpec wine_model_spec(Index replications, std::uint64_t seed,
                                      const std::vector<double>& alphas = {1.0, 0.8, 0.6, 0.4, 0.2, 0.1, 0.05},
                                      double noise_scale = 353.17)
{
    ExperimentSpec spec;
    spec.name         = "wine_model";
    spec.signal       = SignalModel::wine_model();
    spec.noise        = NoiseModel{noise_scale, 0.9967};
    spec.length       = 168;
    spec.replications = replications;
    spec.seed         = seed;
    spec.checkpoints  = {0};
    for (double a : alphas) {
        SolverConfig cfg;
        cfg.algorithm = Algorithm::cadzow_alpha;
        cfg.window    = 84;
        cfg.rank      = 11;
        cfg.alpha     = a;
        cfg.stop      = StopRule::mean_square_delta(1e-4, 1000);
        spec.methods.push_back({"alpha=" + format_double(a), cfg});
    }
    return spec;
}

inline ExperimentResult wine_model_experiment(const ExperimentSpec& spec, unsigned threads = 1)
{
    return run_experiment(spec, threads);
}

} // namespace cadzow::bench
