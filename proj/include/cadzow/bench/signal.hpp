#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <cadzow/bench/rng.hpp>
#include <cadzow/common.hpp>

namespace cadzow::bench
{

/// One term amplitude * base^k * sin(2 pi frequency k + phase), or
/// amplitude * base^k when `oscillating` is false.
struct SignalComponent
{
    double amplitude = 0.0;
    double base      = 1.0;
    double frequency = 0.0;
    double phase     = 0.0;
    bool oscillating = true;
};

struct SignalModel
{
    std::string name = "custom";
    std::vector<SignalComponent> components;

    /// s_k = 5 sin(2 pi k / 6), rank 2.
    static SignalModel sine_wave()
    {
        return SignalModel{"sine", {{5.0, 1.0, 1.0 / 6.0, 0.0, true}}};
    }

    /// Exponential trend plus five modulated seasonal terms; rank 11.
    static SignalModel wine_model()
    {
        using std::numbers::pi;
        return SignalModel{"wine",
                           {
                               {3997.74, 0.9967, 0.0, 0.0, false},
                               {1174.75, 0.9942, 1.0 / 12.0, -2.249, true},
                               {425.75, 1.0001, 1.0 / 4.0, 2.333, true},
                               {211.55, 1.004, 1.0 / 6.0, 1.677, true},
                               {169.33, 1.0007, 1.0 / 2.4, 1.533, true},
                               {361.07, 0.9884, 1.0 / 3.0, -2.901, true},
                           }};
    }

    /// Values at k = 1, ..., n.
    Vector generate(Index n) const
    {
        Vector s = Vector::Zero(n);
        for (Index i = 0; i < n; ++i) {
            const double k = static_cast<double>(i + 1);
            double v       = 0.0;
            for (const auto& c : components) {
                double term = c.amplitude * std::pow(c.base, k);
                if (c.oscillating) {
                    term *= std::sin(2.0 * std::numbers::pi * c.frequency * k + c.phase);
                }
                v += term;
            }
            s[i] = v;
        }
        return s;
    }
};

/// Noise scale * base^k * eps_k with eps_k iid N(0, 1); base = 1 is white noise.
struct NoiseModel
{
    double scale = 1.0;
    double base  = 1.0;

    static NoiseModel white(double sigma) { return NoiseModel{sigma, 1.0}; }
    /// Standard deviation growing with the trend, 353.17 (0.9967)^k.
    static NoiseModel wine() { return NoiseModel{353.17, 0.9967}; }

    bool is_white() const { return base == 1.0; }

    Vector draw(Index n, std::uint64_t seed, std::uint64_t replication) const
    {
        NormalStream stream(seed, replication);
        Vector out(n);
        for (Index i = 0; i < n; ++i) {
            const double k = static_cast<double>(i + 1);
            out[i]         = scale * std::pow(base, k) * stream();
        }
        return out;
    }
};

} // namespace cadzow::bench
