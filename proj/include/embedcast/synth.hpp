#pragma once

#include "embedcast/timeseries.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace embedcast {

enum class SystemKind { Lorenz63, Lorenz96 };

struct SystemSpec {
    SystemKind kind = SystemKind::Lorenz63;
    std::size_t dimension = 40; ///< Lorenz-96 only
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    double forcing = 8.0;       ///< Lorenz-96 only
    double dt = 0.01;
    std::size_t n_steps = 5000; ///< rows emitted after burn-in
    std::size_t burn_in = 0;
    std::uint64_t seed = 1;
    /// Starting state; when empty, Lorenz-63 starts at (1,1,1) and Lorenz-96
    /// at x_i = F, both plus a small seeded perturbation.
    std::vector<double> initial;

    void validate() const;
    /// Plain-text "key = value" description, one per line.
    std::string describe() const;
};

/// Fixed-step fourth-order Runge-Kutta trajectory after burn-in, one column
/// per state coordinate (x,y,z for Lorenz-63; x0..x{n-1} for Lorenz-96).
/// Throws DataError naming the step when the state stops being finite.
SeriesFrame integrate(const SystemSpec& spec);

/// One impulse: at step `start` (row index) column `column` receives
/// magnitude * g * decay^(t - start) for every t >= start.
struct Impulse {
    std::size_t start = 0;
    std::size_t column = 0;
    double g = 0.0;
};

struct ImpulseOptions {
    double rate = 0.0;       ///< per-step, per-column arrival probability
    double magnitude = 1.0;
    bool magnitude_in_sd = false; ///< scale magnitude by each column's sample sd
    double decay = 0.9;
    std::uint64_t seed = 1;
    std::vector<std::string> columns; ///< empty = every column

    void validate() const;
};

struct ImpulseResult {
    SeriesFrame frame;
    std::vector<Impulse> impulses;
    SeriesFrame track; ///< additive noise per column; frame - track is the clean input
};

/// Superimpose explicit impulses (used directly and by add_impulses).
ImpulseResult apply_impulses(const SeriesFrame& frame, const std::vector<Impulse>& impulses,
                             const std::vector<double>& column_magnitude, double decay);

/// Bernoulli(rate) arrivals at each step for each chosen column, standard
/// normal amplitudes, exponentially decaying tails.
ImpulseResult add_impulses(const SeriesFrame& frame, const ImpulseOptions& options);

} // namespace embedcast
