#include "embedcast/synth.hpp"

#include "embedcast/csv.hpp"
#include "embedcast/error.hpp"
#include "embedcast/random.hpp"
#include "embedcast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace embedcast {

void SystemSpec::validate() const
{
    if (!(dt > 0.0)) {
        throw ConfigError("dt must be > 0");
    }
    if (n_steps < 1) {
        throw ConfigError("n_steps must be >= 1");
    }
    if (kind == SystemKind::Lorenz96 && dimension < 4) {
        throw ConfigError("Lorenz-96 dimension must be >= 4");
    }
    const std::size_t dim = kind == SystemKind::Lorenz63 ? 3 : dimension;
    if (!initial.empty() && initial.size() != dim) {
        throw ConfigError("initial state has " + std::to_string(initial.size()) + " values, system has " +
                          std::to_string(dim));
    }
}

std::string SystemSpec::describe() const
{
    std::ostringstream out;
    out << "system = " << (kind == SystemKind::Lorenz63 ? "lorenz63" : "lorenz96") << '\n';
    if (kind == SystemKind::Lorenz63) {
        out << "sigma = " << csv::format_double(sigma) << '\n'
            << "rho = " << csv::format_double(rho) << '\n'
            << "beta = " << csv::format_double(beta) << '\n';
    } else {
        out << "dimension = " << dimension << '\n' << "forcing = " << csv::format_double(forcing) << '\n';
    }
    out << "dt = " << csv::format_double(dt) << '\n'
        << "n_steps = " << n_steps << '\n'
        << "burn_in = " << burn_in << '\n'
        << "seed = " << seed << '\n';
    if (!initial.empty()) {
        out << "initial =";
        for (std::size_t i = 0; i < initial.size(); ++i) {
            out << (i == 0 ? " " : ",") << csv::format_double(initial[i]);
        }
        out << '\n';
    }
    return out.str();
}

namespace {

using State = std::vector<double>;

void lorenz63(const SystemSpec& s, const State& x, State& dx)
{
    dx[0] = s.sigma * (x[1] - x[0]);
    dx[1] = x[0] * (s.rho - x[2]) - x[1];
    dx[2] = x[0] * x[1] - s.beta * x[2];
}

// dx_i/dt = (x_{i+1} - x_{i-2}) x_{i-1} - x_i + F, indices cyclic.
void lorenz96(const SystemSpec& s, const State& x, State& dx)
{
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double xp1 = x[(i + 1) % n];
        const double xm1 = x[(i + n - 1) % n];
        const double xm2 = x[(i + n - 2) % n];
        dx[i] = (xp1 - xm2) * xm1 - x[i] + s.forcing;
    }
}

class Rk4 {
public:
    explicit Rk4(const SystemSpec& spec)
        : spec_(spec), n_(spec.kind == SystemKind::Lorenz63 ? 3 : spec.dimension), k1_(n_), k2_(n_), k3_(n_),
          k4_(n_), tmp_(n_)
    {
    }

    void step(State& x)
    {
        const double h = spec_.dt;
        rhs(x, k1_);
        for (std::size_t i = 0; i < n_; ++i) {
            tmp_[i] = x[i] + 0.5 * h * k1_[i];
        }
        rhs(tmp_, k2_);
        for (std::size_t i = 0; i < n_; ++i) {
            tmp_[i] = x[i] + 0.5 * h * k2_[i];
        }
        rhs(tmp_, k3_);
        for (std::size_t i = 0; i < n_; ++i) {
            tmp_[i] = x[i] + h * k3_[i];
        }
        rhs(tmp_, k4_);
        for (std::size_t i = 0; i < n_; ++i) {
            x[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        }
    }

private:
    void rhs(const State& x, State& dx) const
    {
        if (spec_.kind == SystemKind::Lorenz63) {
            lorenz63(spec_, x, dx);
        } else {
            lorenz96(spec_, x, dx);
        }
    }

    const SystemSpec& spec_;
    std::size_t n_;
    State k1_, k2_, k3_, k4_, tmp_;
};

} // namespace

SeriesFrame integrate(const SystemSpec& spec)
{
    spec.validate();
    const std::size_t n = spec.kind == SystemKind::Lorenz63 ? 3 : spec.dimension;
    State x = spec.initial;
    if (x.empty()) {
        Rng rng(spec.seed);
        x.assign(n, spec.kind == SystemKind::Lorenz63 ? 1.0 : spec.forcing);
        if (spec.kind == SystemKind::Lorenz96) {
            x[0] += 0.01;
        }
        for (auto& v : x) {
            v += 1e-3 * rng.normal();
        }
    }

    std::vector<Column> cols(n);
    for (std::size_t i = 0; i < n; ++i) {
        cols[i].name = spec.kind == SystemKind::Lorenz63 ? std::string(1, "xyz"[i]) : "x" + std::to_string(i);
        cols[i].values.reserve(spec.n_steps);
    }
    Rk4 rk(spec);
    const std::size_t total = spec.burn_in + spec.n_steps;
    for (std::size_t t = 0; t < total; ++t) {
        if (t >= spec.burn_in) {
            for (std::size_t i = 0; i < n; ++i) {
                cols[i].values.push_back(x[i]);
            }
        }
        rk.step(x);
        for (double v : x) {
            if (!std::isfinite(v)) {
                throw DataError("integration diverged at step " + std::to_string(t + 1));
            }
        }
    }
    return SeriesFrame(std::move(cols));
}

void ImpulseOptions::validate() const
{
    if (!(rate >= 0.0 && rate <= 1.0)) {
        throw ConfigError("impulse rate must lie in [0, 1]");
    }
    if (!(decay > 0.0 && decay < 1.0)) {
        throw ConfigError("impulse decay must lie in (0, 1)");
    }
}

ImpulseResult apply_impulses(const SeriesFrame& frame, const std::vector<Impulse>& impulses,
                             const std::vector<double>& column_magnitude, double decay)
{
    if (column_magnitude.size() != frame.width()) {
        throw ConfigError("one impulse magnitude per column is required");
    }
    const std::size_t T = frame.length();
    std::vector<std::vector<double>> track(frame.width(), std::vector<double>(T, 0.0));
    for (const auto& imp : impulses) {
        if (imp.column >= frame.width() || imp.start >= T) {
            throw ConfigError("impulse outside the frame");
        }
        double amp = column_magnitude[imp.column] * imp.g;
        for (std::size_t t = imp.start; t < T; ++t) {
            track[imp.column][t] += amp;
            amp *= decay;
            if (amp == 0.0) {
                break;
            }
        }
    }
    std::vector<Column> noisy;
    std::vector<Column> noise;
    for (std::size_t c = 0; c < frame.width(); ++c) {
        const auto& src = frame.columns()[c];
        std::vector<double> v(T);
        for (std::size_t t = 0; t < T; ++t) {
            v[t] = src.values[t] + track[c][t];
        }
        noisy.push_back({src.name, std::move(v)});
        noise.push_back({src.name, std::move(track[c])});
    }
    return {SeriesFrame(std::move(noisy), frame.dates(), frame.first_step()), impulses,
            SeriesFrame(std::move(noise), frame.dates(), frame.first_step())};
}

ImpulseResult add_impulses(const SeriesFrame& frame, const ImpulseOptions& options)
{
    options.validate();
    std::vector<bool> chosen(frame.width(), options.columns.empty());
    const auto names = frame.names();
    for (const auto& name : options.columns) {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) {
            throw ConfigError("impulse column not in frame: " + name);
        }
        chosen[static_cast<std::size_t>(it - names.begin())] = true;
    }
    std::vector<double> magnitude(frame.width(), options.magnitude);
    if (options.magnitude_in_sd) {
        for (std::size_t c = 0; c < frame.width(); ++c) {
            magnitude[c] *= sample_sd(frame.columns()[c].values);
        }
    }
    Rng rng(options.seed);
    std::vector<Impulse> impulses;
    for (std::size_t t = 0; t < frame.length(); ++t) {
        for (std::size_t c = 0; c < frame.width(); ++c) {
            if (chosen[c] && rng.bernoulli(options.rate)) {
                impulses.push_back({t, c, rng.normal()});
            }
        }
    }
    return apply_impulses(frame, impulses, magnitude, options.decay);
}

} // namespace embedcast
