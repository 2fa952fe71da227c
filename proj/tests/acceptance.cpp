// Acceptance harness: one PASS/FAIL line per criterion, with measured values.
// Criteria 8-10 drive the command-line tool; the rest call the library.

#include "oracles.hpp"

#include "embedcast/backtest.hpp"
#include "embedcast/csv.hpp"
#include "embedcast/random.hpp"
#include "embedcast/regress.hpp"
#include "embedcast/skill.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace embedcast;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& measured)
{
    std::cout << (pass ? "PASS" : "FAIL") << ' ' << id << ' ' << what << ": " << measured << std::endl;
    failures += pass ? 0 : 1;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

MatrixXd random_matrix(Rng& rng, Eigen::Index n, Eigen::Index k)
{
    MatrixXd X(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            X(i, j) = rng.normal();
        }
    }
    return X;
}

VectorXd random_vector(Rng& rng, Eigen::Index n)
{
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = rng.normal();
    }
    return v;
}

// ---------------------------------------------------------------- 1

void ols_oracle()
{
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        const auto k = static_cast<Eigen::Index>(1 + rng.below(20));
        const auto n = static_cast<Eigen::Index>(k + 2 + rng.below(static_cast<std::uint64_t>(60 - k - 1)));
        const MatrixXd X = random_matrix(rng, n, k);
        const VectorXd y = X * random_vector(rng, k) + 0.5 * random_vector(rng, n) + VectorXd::Constant(n, 1.5);
        const auto m = fit_ols(X, y);
        oracle::Matrix rows(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(k)));
        std::vector<double> yy(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) {
                rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = X(i, j);
            }
            yy[static_cast<std::size_t>(i)] = y(i);
        }
        const auto ref = oracle::normal_equations(rows, yy);
        worst = std::max(worst, std::abs(m.intercept - ref[0]));
        for (Eigen::Index j = 0; j < k; ++j) {
            worst = std::max(worst, std::abs(m.coefficients(j) - ref[static_cast<std::size_t>(j) + 1]));
        }
    }
    const double secs = seconds_since(t0);
    report(1, worst <= 1e-10 && secs < 10.0, "OLS oracle equivalence",
           "max coefficient error " + fmt(worst) + " over 100 designs, " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- 2

void lars_correctness()
{
    double worst_angle = 0.0;
    double worst_end = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng rng(1000 + seed);
        const auto n = static_cast<Eigen::Index>(25 + rng.below(40));
        const auto k = static_cast<Eigen::Index>(1 + rng.below(15));
        const MatrixXd X = random_matrix(rng, n, k) * 2.0 + MatrixXd::Constant(n, k, 1.0);
        const VectorXd y = X * random_vector(rng, k) + random_vector(rng, n);
        const auto path = lars_path(X, y);
        MatrixXd Xs = X;
        Xs.rowwise() -= path.column_mean.transpose();
        for (Eigen::Index j = 0; j < k; ++j) {
            Xs.col(j) /= path.column_norm(j);
        }
        const VectorXd yc = y.array() - path.y_mean;
        for (std::size_t s = 1; s < path.steps.size(); ++s) {
            const auto& step = path.steps[s];
            const VectorXd corr = Xs.transpose() * (yc - Xs * step.beta_standardized);
            const double c0 = std::abs(corr(step.active.front()));
            for (int j : step.active) {
                worst_angle = std::max(worst_angle, std::abs(std::abs(corr(j)) - c0));
            }
        }
        const auto ols = fit_ols(X, y);
        worst_end = std::max(worst_end, (path.steps.back().coefficients - ols.coefficients).cwiseAbs().maxCoeff());
        worst_end = std::max(worst_end, std::abs(path.steps.back().intercept - ols.intercept));
    }
    int recovered = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng rng(5000 + seed);
        const MatrixXd X = random_matrix(rng, 200, 20);
        const VectorXd y = 2.0 * X.col(3) - 1.5 * X.col(11) + random_vector(rng, 200);
        const auto m = fit_lars_cv(X, y);
        recovered += (m.coefficients(3) != 0.0 && m.coefficients(11) != 0.0) ? 1 : 0;
    }
    report(2, worst_angle <= 1e-8 && worst_end <= 1e-8 && recovered >= 45, "LARS correctness",
           "equiangularity " + fmt(worst_angle) + ", endpoint vs OLS " + fmt(worst_end) + ", planted recovery " +
               std::to_string(recovered) + "/50");
}

// ---------------------------------------------------------------- 3, 4

SeriesFrame random_levels(std::uint64_t seed, std::size_t T)
{
    Rng rng(seed);
    std::vector<Column> cols{{"a", {}}, {"b", {}}, {"c", {}}};
    double a = 100, b = 50, c = 20;
    for (std::size_t t = 0; t < T; ++t) {
        const double common = rng.normal();
        a *= 1.0 + 0.01 * (0.5 * common + rng.normal());
        b *= 1.0 + 0.01 * (0.7 * common + rng.normal());
        c *= 1.0 + 0.01 * rng.normal();
        cols[0].values.push_back(a);
        cols[1].values.push_back(b);
        cols[2].values.push_back(c);
    }
    return SeriesFrame(cols);
}

bool same_row(const LedgerRow& x, const LedgerRow& y)
{
    return x.step == y.step && x.date == y.date && x.prediction == y.prediction && x.position == y.position &&
           x.index_return == y.index_return && x.strategy_return == y.strategy_return && x.trade == y.trade &&
           x.capital == y.capital;
}

void no_leakage()
{
    const auto levels = random_levels(8, 301);
    BacktestConfig cfg;
    cfg.forecast.target = "a";
    cfg.forecast.max_lag = 5;
    cfg.forecast.k = 3;
    cfg.forecast.partitions = 2;
    cfg.steps_per_year = 20;
    cfg.paths = 2;
    cfg.cost_bp = 3;
    cfg.seed = 17;
    const auto base = run_backtest(levels, cfg);
    const auto& rows = base.path_ledgers[0].rows;
    std::size_t scanned = 0;
    std::size_t violations = 0;
    Rng rng(99);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Step s = rows[i].step;
        std::vector<Column> cols = levels.columns();
        for (auto& c : cols) {
            for (std::size_t t = static_cast<std::size_t>(s); t < c.values.size(); ++t) {
                c.values[t] *= std::exp(rng.normal());
            }
        }
        const auto corrupted = run_backtest(SeriesFrame(cols), cfg);
        for (std::size_t p = 0; p < cfg.paths; ++p) {
            const auto& x = base.path_ledgers[p].rows;
            const auto& y = corrupted.path_ledgers[p].rows;
            for (std::size_t j = 0; j < i; ++j) {
                violations += same_row(x[j], y[j]) ? 0 : 1;
            }
            violations += (x[i].prediction == y[i].prediction && x[i].position == y[i].position) ? 0 : 1;
        }
        ++scanned;
    }
    report(3, violations == 0 && scanned > 0, "no leakage",
           std::to_string(scanned) + " decision times corrupted across " + std::to_string(base.windows.size()) +
               " windows x " + std::to_string(cfg.paths) + " paths, " + std::to_string(violations) +
               " changed decisions or ledger rows");
}

void ledger_identities()
{
    Rng rng(1);
    const std::size_t n = 1000;
    std::vector<Step> steps(n);
    std::vector<double> r(n), up(n, 1.0), p(n);
    for (std::size_t i = 0; i < n; ++i) {
        steps[i] = static_cast<Step>(i);
        r[i] = 0.015 * rng.normal();
        p[i] = rng.normal();
    }
    double index = 1.0;
    for (double x : r) {
        index *= 1.0 + x;
    }
    const auto hold = assemble_ledger(steps, up, r, 0.0, 0.0);
    const double hold_err = std::abs(hold.capital() / index - 1.0);

    const auto costly = assemble_ledger(steps, p, r, 0.0, 3.0);
    double cap = 1.0;
    Position prev = Position::In;
    bool per_transition = true;
    std::size_t transitions = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = costly.rows[i];
        const bool trade = row.position != prev;
        if (trade) {
            cap *= 1.0 - 3e-4;
            ++transitions;
        }
        cap *= 1.0 + (row.position == Position::In ? r[i] : 0.0);
        per_transition = per_transition && row.trade == trade && row.capital == cap;
        prev = row.position;
    }

    const std::vector<Step> s5{0, 1, 2, 3, 4};
    const std::vector<double> r5{0.01, -0.02, 0.03, 0.005, -0.01};
    const std::vector<double> p5{0.4, -0.1, 0.2, 0.3, -0.5};
    const auto hand = assemble_ledger(s5, p5, r5, 0.0, 3.0);
    // IN, OUT (trade), IN (trade), IN, OUT (trade)
    const double expected = (1 + 0.01) * (1 - 0.0003) * (1 + 0.0) * (1 - 0.0003) * (1 + 0.03) * (1 + 0.005) *
                            (1 - 0.0003) * (1 + 0.0);
    const bool exact = hand.capital() == expected;
    report(4, hold_err <= 1e-12 && per_transition && exact, "ledger identities",
           "buy-and-hold relative error " + fmt(hold_err) + ", " + std::to_string(transitions) +
               " transitions each at (1-3e-4): " + (per_transition ? "yes" : "no") + ", hand 5-step " +
               (exact ? "bit-exact" : "mismatch"));
}

// ---------------------------------------------------------------- 5

void sign_and_sharpe()
{
    std::vector<double> s(10, 2.0), b(10, 1.0);
    s[0] = 0.5;
    const double p = sign_test(s, b);
    const std::vector<double> ex{0.1, 0.3};
    const double sh = sharpe_from_excess(ex).value;
    report(5, p == 11.0 / 1024.0 && std::abs(sh - 1.4142) <= 1e-4, "sign test and sharpe",
           "sign_test(9 of 10) = " + fmt(p * 1024.0) + "/1024, sharpe(0.1, 0.3) = " + fmt(sh));
}

// ---------------------------------------------------------------- 6

SkillMatrix from_rows(const std::vector<std::vector<int>>& rows)
{
    SkillMatrix m;
    m.M.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m.M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

void permutation_calibration()
{
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(2024);
    std::vector<double> ps;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::vector<int>> rows(20, std::vector<int>(8));
        for (auto& row : rows) {
            for (auto& x : row) {
                x = rng.bernoulli(0.5) ? 1 : 0;
            }
        }
        ConditionalTestOptions opts;
        opts.n_perm = 1000;
        opts.seed = static_cast<std::uint64_t>(trial) + 1;
        ps.push_back(conditional_test(from_rows(rows), opts).p_value);
    }
    const auto ks = oracle::ks_uniform(ps);

    const auto stat = [](const auto& m) { return oracle::conditional_statistic(m, 4); };
    double worst = 0.0;
    for (const std::vector<std::vector<int>>& m :
         {std::vector<std::vector<int>>{{1, 1}, {0, 0}}, std::vector<std::vector<int>>{{1, 0}, {0, 1}},
          std::vector<std::vector<int>>{{1, 0}, {1, 1}}}) {
        const double exact = oracle::exact_permutation_p(m, stat);
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            ConditionalTestOptions opts;
            opts.n_perm = 1000;
            opts.seed = seed;
            worst = std::max(worst, std::abs(conditional_test(from_rows(m), opts).p_value - exact));
        }
    }
    const double secs = seconds_since(t0);
    const double tol = 3.0 / std::sqrt(1000.0);
    report(6, ks.p > 0.01 && worst <= tol && secs < 120.0, "permutation-test calibration",
           "KS D = " + fmt(ks.d) + ", KS p = " + fmt(ks.p) + " over 200 null matrices, 2x2 max deviation " + fmt(worst) +
               " (tolerance " + fmt(tol) + "), " + fmt(secs) + " s");
}

// ---------------------------------------------------------------- 7

void fdr()
{
    const bool hand = fdr_select(std::vector<double>{0.001, 0.02, 0.04, 0.2}, 0.05) == std::vector<std::size_t>{0, 1};
    Rng rng(12);
    int monotone = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> p(1 + rng.below(40));
        for (auto& x : p) {
            x = rng.bernoulli(0.3) ? 0.01 * rng.uniform() : rng.uniform();
        }
        std::vector<std::size_t> previous;
        bool ok = true;
        for (double q : {0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.2, 0.5, 1.0}) {
            const auto sel = fdr_select(p, q);
            ok = ok && std::includes(sel.begin(), sel.end(), previous.begin(), previous.end());
            previous = sel;
        }
        monotone += ok ? 1 : 0;
    }
    report(7, hand && monotone == 100, "Benjamini-Hochberg",
           std::string("hand case {0.001, 0.02, 0.04, 0.2} at q=0.05 ") + (hand ? "selects the first two" : "mismatch") +
               ", monotone in q on " + std::to_string(monotone) + "/100 cases");
}

// ---------------------------------------------------------------- CLI helpers

const fs::path work = fs::current_path() / "acceptance_work";

int run_cli(const std::string& args, const fs::path& cwd = {})
{
    const std::string cd = cwd.empty() ? "" : "cd \"" + cwd.string() + "\" && ";
    const std::string cmd = cd + "\"" + EMBEDCAST_CLI + "\" " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
}

std::string read_text(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Cells of the row whose first cell is `key` in a CSV file, keyed by header.
std::map<std::string, std::string> csv_row(const fs::path& p, const std::string& key)
{
    const auto lines = csv::read_lines(p.string());
    std::map<std::string, std::string> out;
    if (lines.empty()) {
        return out;
    }
    const auto header = csv::split_line(lines.front());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = csv::split_line(lines[i]);
        if (!cells.empty() && cells[0] == key) {
            for (std::size_t c = 0; c < std::min(cells.size(), header.size()); ++c) {
                out[header[c]] = cells[c];
            }
        }
    }
    return out;
}

double number(const std::map<std::string, std::string>& row, const std::string& col)
{
    const auto it = row.find(col);
    if (it == row.end()) {
        return std::nan("");
    }
    return csv::parse_double(it->second).value_or(std::nan(""));
}

// ---------------------------------------------------------------- 8

void sampling_comparison()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto dir = work / "c8";
    fs::create_directories(dir);
    write_text(dir / "synth.cfg",
               "system = lorenz96\ndimension = 8\nforcing = 8\ndt = 0.05\nn_steps = 5000\nburn_in = 500\n");
    write_text(dir / "compare.cfg",
               "target = x0\nmax_lag = 10\nk = 4\nlead = 5\npartitions = 10\nreplicates = 1\n");
    int wins = 0;
    int rows = 0;
    int failed_runs = 0;
    bool matched = true;
    std::ostringstream paired;
    for (int seed = 1; seed <= 20; ++seed) {
        const auto sdir = dir / ("seed" + std::to_string(seed));
        const std::string s = std::to_string(seed);
        if (run_cli("synth --config \"" + (dir / "synth.cfg").string() + "\" --seed " + s + " --out \"" +
                    (sdir / "data").string() + "\"") != 0 ||
            run_cli("compare-sampling --config \"" + (dir / "compare.cfg").string() + "\" --seed " + s +
                    " --data \"" + (sdir / "data" / "trajectory.csv").string() + "\" --out \"" +
                    (sdir / "compare").string() + "\"") != 0) {
            ++failed_runs;
            continue;
        }
        const auto row = csv_row(sdir / "compare" / "compare.csv", "0");
        const double d = number(row, "corr_disjoint");
        const double r = number(row, "corr_random");
        matched = matched && row.count("maps_disjoint") && row.at("maps_disjoint") == row.at("maps_random");
        wins += d >= r ? 1 : 0;
        ++rows;
        paired << "    seed " << seed << ": disjoint " << fmt(d) << ", random " << fmt(r) << '\n';
    }
    const double secs = seconds_since(t0);
    const double rate = rows > 0 ? static_cast<double>(wins) / rows : 0.0;
    report(8, failed_runs == 0 && rows == 20 && matched && rate >= 0.6 && secs < 300.0,
           "disjoint vs random sampling on Lorenz-96",
           "disjoint wins " + std::to_string(wins) + "/" + std::to_string(rows) + " (win rate " + fmt(rate) +
               "), matched counts " + (matched ? "yes" : "no") + ", " + fmt(secs) + " s");
    std::cout << paired.str();
}

// ---------------------------------------------------------------- 9

void forecasting_skill()
{
    const auto dir = work / "c9";
    fs::create_directories(dir);
    write_text(dir / "clean.cfg", "system = lorenz63\ndt = 0.01\nn_steps = 5000\nburn_in = 500\n");
    write_text(dir / "noisy.cfg", "system = lorenz63\ndt = 0.01\nn_steps = 5000\nburn_in = 500\n"
                                  "impulse_rate = 0.01\nimpulse_magnitude = 1\nimpulse_magnitude_in_sd = true\n"
                                  "impulse_decay = 0.9\n");
    write_text(dir / "forecast.cfg", "target = x\nmax_lag = 10\nk = 4\nlead = 1\npartitions = 10\n"
                                     "combiner = trimmed_mean\nskill_matrix = false\n");
    const std::string fc = "\"" + (dir / "forecast.cfg").string() + "\"";
    int rc = 0;
    rc |= run_cli("synth --config \"" + (dir / "clean.cfg").string() + "\" --seed 5 --out \"" + (dir / "clean").string() + "\"");
    rc |= run_cli("synth --config \"" + (dir / "noisy.cfg").string() + "\" --seed 5 --out \"" + (dir / "noisy").string() + "\"");
    rc |= run_cli("forecast --config " + fc + " --seed 5 --data \"" + (dir / "clean" / "trajectory.csv").string() +
                  "\" --out \"" + (dir / "fclean").string() + "\"");
    rc |= run_cli("forecast --config " + fc + " --seed 5 --data \"" + (dir / "noisy" / "trajectory.csv").string() +
                  "\" --out \"" + (dir / "fnoisy").string() + "\"");
    const auto clean = csv_row(dir / "fclean" / "metrics.csv", "all");
    const auto noisy = csv_row(dir / "fnoisy" / "metrics.csv", "all");
    const double c_corr = number(clean, "correlation");
    const double n_corr = number(noisy, "correlation");
    const double n_sign = number(noisy, "sign_accuracy");
    report(9, rc == 0 && c_corr >= 0.9 && n_sign > 0.55, "Lorenz-63 forecasting skill",
           "clean correlation " + fmt(c_corr) + ", impulse-noise correlation " + fmt(n_corr) +
               ", impulse-noise sign accuracy on changes " + fmt(n_sign));
}

// ---------------------------------------------------------------- 10

std::string strip_timing(const std::string& text)
{
    std::istringstream in(text);
    std::string out;
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("time ", 0) != 0) {
            out += line + '\n';
        }
    }
    return out;
}

/// Relative path -> content, with timing lines removed from run logs.
std::map<std::string, std::string> snapshot(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            const auto rel = fs::relative(e.path(), root).string();
            const auto text = read_text(e.path());
            out[rel] = e.path().filename() == "run.log" ? strip_timing(text) : text;
        }
    }
    return out;
}

void determinism()
{
    const auto dir = work / "c10";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_text(dir / "synth.cfg", "system = lorenz63\nn_steps = 1500\nburn_in = 100\nimpulse_rate = 0.01\n");
    write_text(dir / "forecast.cfg", "target = x\nmax_lag = 6\nk = 3\npartitions = 3\nfit_len = 600\n"
                                     "select_len = 300\ntest_len = 200\nfit_method = lars\nfolds = 5\nthreads = 2\n");
    write_text(dir / "compare.cfg", "target = x\nmax_lag = 6\nk = 3\npartitions = 3\nreplicates = 3\nthreads = 2\n");
    write_text(dir / "skill.cfg", "n_perm = 200\nthreads = 2\n");
    write_text(dir / "backtest.cfg", "target = a\nmax_lag = 5\nk = 3\npartitions = 2\nsteps_per_year = 20\n"
                                     "paths = 2\ncost_bp = 3\ngrid_cost_bp = 0,3\nthreads = 2\n");
    {
        const auto levels = random_levels(3, 400);
        std::ofstream out(dir / "levels.csv");
        write_csv(levels, out);
    }
    bool all_ok = true;
    std::string detail;
    // Both runs use identical relative command lines from their own directory.
    for (int rep = 0; rep < 2; ++rep) {
        const auto out = dir / ("run" + std::to_string(rep));
        fs::create_directories(out);
        int rc = 0;
        rc |= run_cli("synth --config ../synth.cfg --seed 9 --out synth", out);
        rc |= run_cli("forecast --config ../forecast.cfg --seed 9 --data synth/trajectory.csv --out forecast", out);
        rc |= run_cli("skilltest --config ../skill.cfg --seed 9 --data forecast --out skilltest", out);
        rc |= run_cli("compare-sampling --config ../compare.cfg --seed 9 --data synth/trajectory.csv --out compare", out);
        rc |= run_cli("backtest --config ../backtest.cfg --seed 9 --data ../levels.csv --out backtest", out);
        all_ok = all_ok && rc == 0;
    }
    const auto a = snapshot(dir / "run0");
    const auto b = snapshot(dir / "run1");
    std::size_t differing = 0;
    for (const auto& [name, text] : a) {
        const auto it = b.find(name);
        if (it == b.end() || it->second != text) {
            ++differing;
            detail += " " + name;
        }
    }
    differing += b.size() > a.size() ? b.size() - a.size() : 0;
    report(10, all_ok && differing == 0 && a.size() > 10, "CLI determinism",
           std::to_string(a.size()) + " files across 5 commands, " + std::to_string(differing) + " differ" + detail +
               (all_ok ? "" : " (a command failed)"));
}

} // namespace

int main()
{
    fs::create_directories(work);
    const std::vector<std::pair<int, void (*)()>> criteria{
        {1, ols_oracle},       {2, lars_correctness},   {3, no_leakage},         {4, ledger_identities},
        {5, sign_and_sharpe},  {6, permutation_calibration}, {7, fdr},          {8, sampling_comparison},
        {9, forecasting_skill}, {10, determinism},
    };
    for (const auto& [id, run] : criteria) {
        try {
            run();
        } catch (const std::exception& e) {
            report(id, false, "criterion raised", e.what());
        }
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
