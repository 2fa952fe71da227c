// embedcast command-line tool: synth, forecast, backtest, skilltest, compare-sampling.

#include "config.hpp"

#include "embedcast/backtest.hpp"
#include "embedcast/csv.hpp"
#include "embedcast/error.hpp"
#include "embedcast/forecast.hpp"
#include "embedcast/parallel.hpp"
#include "embedcast/random.hpp"
#include "embedcast/skill.hpp"
#include "embedcast/stats.hpp"
#include "embedcast/synth.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace embedcast;
using cli::KeySpec;
using cli::RunConfig;

namespace {

struct Invocation {
    std::string config_path;
    std::string data_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

// ---------------------------------------------------------------- schemas

std::vector<KeySpec> common_keys()
{
    return {
        {"seed", "1", "master random seed"},
        {"threads", "1", "worker threads (0 = all cores)"},
    };
}

std::vector<KeySpec> data_keys()
{
    return {
        {"date_column", "", "name of the date column (empty = auto-detect a leading 'date')"},
    };
}

std::vector<KeySpec> model_keys()
{
    return {
        {"target", "", "column to predict"},
        {"variables", "", "comma-separated coordinate variables (empty = every column)"},
        {"max_lag", "40", "largest lag in the coordinate universe"},
        {"k", "20", "coordinates per delay map"},
        {"sampler", "disjoint", "disjoint | random"},
        {"partitions", "10", "disjoint partitionings per window"},
        {"random_maps", "0", "random maps per window (0 = match the disjoint count)"},
        {"fit_method", "ols", "ols | lars"},
        {"folds", "10", "cross-validation folds for lars"},
        {"selection", "top_fraction", "top_fraction | min_corr"},
        {"q", "0.4", "fraction kept under top_fraction"},
        {"r_t", "-1", "minimum selection correlation under min_corr"},
        {"combiner", "trimmed_mean", "trimmed_mean | sqrt_n_best"},
        {"trim", "0.2", "fraction trimmed from each tail"},
    };
}

std::vector<KeySpec> step_window_keys()
{
    return {
        {"lead", "1", "steps from the newest coordinate to the target"},
        {"differencing", "none", "none | raw | log (applied to every column before fitting)"},
        {"fit_len", "0", "fit steps per window (all three lengths 0 = one 50/25/25 window)"},
        {"select_len", "0", "selection steps per window"},
        {"test_len", "0", "test steps per window"},
        {"stride", "0", "steps between windows (0 = test_len)"},
    };
}

template <typename... Parts>
std::vector<KeySpec> concat(Parts... parts)
{
    std::vector<KeySpec> out;
    (out.insert(out.end(), parts.begin(), parts.end()), ...);
    return out;
}

std::vector<KeySpec> synth_schema()
{
    return concat(common_keys(),
                  std::vector<KeySpec>{
                      {"system", "lorenz63", "lorenz63 | lorenz96"},
                      {"dimension", "40", "lorenz96 dimension"},
                      {"sigma", "10", "lorenz63 sigma"},
                      {"rho", "28", "lorenz63 rho"},
                      {"beta", csv::format_double(8.0 / 3.0), "lorenz63 beta"},
                      {"forcing", "8", "lorenz96 forcing F"},
                      {"dt", "0.01", "integration step"},
                      {"n_steps", "5000", "rows emitted after burn-in"},
                      {"burn_in", "0", "steps discarded before output"},
                      {"initial", "", "comma-separated initial state (empty = seeded default)"},
                      {"impulse_rate", "0", "per-step, per-column impulse probability"},
                      {"impulse_magnitude", "1", "impulse scale"},
                      {"impulse_magnitude_in_sd", "false", "scale impulses by each column's standard deviation"},
                      {"impulse_decay", "0.9", "per-step impulse decay factor"},
                      {"impulse_columns", "", "columns receiving impulses (empty = all)"},
                  });
}

std::vector<KeySpec> forecast_schema()
{
    return concat(common_keys(), data_keys(), model_keys(), step_window_keys(),
                  std::vector<KeySpec>{{"skill_matrix", "true", "emit per-window binary skill matrices"}});
}

std::vector<KeySpec> backtest_schema()
{
    return concat(common_keys(), data_keys(), model_keys(),
                  std::vector<KeySpec>{
                      {"differencing", "raw", "raw | log"},
                      {"fit_years", "3", "years used to fit"},
                      {"select_years", "5", "years used to down-select (fit + select = 8)"},
                      {"test_years", "2", "years traded per window"},
                      {"steps_per_year", "250", "steps in one year"},
                      {"paths", "5", "trading paths averaged"},
                      {"cost_bp", "0", "cost per position change in basis points"},
                      {"threshold", "0", "predicted change below which the position is OUT"},
                      {"grid_targets", "", "grid: comma-separated index columns"},
                      {"grid_fit_select", "", "grid: fit:select year pairs, e.g. 3:5,6:2"},
                      {"grid_q", "", "grid: kept fractions"},
                      {"grid_fit_method", "", "grid: ols,lars"},
                      {"grid_cost_bp", "", "grid: costs in basis points"},
                  });
}

std::vector<KeySpec> skilltest_schema()
{
    return concat(common_keys(), std::vector<KeySpec>{
                                     {"top_k", "4", "largest Z entries combined"},
                                     {"n_perm", "1000", "column permutations"},
                                     {"base", "outer", "outer | conditional"},
                                     {"combine", "sum", "sum | mean"},
                                     {"fdr_q", "0.05", "false discovery rate level"},
                                 });
}

std::vector<KeySpec> compare_schema()
{
    return concat(common_keys(), data_keys(), model_keys(), step_window_keys(),
                  std::vector<KeySpec>{{"replicates", "20", "seeded replicates"}});
}

// ---------------------------------------------------------------- helpers

std::string choice(const RunConfig& cfg, const std::string& key, std::initializer_list<const char*> allowed)
{
    const auto v = cfg.text(key);
    for (const char* a : allowed) {
        if (v == a) {
            return v;
        }
    }
    std::string msg = "config key '" + key + "': '" + v + "' is not one of";
    for (const char* a : allowed) {
        msg += std::string(" ") + a;
    }
    throw ConfigError(msg);
}

RunConfig load_config(std::vector<KeySpec> schema, const Invocation& inv)
{
    std::vector<std::string> lines;
    if (!inv.config_path.empty()) {
        if (!fs::exists(inv.config_path)) {
            throw ConfigError("config file not found: " + inv.config_path);
        }
        lines = csv::read_lines(inv.config_path);
    }
    RunConfig cfg(std::move(schema), lines, inv.config_path.empty() ? "<defaults>" : inv.config_path);
    if (inv.seed) {
        cfg.set("seed", std::to_string(*inv.seed));
    }
    if (inv.threads) {
        cfg.set("threads", std::to_string(*inv.threads));
    }
    cfg.count("threads");
    cfg.seed("seed");
    return cfg;
}

class Output {
public:
    explicit Output(const std::string& dir) : dir_(dir)
    {
        if (dir.empty()) {
            throw ConfigError("--out is required");
        }
        fs::create_directories(dir_);
    }

    fs::path path(const std::string& name) const { return dir_ / name; }

    void write(const std::string& name, const std::string& content) const
    {
        const auto p = path(name);
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + p.string());
        }
        out << content;
    }

private:
    fs::path dir_;
};

/// Run log: fixed facts plus "time ..." lines, the only nondeterministic content.
class RunLog {
public:
    void fact(const std::string& key, const std::string& value) { text_ += key + " = " + value + '\n'; }

    template <typename F>
    auto timed(const std::string& stage, F&& f)
    {
        const auto start = std::chrono::steady_clock::now();
        auto finish = [&] {
            const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            std::ostringstream line;
            line.setf(std::ios::fixed);
            line.precision(1);
            line << "time " << stage << " " << ms << " ms\n";
            text_ += line.str();
        };
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            finish();
        } else {
            auto r = f();
            finish();
            return r;
        }
    }

    const std::string& text() const { return text_; }

private:
    std::string text_;
};

std::string na_or(const std::optional<double>& v)
{
    return v ? csv::format_double(*v) : "NA";
}

SeriesFrame load_data(const RunConfig& cfg, const Invocation& inv)
{
    if (inv.data_path.empty()) {
        throw ConfigError("--data is required for this command");
    }
    const auto date_col = cfg.text("date_column");
    return load_csv(inv.data_path, date_col.empty() ? std::nullopt : std::optional<std::string>(date_col));
}

ForecastSpec model_spec(const RunConfig& cfg)
{
    ForecastSpec spec;
    spec.target = cfg.text("target");
    if (spec.target.empty()) {
        throw ConfigError("config key 'target' must name the column to predict");
    }
    spec.variables = cfg.list("variables");
    spec.max_lag = static_cast<int>(cfg.integer("max_lag"));
    spec.k = cfg.count("k");
    spec.sampler = choice(cfg, "sampler", {"disjoint", "random"}) == "disjoint" ? Sampler::Disjoint : Sampler::Random;
    spec.partitions = cfg.count("partitions");
    spec.random_maps = cfg.count("random_maps");
    spec.fit_method = choice(cfg, "fit_method", {"ols", "lars"}) == "ols" ? FitMethod::Ols : FitMethod::LarsCv;
    spec.folds = static_cast<int>(cfg.integer("folds"));
    if (choice(cfg, "selection", {"top_fraction", "min_corr"}) == "top_fraction") {
        const double q = cfg.real("q");
        if (!(q > 0.0 && q <= 1.0)) {
            throw ConfigError("config key 'q' must lie in (0, 1]");
        }
        spec.selection = SelectionRule::top_fraction(q);
    } else {
        const double r = cfg.real("r_t");
        if (!(r >= -1.0 && r <= 1.0)) {
            throw ConfigError("config key 'r_t' must lie in [-1, 1]");
        }
        spec.selection = SelectionRule::min_corr(r);
    }
    spec.combiner = choice(cfg, "combiner", {"trimmed_mean", "sqrt_n_best"}) == "trimmed_mean" ? Combiner::TrimmedMean
                                                                                                   : Combiner::SqrtNBest;
    spec.trim = cfg.real("trim");
    spec.threads = static_cast<unsigned>(cfg.count("threads"));
    if (cfg.has("lead")) {
        spec.lead = static_cast<int>(cfg.integer("lead"));
    }
    spec.validate();
    return spec;
}

/// Apply the configured differencing and build the walk-forward windows.
std::pair<SeriesFrame, std::vector<Window>> prepare_frame(const RunConfig& cfg, const SeriesFrame& raw)
{
    const auto mode = choice(cfg, "differencing", {"none", "raw", "log"});
    SeriesFrame frame = mode == "none" ? raw : first_difference_all(raw, mode == "log" ? Differencing::Log : Differencing::Raw);
    const std::size_t T = frame.length();
    WindowPlan plan{cfg.count("fit_len"), cfg.count("select_len"), cfg.count("test_len"), cfg.count("stride")};
    if (plan.fit_len == 0 && plan.select_len == 0 && plan.test_len == 0) {
        plan.fit_len = T / 2;
        plan.select_len = T / 4;
        plan.test_len = T - plan.fit_len - plan.select_len;
    }
    if (plan.stride == 0) {
        plan.stride = plan.test_len;
    }
    auto windows = walk_forward_windows(T, plan);
    return {std::move(frame), std::move(windows)};
}

/// Prefix every line of a CSV text with a column; the header gets `name`.
std::string with_leading_column(const std::string& csv_text, const std::string& name, const std::string& value,
                                bool keep_header)
{
    std::istringstream in(csv_text);
    std::string out;
    bool first = true;
    for (std::string line; std::getline(in, line);) {
        if (first) {
            first = false;
            if (keep_header) {
                out += name + ',' + line + '\n';
            }
            continue;
        }
        out += value + ',' + line + '\n';
    }
    return out;
}

std::string step_label(const SeriesFrame& frame, Step step)
{
    if (frame.dates()) {
        return (*frame.dates())[frame.row_of(step)];
    }
    return std::to_string(step);
}

// ---------------------------------------------------------------- synth

int cmd_synth(const Invocation& inv)
{
    const auto cfg = load_config(synth_schema(), inv);
    const Output out(inv.out_dir);
    RunLog log;
    log.fact("command", "synth");
    log.fact("seed", cfg.text("seed"));

    SystemSpec spec;
    spec.kind = choice(cfg, "system", {"lorenz63", "lorenz96"}) == "lorenz63" ? SystemKind::Lorenz63 : SystemKind::Lorenz96;
    spec.dimension = cfg.count("dimension");
    spec.sigma = cfg.real("sigma");
    spec.rho = cfg.real("rho");
    spec.beta = cfg.real("beta");
    spec.forcing = cfg.real("forcing");
    spec.dt = cfg.real("dt");
    spec.n_steps = cfg.count("n_steps");
    spec.burn_in = cfg.count("burn_in");
    spec.seed = cfg.seed("seed");
    spec.initial = cfg.reals("initial");

    ImpulseOptions imp;
    imp.rate = cfg.real("impulse_rate");
    imp.magnitude = cfg.real("impulse_magnitude");
    imp.magnitude_in_sd = cfg.flag("impulse_magnitude_in_sd");
    imp.decay = cfg.real("impulse_decay");
    imp.columns = cfg.list("impulse_columns");
    imp.seed = mix_seed(spec.seed, 1);
    spec.validate();
    imp.validate();

    out.write("config.txt", cfg.echo());
    const auto clean = log.timed("integrate", [&] { return integrate(spec); });
    std::string meta = spec.describe();
    if (imp.rate > 0.0) {
        const auto noisy = log.timed("impulses", [&] { return add_impulses(clean, imp); });
        std::ostringstream traj, cl, track, list;
        write_csv(noisy.frame, traj);
        write_csv(clean, cl);
        write_csv(noisy.track, track);
        list << "start,column,g\n";
        for (const auto& i : noisy.impulses) {
            list << i.start << ',' << noisy.frame.names()[i.column] << ',' << csv::format_double(i.g) << '\n';
        }
        out.write("trajectory.csv", traj.str());
        out.write("clean.csv", cl.str());
        out.write("impulse_track.csv", track.str());
        out.write("impulses.csv", list.str());
        meta += "impulse_rate = " + csv::format_double(imp.rate) + '\n' +
                "impulse_magnitude = " + csv::format_double(imp.magnitude) + '\n' +
                "impulse_magnitude_in_sd = " + (imp.magnitude_in_sd ? "true" : "false") + '\n' +
                "impulse_decay = " + csv::format_double(imp.decay) + '\n' +
                "impulse_seed = " + std::to_string(imp.seed) + '\n' +
                "impulse_count = " + std::to_string(noisy.impulses.size()) + '\n';
        log.fact("impulses", std::to_string(noisy.impulses.size()));
    } else {
        std::ostringstream traj;
        write_csv(clean, traj);
        out.write("trajectory.csv", traj.str());
    }
    meta += "rows = " + std::to_string(clean.length()) + '\n' + "columns = " + csv::join(clean.names()) + '\n';
    out.write("metadata.txt", meta);
    out.write("run.log", log.text());
    return 0;
}

// ---------------------------------------------------------------- forecast

struct SignTally {
    std::size_t hits = 0;
    std::size_t total = 0;
};

int cmd_forecast(const Invocation& inv)
{
    const auto cfg = load_config(forecast_schema(), inv);
    const auto spec = model_spec(cfg);
    const bool differenced = choice(cfg, "differencing", {"none", "raw", "log"}) != "none";
    const Output out(inv.out_dir);
    RunLog log;
    log.fact("command", "forecast");
    log.fact("data", inv.data_path);
    const auto seed = cfg.seed("seed");
    log.fact("seed", std::to_string(seed));

    const auto raw = log.timed("load", [&] { return load_data(cfg, inv); });
    auto [frame, windows] = prepare_frame(cfg, raw);
    log.fact("windows", std::to_string(windows.size()));
    out.write("config.txt", cfg.echo());

    std::ostringstream preds, pool_csv, maps_csv, models_csv, metrics;
    preds << "window,step,date,observed,prediction,predicted_change,observed_change\n";
    metrics << "window,test_start,test_steps,correlation,sign_accuracy\n";
    std::vector<double> all_obs, all_pred;
    SignTally all_sign;
    const auto& target = frame.column(spec.target);

    for (std::size_t w = 0; w < windows.size(); ++w) {
        const std::uint64_t ws = window_seed(seed, w);
        log.fact("window " + std::to_string(w) + " seed", std::to_string(ws));
        const auto wf = log.timed("window " + std::to_string(w), [&] { return forecast_window(frame, windows[w], spec, ws); });
        const std::string wl = std::to_string(w);

        std::vector<double> obs, pred;
        SignTally sign;
        for (std::size_t i = 0; i < wf.test_steps.size(); ++i) {
            const Step s = wf.test_steps[i];
            const double o = wf.observed(static_cast<Eigen::Index>(i));
            const double p = wf.combined(static_cast<Eigen::Index>(i));
            // Changes over the lead: the differenced target already is one.
            const double base = differenced ? 0.0 : target[frame.row_of(s - spec.lead)];
            const double pc = p - base;
            const double oc = o - base;
            const bool predicted_up = threshold_decision(pc) == Position::In;
            sign.hits += predicted_up == (oc >= 0.0) ? 1 : 0;
            ++sign.total;
            obs.push_back(o);
            pred.push_back(p);
            preds << wl << ',' << s << ',' << (frame.dates() ? step_label(frame, s) : "") << ','
                  << csv::format_double(o) << ',' << csv::format_double(p) << ',' << csv::format_double(pc) << ','
                  << csv::format_double(oc) << '\n';
        }
        metrics << wl << ',' << step_label(frame, wf.test_steps.front()) << ',' << obs.size() << ','
                << na_or(pearson(obs, pred)) << ','
                << csv::format_double(static_cast<double>(sign.hits) / static_cast<double>(sign.total)) << '\n';
        all_obs.insert(all_obs.end(), obs.begin(), obs.end());
        all_pred.insert(all_pred.end(), pred.begin(), pred.end());
        all_sign.hits += sign.hits;
        all_sign.total += sign.total;

        std::ostringstream p, m, md;
        write_pool_csv(wf.pool, wf.kept, p);
        write_maps_csv(wf.maps, m);
        std::vector<LinearModel> models;
        for (const auto& e : wf.pool.entries) {
            models.push_back(e.model);
        }
        std::sort(models.begin(), models.end(), [](const auto& a, const auto& b) { return a.map_id < b.map_id; });
        write_models_csv(models, md);
        pool_csv << with_leading_column(p.str(), "window", wl, w == 0);
        maps_csv << with_leading_column(m.str(), "window", wl, w == 0);
        models_csv << with_leading_column(md.str(), "window", wl, w == 0);

        if (cfg.flag("skill_matrix")) {
            // Each kept model's predictive ensemble for a step: its prediction plus its selection residuals.
            std::vector<std::vector<std::vector<double>>> members(wf.kept.size());
            for (std::size_t j = 0; j < wf.kept.size(); ++j) {
                const auto& res = wf.select_residuals[j];
                for (std::size_t i = 0; i < wf.test_steps.size(); ++i) {
                    const double c = wf.member_predictions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                    std::vector<double> ens(static_cast<std::size_t>(res.size()));
                    for (Eigen::Index r = 0; r < res.size(); ++r) {
                        ens[static_cast<std::size_t>(r)] = c + res(r);
                    }
                    members[j].push_back(std::move(ens));
                }
            }
            auto build = log.timed("skill matrix " + wl, [&] {
                return binary_skill_matrix(members, std::span<const double>(wf.observed.data(), wf.observed.size()),
                                           std::span<const double>(wf.fit_targets.data(), wf.fit_targets.size()));
            });
            for (std::size_t j = 0; j < wf.kept.size(); ++j) {
                build.matrix.row_labels[j] = "map" + std::to_string(wf.kept.entries[j].model.map_id);
            }
            for (std::size_t i = 0; i < wf.test_steps.size(); ++i) {
                build.matrix.column_labels[i] = step_label(frame, wf.test_steps[i]);
            }
            std::ostringstream sm;
            write_skill_matrix_csv(build.matrix, sm);
            out.write("skill_matrix_w" + wl + ".csv", sm.str());
            if (build.floored_bandwidths > 0) {
                log.fact("window " + wl + " floored bandwidths", std::to_string(build.floored_bandwidths));
            }
        }
    }
    metrics << "all,," << all_obs.size() << ',' << na_or(pearson(all_obs, all_pred)) << ','
            << csv::format_double(static_cast<double>(all_sign.hits) / static_cast<double>(all_sign.total)) << '\n';

    out.write("predictions.csv", preds.str());
    out.write("pool.csv", pool_csv.str());
    out.write("maps.csv", maps_csv.str());
    out.write("models.csv", models_csv.str());
    out.write("metrics.csv", metrics.str());
    out.write("run.log", log.text());
    std::cout << metrics.str();
    return 0;
}

// ---------------------------------------------------------------- backtest

struct GridPoint {
    std::string target;
    double fit_years;
    double select_years;
    double q;
    FitMethod method;
    double cost_bp;
};

std::string metrics_header()
{
    return "index,fit_years,q,cost_bp,window_start,strategy_multiple,index_multiple,gain,sharpe_decadal,sign_p\n";
}

std::string metric_rows(const BacktestResult& r, const SeriesFrame& levels, const GridPoint& g, bool top_fraction)
{
    const std::string q = top_fraction ? csv::format_double(g.q) : "NA";
    const std::string prefix =
        g.target + ',' + csv::format_double(g.fit_years) + ',' + q + ',' + csv::format_double(g.cost_bp) + ',';
    std::string out;
    auto label = [&](Step s) {
        // Ledger steps index the differenced frame, whose dates are the later level dates.
        if (levels.dates()) {
            return (*levels.dates())[levels.row_of(s)];
        }
        return std::to_string(s);
    };
    for (const auto& m : r.window_metrics) {
        out += prefix + label(m.window_start) + ',' + csv::format_double(m.strategy_multiple) + ',' +
               csv::format_double(m.index_multiple) + ',' + csv::format_double(m.gain) + ",NA,NA\n";
    }
    std::string sharpe = "NA";
    if (r.sharpe) {
        sharpe = csv::format_double(r.sharpe->value);
    }
    out += prefix + "all," + csv::format_double(r.overall.strategy_multiple) + ',' +
           csv::format_double(r.overall.index_multiple) + ',' + csv::format_double(r.overall.gain) + ',' + sharpe +
           ',' + na_or(r.sign_p) + '\n';
    return out;
}

int cmd_backtest(const Invocation& inv)
{
    const auto cfg = load_config(backtest_schema(), inv);
    const Output out(inv.out_dir);
    RunLog log;
    log.fact("command", "backtest");
    log.fact("data", inv.data_path);
    log.fact("seed", cfg.text("seed"));

    BacktestConfig base;
    base.forecast = model_spec(cfg);
    base.fit_years = cfg.real("fit_years");
    base.select_years = cfg.real("select_years");
    base.test_years = cfg.real("test_years");
    base.steps_per_year = cfg.count("steps_per_year");
    base.paths = cfg.count("paths");
    base.cost_bp = cfg.real("cost_bp");
    base.threshold = cfg.real("threshold");
    base.differencing = choice(cfg, "differencing", {"raw", "log"}) == "raw" ? Differencing::Raw : Differencing::Log;
    base.seed = cfg.seed("seed");
    const bool top_fraction = base.forecast.selection.mode == SelectionRule::Mode::TopFraction;

    // Grid axes default to the single configured value.
    std::vector<std::string> targets = cfg.list("grid_targets");
    if (targets.empty()) {
        targets = {base.forecast.target};
    }
    std::vector<std::pair<double, double>> fit_select;
    for (const auto& pair : cfg.list("grid_fit_select")) {
        const auto colon = pair.find(':');
        const auto f = csv::parse_double(pair.substr(0, colon));
        const auto s = colon == std::string::npos ? std::nullopt : csv::parse_double(pair.substr(colon + 1));
        if (!f || !s) {
            throw ConfigError("config key 'grid_fit_select': '" + pair + "' is not fit:select");
        }
        fit_select.emplace_back(*f, *s);
    }
    if (fit_select.empty()) {
        fit_select = {{base.fit_years, base.select_years}};
    }
    std::vector<double> qs = cfg.reals("grid_q");
    if (qs.empty()) {
        qs = {top_fraction ? base.forecast.selection.value : 0.0};
    }
    std::vector<FitMethod> methods;
    for (const auto& m : cfg.list("grid_fit_method")) {
        if (m != "ols" && m != "lars") {
            throw ConfigError("config key 'grid_fit_method': '" + m + "' is not ols or lars");
        }
        methods.push_back(m == "ols" ? FitMethod::Ols : FitMethod::LarsCv);
    }
    if (methods.empty()) {
        methods = {base.forecast.fit_method};
    }
    std::vector<double> costs = cfg.reals("grid_cost_bp");
    if (costs.empty()) {
        costs = {base.cost_bp};
    }
    std::vector<GridPoint> grid;
    for (const auto& t : targets) {
        for (const auto& [f, s] : fit_select) {
            for (double q : qs) {
                for (auto m : methods) {
                    for (double c : costs) {
                        grid.push_back({t, f, s, q, m, c});
                    }
                }
            }
        }
    }
    const bool is_grid = grid.size() > 1;

    const auto levels = log.timed("load", [&] { return load_data(cfg, inv); });
    out.write("config.txt", cfg.echo());
    std::string grid_metrics = "method," + metrics_header();

    for (const auto& g : grid) {
        BacktestConfig bc = base;
        bc.forecast.target = g.target;
        bc.fit_years = g.fit_years;
        bc.select_years = g.select_years;
        if (top_fraction) {
            bc.forecast.selection = SelectionRule::top_fraction(g.q);
        }
        bc.forecast.fit_method = g.method;
        bc.cost_bp = g.cost_bp;
        bc.validate();
        const std::string method = g.method == FitMethod::Ols ? "ols" : "lars";
        std::string sub;
        if (is_grid) {
            sub = g.target + "_fit" + csv::format_double(g.fit_years) + "_q" + csv::format_double(g.q) + '_' + method +
                  "_cost" + csv::format_double(g.cost_bp) + '/';
        }
        const auto result = log.timed("backtest " + (is_grid ? sub : std::string("run")), [&] {
            return run_backtest(levels, bc);
        });
        for (std::size_t p = 0; p < result.path_ledgers.size(); ++p) {
            std::ostringstream l;
            write_ledger_csv(result.path_ledgers[p], l);
            out.write(sub + "ledger_path" + std::to_string(p) + ".csv", l.str());
            log.fact(sub + "path " + std::to_string(p) + " seed", std::to_string(bc.seed + p));
        }
        std::ostringstream avg;
        write_averaged_csv(result.averaged, avg);
        out.write(sub + "averaged.csv", avg.str());
        const auto rows = metric_rows(result, levels, g, top_fraction);
        out.write(sub + "metrics.csv", metrics_header() + rows);
        std::istringstream in(rows);
        for (std::string line; std::getline(in, line);) {
            grid_metrics += method + ',' + line + '\n';
        }
        std::ostringstream win;
        win << "window,fit_begin,select_begin,test_begin,test_end\n";
        for (std::size_t w = 0; w < result.windows.size(); ++w) {
            const auto& x = result.windows[w];
            win << w << ',' << x.fit.begin << ',' << x.select.begin << ',' << x.test.begin << ',' << x.test.end << '\n';
        }
        out.write(sub + "windows.csv", win.str());
        if (!is_grid) {
            std::cout << metrics_header() << rows;
        }
    }
    if (is_grid) {
        out.write("grid_metrics.csv", grid_metrics);
        std::cout << grid_metrics;
    }
    out.write("run.log", log.text());
    return 0;
}

// ---------------------------------------------------------------- skilltest

std::string file_stem(const fs::path& p)
{
    return p.stem().string();
}

int cmd_skilltest(const Invocation& inv)
{
    const auto cfg = load_config(skilltest_schema(), inv);
    if (inv.data_path.empty()) {
        throw ConfigError("--data is required: a skill-matrix CSV, a forecast output directory or a label,p_value CSV");
    }
    const Output out(inv.out_dir);
    RunLog log;
    log.fact("command", "skilltest");
    log.fact("data", inv.data_path);
    log.fact("seed", cfg.text("seed"));

    ConditionalTestOptions opts;
    opts.top_k = cfg.count("top_k");
    opts.n_perm = cfg.count("n_perm");
    opts.seed = cfg.seed("seed");
    opts.base = choice(cfg, "base", {"outer", "conditional"}) == "outer" ? BaseProbability::Outer : BaseProbability::Conditional;
    opts.combine = choice(cfg, "combine", {"sum", "mean"}) == "sum" ? TopCombine::Sum : TopCombine::Mean;
    opts.threads = static_cast<unsigned>(cfg.count("threads"));
    const double q = cfg.real("fdr_q");
    if (!(q > 0.0 && q <= 1.0)) {
        throw ConfigError("config key 'fdr_q' must lie in (0, 1]");
    }
    out.write("config.txt", cfg.echo());

    std::vector<std::pair<std::string, SkillMatrix>> matrices;
    std::vector<std::string> labels;
    std::vector<double> p_values;
    const fs::path input(inv.data_path);
    if (fs::is_directory(input)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(input)) {
            const auto name = e.path().filename().string();
            if (name.rfind("skill_matrix", 0) == 0 && e.path().extension() == ".csv") {
                files.push_back(e.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            throw DataError("no skill_matrix*.csv files in " + input.string());
        }
        for (const auto& f : files) {
            matrices.emplace_back(file_stem(f), read_skill_matrix_csv(csv::read_lines(f.string())));
        }
    } else {
        const auto lines = csv::read_lines(input.string());
        if (lines.empty()) {
            throw DataError("empty input: " + input.string());
        }
        const auto header = csv::split_line(lines.front());
        if (header.size() == 2 && header[0] == "label" && header[1] == "p_value") {
            for (std::size_t i = 1; i < lines.size(); ++i) {
                const auto cells = csv::split_line(lines[i]);
                const auto p = cells.size() == 2 ? csv::parse_double(cells[1]) : std::nullopt;
                if (!p) {
                    throw DataError("p-value CSV: bad row " + std::to_string(i + 1));
                }
                labels.push_back(cells[0]);
                p_values.push_back(*p);
            }
        } else {
            matrices.emplace_back(file_stem(input), read_skill_matrix_csv(lines));
        }
    }

    if (!matrices.empty()) {
        std::ostringstream report, z;
        report << "label,statistic,p_value,top_k,n_perm,seed,entries_used\n";
        z << "label,i,j,CP,P,Z\n";
        for (const auto& [label, m] : matrices) {
            const auto r = log.timed("test " + label, [&] { return conditional_test(m, opts); });
            report << label << ',' << csv::format_double(r.statistic) << ',' << csv::format_double(r.p_value) << ','
                   << r.top_k << ',' << r.n_perm << ',' << r.seed << ',' << r.entries_used << '\n';
            for (Eigen::Index i = 0; i < r.Z.rows(); ++i) {
                for (Eigen::Index j = i + 1; j < r.Z.cols(); ++j) {
                    if (std::isfinite(r.Z(i, j))) {
                        z << label << ',' << m.column_labels[static_cast<std::size_t>(i)] << ','
                          << m.column_labels[static_cast<std::size_t>(j)] << ',' << csv::format_double(r.CP(i, j))
                          << ',' << csv::format_double(r.P(i, j)) << ',' << csv::format_double(r.Z(i, j)) << '\n';
                    }
                }
            }
            labels.push_back(label);
            p_values.push_back(r.p_value);
        }
        out.write("report.csv", report.str());
        out.write("zscores.csv", z.str());
        std::cout << report.str();
    }

    const auto selected = fdr_select(p_values, q);
    std::ostringstream fdr;
    fdr << "label,p_value,q,selected\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool sel = std::binary_search(selected.begin(), selected.end(), i);
        fdr << labels[i] << ',' << csv::format_double(p_values[i]) << ',' << csv::format_double(q) << ','
            << (sel ? 1 : 0) << '\n';
    }
    out.write("fdr.csv", fdr.str());
    log.fact("selected", std::to_string(selected.size()) + " of " + std::to_string(labels.size()));
    out.write("run.log", log.text());
    return 0;
}

// ---------------------------------------------------------------- compare-sampling

int cmd_compare(const Invocation& inv)
{
    const auto cfg = load_config(compare_schema(), inv);
    auto spec = model_spec(cfg);
    const Output out(inv.out_dir);
    RunLog log;
    log.fact("command", "compare-sampling");
    log.fact("data", inv.data_path);
    const auto seed = cfg.seed("seed");
    log.fact("seed", std::to_string(seed));
    const std::size_t replicates = cfg.count("replicates");
    if (replicates < 1) {
        throw ConfigError("config key 'replicates' must be >= 1");
    }

    const auto raw = log.timed("load", [&] { return load_data(cfg, inv); });
    auto [frame, windows] = prepare_frame(cfg, raw);
    out.write("config.txt", cfg.echo());
    const auto variables = spec.variables.empty() ? frame.names() : spec.variables;
    const auto universe = build_universe(variables, spec.max_lag);
    if (spec.k > universe.size()) {
        throw ConfigError("k exceeds the coordinate universe size " + std::to_string(universe.size()));
    }
    const std::size_t matched = spec.partitions * (universe.size() / spec.k);

    ForecastSpec disjoint = spec;
    disjoint.sampler = Sampler::Disjoint;
    disjoint.threads = 1;
    ForecastSpec random = spec;
    random.sampler = Sampler::Random;
    random.random_maps = matched;
    random.threads = 1;

    // Job (replicate, window, sampler) -> window correlation; all independent.
    const std::size_t n_win = windows.size();
    std::vector<double> corr(replicates * n_win * 2, 0.0);
    std::vector<std::size_t> counts(replicates * n_win * 2, 0);
    log.timed("replicates", [&] {
        parallel_for(corr.size(), static_cast<unsigned>(cfg.count("threads")), [&](std::size_t job) {
            const std::size_t rep = job / (2 * n_win);
            const std::size_t w = (job / 2) % n_win;
            const bool is_random = job % 2 == 1;
            const std::uint64_t s = window_seed(mix_seed(seed, rep), w);
            const auto wf = forecast_window(frame, windows[w], is_random ? random : disjoint, s);
            const std::vector<double> o(wf.observed.data(), wf.observed.data() + wf.observed.size());
            const std::vector<double> p(wf.combined.data(), wf.combined.data() + wf.combined.size());
            corr[job] = pearson(o, p).value_or(0.0);
            counts[job] = wf.maps.size();
        });
    });

    std::ostringstream pairs, per_window;
    pairs << "replicate,seed,maps_disjoint,maps_random,corr_disjoint,corr_random,disjoint_wins\n";
    per_window << "replicate,window,corr_disjoint,corr_random\n";
    std::size_t wins = 0;
    double sum_d = 0.0;
    double sum_r = 0.0;
    for (std::size_t rep = 0; rep < replicates; ++rep) {
        double d = 0.0;
        double r = 0.0;
        for (std::size_t w = 0; w < n_win; ++w) {
            const std::size_t job = (rep * n_win + w) * 2;
            if (counts[job] != counts[job + 1]) {
                throw Error("internal: model counts differ between samplers");
            }
            d += corr[job];
            r += corr[job + 1];
            per_window << rep << ',' << w << ',' << csv::format_double(corr[job]) << ','
                       << csv::format_double(corr[job + 1]) << '\n';
        }
        d /= static_cast<double>(n_win);
        r /= static_cast<double>(n_win);
        const bool win = d >= r;
        wins += win ? 1 : 0;
        sum_d += d;
        sum_r += r;
        pairs << rep << ',' << mix_seed(seed, rep) << ',' << counts[rep * n_win * 2] << ','
              << counts[rep * n_win * 2 + 1] << ',' << csv::format_double(d) << ',' << csv::format_double(r) << ','
              << (win ? 1 : 0) << '\n';
    }
    const double rate = static_cast<double>(wins) / static_cast<double>(replicates);
    pairs << "all,NA," << matched << ',' << matched << ',' << csv::format_double(sum_d / static_cast<double>(replicates))
          << ',' << csv::format_double(sum_r / static_cast<double>(replicates)) << ',' << csv::format_double(rate)
          << '\n';
    out.write("compare.csv", pairs.str());
    out.write("compare_windows.csv", per_window.str());
    log.fact("win_rate", csv::format_double(rate));
    out.write("run.log", log.text());
    std::cout << pairs.str();
    return 0;
}

void add_common(CLI::App* sub, Invocation& inv, bool data)
{
    sub->add_option("--config", inv.config_path, "key = value configuration file");
    if (data) {
        sub->add_option("--data", inv.data_path, "input CSV (or directory for skilltest)");
    }
    sub->add_option("--out", inv.out_dir, "output directory")->required();
    sub->add_option("--seed", inv.seed, "override the configured seed");
    sub->add_option("--threads", inv.threads, "worker threads (0 = auto)");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"embedcast: ensemble delay-map forecasting, threshold trading backtests and skill tests"};
    app.require_subcommand(1);
    Invocation inv;
    auto* synth = app.add_subcommand("synth", "integrate a Lorenz system, optionally with impulse noise");
    auto* forecast = app.add_subcommand("forecast", "walk-forward ensemble forecasts of one column");
    auto* backtest = app.add_subcommand("backtest", "multi-path threshold trading backtest");
    auto* skilltest = app.add_subcommand("skilltest", "conditional permutation test and FDR screening");
    auto* compare = app.add_subcommand("compare-sampling", "disjoint versus random delay-map sampling");
    add_common(synth, inv, false);
    add_common(forecast, inv, true);
    add_common(backtest, inv, true);
    add_common(skilltest, inv, true);
    add_common(compare, inv, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) {
            return cmd_synth(inv);
        }
        if (forecast->parsed()) {
            return cmd_forecast(inv);
        }
        if (backtest->parsed()) {
            return cmd_backtest(inv);
        }
        if (skilltest->parsed()) {
            return cmd_skilltest(inv);
        }
        return cmd_compare(inv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
