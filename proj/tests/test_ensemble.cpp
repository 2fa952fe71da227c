#include <doctest.h>

#include "oracles.hpp"

#include "embedcast/ensemble.hpp"
#include "embedcast/error.hpp"
#include "embedcast/random.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using namespace embedcast;
using Eigen::VectorXd;

namespace {

LinearModel model(int id)
{
    LinearModel m;
    m.map_id = id;
    m.coefficients = VectorXd::Zero(1);
    return m;
}

std::vector<double> to_std(const VectorXd& v)
{
    return {v.data(), v.data() + v.size()};
}

ScoredPool pool_with_scores(const std::vector<double>& scores)
{
    ScoredPool pool;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        pool.entries.push_back({model(static_cast<int>(i)), scores[i]});
    }
    std::stable_sort(pool.entries.begin(), pool.entries.end(),
                     [](const auto& a, const auto& b) { return a.select_corr > b.select_corr; });
    return pool;
}

} // namespace

TEST_CASE("scores and ranking")
{
    VectorXd obs(6);
    obs << 1, 2, 3, 4, 5, 6;
    const auto pool = score_models({model(0), model(1), model(2)}, {-obs, obs, VectorXd::Constant(6, 2.0)}, obs);
    REQUIRE(pool.size() == 3);
    CHECK(pool.entries[0].model.map_id == 1);
    CHECK(pool.entries[0].select_corr == doctest::Approx(1.0));
    CHECK(pool.entries[1].model.map_id == 0);
    CHECK(pool.entries[1].select_corr == doctest::Approx(-1.0));
    CHECK(pool.entries[2].select_corr == -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(score_models({model(0)}, {VectorXd::Zero(5)}, obs), DataError);
}

TEST_CASE("three planted correlations")
{
    // Build unit centred o and e with o.e = 0, then p = r o + sqrt(1 - r^2) e has corr r.
    VectorXd o(5), e(5);
    o << -2, -1, 0, 1, 2;
    e << 2, -1, -2, -1, 2;
    o.normalize();
    e.normalize();
    std::vector<VectorXd> preds;
    const std::vector<double> rs{0.1, -0.3, 0.9};
    for (double r : rs) {
        preds.push_back(r * o + std::sqrt(1 - r * r) * e);
    }
    const auto pool = score_models({model(1), model(2), model(0)}, preds, o);
    CHECK(pool.entries[0].model.map_id == 0);
    CHECK(pool.entries[1].model.map_id == 1);
    CHECK(pool.entries[2].model.map_id == 2);
    CHECK(pool.entries[0].select_corr == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(pool.entries[1].select_corr == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(pool.entries[2].select_corr == doctest::Approx(-0.3).epsilon(1e-12));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(oracle::pearson(to_std(preds[i]), to_std(o)) == doctest::Approx(rs[i]).epsilon(1e-12));
    }
}

TEST_CASE("ties break by map id")
{
    VectorXd obs(4);
    obs << 1, 3, 2, 5;
    const auto pool = score_models({model(7), model(3), model(5)}, {obs, obs * 2.0, obs.array() + 1.0}, obs);
    CHECK(pool.entries[0].model.map_id == 3);
    CHECK(pool.entries[1].model.map_id == 5);
    CHECK(pool.entries[2].model.map_id == 7);
}

TEST_CASE("correlation is invariant to positive affine maps")
{
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        VectorXd obs(30), p(30);
        for (int i = 0; i < 30; ++i) {
            obs(i) = rng.normal();
            p(i) = obs(i) + 2.0 * rng.normal();
        }
        const double a = 0.01 + 10 * rng.uniform();
        const double b = 100 * rng.normal();
        const auto pool = score_models({model(0), model(1)}, {p, (a * p.array() + b).matrix()}, obs);
        CHECK(pool.entries[0].select_corr == doctest::Approx(pool.entries[1].select_corr).epsilon(1e-10));
    }
}

TEST_CASE("downselect examples")
{
    const auto ten = pool_with_scores({0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0});
    const auto top = downselect(ten, SelectionRule::top_fraction(0.4));
    REQUIRE(top.size() == 4);
    CHECK(top.entries.back().model.map_id == 3);
    CHECK(downselect(ten, SelectionRule::min_corr(-1.0)).size() == 10);

    const auto three = pool_with_scores({0.5, 0.3, 0.1});
    const auto kept = downselect(three, SelectionRule::min_corr(0.3));
    REQUIRE(kept.size() == 2);
    CHECK(kept.entries[1].select_corr == 0.3);
    CHECK_THROWS_AS(downselect(three, SelectionRule::min_corr(0.6)), DataError);
    CHECK_THROWS(downselect(ScoredPool{}, SelectionRule::top_fraction(0.4)));
    CHECK_THROWS(downselect(three, SelectionRule::top_fraction(0.0)));
    CHECK_THROWS(downselect(three, SelectionRule::top_fraction(1.5)));
}

TEST_CASE("top fraction size is ceil(q n)")
{
    for (std::size_t n = 1; n <= 60; ++n) {
        const auto pool = pool_with_scores(std::vector<double>(n, 0.5));
        for (int qi = 1; qi <= 20; ++qi) {
            const double q = qi / 20.0;
            // ceil(q n) computed in exact integer arithmetic: q = qi/20.
            const std::size_t expected = (static_cast<std::size_t>(qi) * n + 19) / 20;
            REQUIRE(downselect(pool, SelectionRule::top_fraction(q)).size() == expected);
        }
        CHECK(downselect(pool, SelectionRule::top_fraction(0.4)).size() == (2 * n + 4) / 5);
        CHECK(downselect(pool, SelectionRule::top_fraction(0.8)).size() == (4 * n + 4) / 5);
    }
}

TEST_CASE("downselect idempotence")
{
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> scores(1 + rng.below(30));
        for (auto& s : scores) {
            s = 2 * rng.uniform() - 1;
        }
        const auto pool = pool_with_scores(scores);
        for (double r : {-1.0, -0.5, 0.0}) {
            try {
                const auto once = downselect(pool, SelectionRule::min_corr(r));
                const auto twice = downselect(once, SelectionRule::min_corr(r));
                CHECK(once.size() == twice.size());
            } catch (const DataError&) {
            }
        }
        const auto all = downselect(pool, SelectionRule::top_fraction(1.0));
        CHECK(downselect(all, SelectionRule::top_fraction(1.0)).size() == all.size());
    }
}

TEST_CASE("trimmed mean examples")
{
    const std::vector<double> v{7, 1, 10, 4, 2, 9, 3, 6, 8, 5};
    CHECK(trimmed_mean_prediction(v, 0.2) == 5.5);
    CHECK(trimmed_mean_prediction(v, 0.0) == 5.5);
    const std::vector<double> w{1, 2, 3, 100};
    CHECK(trimmed_mean_prediction(w, 0.0) == 26.5);
    CHECK(trimmed_mean_prediction(w, 0.25) == 2.5);
    const std::vector<double> fours(7, 4.0);
    for (double t : {0.0, 0.1, 0.3, 0.49}) {
        CHECK(trimmed_mean_prediction(fours, t) == 4.0);
    }
    CHECK_THROWS(trimmed_mean_prediction(w, 0.5));
    CHECK_THROWS(trimmed_mean_prediction(std::vector<double>{}, 0.1));
}

TEST_CASE("trimmed mean is monotone and order-free")
{
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(1 + rng.below(25));
        for (auto& x : v) {
            x = rng.normal();
        }
        const double trim = 0.45 * rng.uniform();
        const double base = trimmed_mean_prediction(v, trim);
        auto up = v;
        for (auto& x : up) {
            x += rng.uniform();
        }
        CHECK(trimmed_mean_prediction(up, trim) >= base - 1e-12);
        auto shuffled = v;
        rng.shuffle(std::span<double>(shuffled));
        CHECK(trimmed_mean_prediction(shuffled, trim) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("sqrt-n best")
{
    const auto nine = pool_with_scores(std::vector<double>{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1});
    const std::vector<double> p9{3, 6, 9, 100, 100, 100, 100, 100, 100};
    CHECK(sqrt_n_best_average(nine, p9) == 6.0);
    const auto one = pool_with_scores({0.2});
    CHECK(sqrt_n_best_average(one, std::vector<double>{4.25}) == 4.25);
    const auto ten = pool_with_scores(std::vector<double>(10, 0.1));
    const std::vector<double> p10{1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
    CHECK(sqrt_n_best_average(ten, p10) == doctest::Approx(7.0 / 3.0));
    CHECK_THROWS(sqrt_n_best_average(ten, p9));
}

TEST_CASE("pool csv")
{
    const auto pool = pool_with_scores({0.5, 0.25});
    const auto kept = downselect(pool, SelectionRule::top_fraction(0.5));
    std::ostringstream out;
    write_pool_csv(pool, kept, out);
    CHECK(out.str() == "map_id,method,select_corr,kept_flag\n0,OLS,0.5,1\n1,OLS,0.25,0\n");
}
