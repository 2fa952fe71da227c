#include <doctest.h>

#include "embedcast/csv.hpp"
#include "embedcast/error.hpp"
#include "embedcast/random.hpp"
#include "embedcast/timeseries.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace embedcast;

namespace {

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

SeriesFrame one_column(std::vector<double> v)
{
    return SeriesFrame({{"v", std::move(v)}});
}

// Days since 1970-01-01 to a civil date (Howard Hinnant's algorithm).
std::string civil_from_days(long z)
{
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const long doe = z - era * 146097;
    const long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const long mp = (5 * doy + 2) / 153;
    const long d = doy - (153 * mp + 2) / 5 + 1;
    const long m = mp < 10 ? mp + 3 : mp - 9;
    const long y = yoe + era * 400 + (m <= 2 ? 1 : 0);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04ld-%02ld-%02ld", y, m, d);
    return buf;
}

} // namespace

TEST_CASE("three-row dated csv")
{
    const auto f = parse_csv(lines_of("date,djia\n1929-01-02,300.0\n1929-01-03,301.5\n1929-01-04,299.25\n"));
    CHECK(f.length() == 3);
    CHECK(f.width() == 1);
    REQUIRE(f.dates().has_value());
    CHECK(f.dates()->at(1) == "1929-01-03");
    CHECK(f.column("djia")[2] == 299.25);
}

TEST_CASE("duplicate headers are rejected")
{
    CHECK_THROWS_AS(parse_csv(lines_of("a,a\n1,2\n")), DataError);
}

TEST_CASE("bad cells name row and column")
{
    try {
        parse_csv(lines_of("a,b\n1,2\n3,oops\n"));
        FAIL("expected an error");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("oops") != std::string::npos);
        CHECK(msg.find('3') != std::string::npos);
        CHECK(msg.find('b') != std::string::npos);
    }
    CHECK_THROWS_AS(parse_csv(lines_of("a,b\n1,2\n3\n")), DataError);
    CHECK_THROWS_AS(parse_csv(lines_of("a\nnan\n")), DataError);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), DataError);
}

TEST_CASE("dates must increase")
{
    CHECK_THROWS(parse_csv(lines_of("date,a\n2000-01-02,1\n2000-01-01,2\n")));
    CHECK_THROWS(parse_csv(lines_of("date,a\n2000-02-30,1\n")));
    CHECK(is_iso_date("2000-02-29"));
    CHECK_FALSE(is_iso_date("1900-02-29"));
}

TEST_CASE("2006-row dated csv round-trips cell by cell")
{
    Rng rng(42);
    std::vector<std::string> dates;
    std::vector<double> a, b;
    long day = -14975; // 1929-01-01
    double level = 300.0;
    for (int i = 0; i < 2006; ++i) {
        day += 1 + static_cast<long>(rng.below(3));
        dates.push_back(civil_from_days(day));
        level *= 1.0 + 0.01 * rng.normal();
        a.push_back(level);
        b.push_back(rng.normal() * 1e-7);
    }
    const SeriesFrame frame({{"djia", a}, {"djta", b}}, dates);
    const auto path = (std::filesystem::temp_directory_path() / "embedcast_roundtrip.csv").string();
    write_csv(frame, path);
    const auto back = load_csv(path);
    std::filesystem::remove(path);
    REQUIRE(back.length() == 2006);
    REQUIRE(back.dates().has_value());
    CHECK(*back.dates() == dates);
    for (std::size_t i = 0; i < 2006; ++i) {
        REQUIRE(back.column("djia")[i] == a[i]);
        REQUIRE(back.column("djta")[i] == b[i]);
    }
}

TEST_CASE("explicit date column in the middle")
{
    const auto f = parse_csv(lines_of("x,when,y\n1,2001-01-01,2\n3,2001-01-02,4\n"), std::string("when"));
    CHECK(f.names() == std::vector<std::string>{"x", "y"});
    CHECK(f.dates()->front() == "2001-01-01");
}

TEST_CASE("first difference examples")
{
    const auto d = first_difference(one_column({1, 3, 6}), "v");
    CHECK(d.column("v") == std::vector<double>{2, 3});
    CHECK(d.first_step() == 1);
    CHECK(first_difference(one_column({5, 5, 5}), "v").column("v") == std::vector<double>{0, 0});
    CHECK_THROWS_AS(first_difference(one_column({1}), "v"), DataError);
    CHECK_THROWS(first_difference(one_column({1, 2}), "w"));
}

TEST_CASE("log differences")
{
    const auto d = first_difference(one_column({1, std::exp(1.0), std::exp(3.0)}), "v", Differencing::Log);
    CHECK(d.column("v")[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.column("v")[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS(first_difference(one_column({1, -1}), "v", Differencing::Log));
}

TEST_CASE("cumulative sum of differences reproduces the input")
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        std::vector<double> v(100);
        for (auto& x : v) {
            x = 100.0 * rng.normal();
        }
        const auto d = first_difference(one_column(v), "v").column("v");
        REQUIRE(d.size() == 99);
        double acc = v[0];
        for (std::size_t t = 0; t < d.size(); ++t) {
            acc += d[t];
            CHECK(std::abs(acc - v[t + 1]) <= 1e-12 * std::max(1.0, std::abs(v[t + 1])) * 100);
        }
        const double span = v.back() - v.front();
        double sum = 0.0;
        for (double x : d) {
            sum += x;
        }
        CHECK(std::abs(sum - span) <= 1e-12 * std::max(1.0, std::abs(span)) * 100);
    }
}

TEST_CASE("difference keeps dates and step stamps")
{
    const SeriesFrame f({{"a", {1, 2, 4}}, {"b", {0, 1, 0}}}, std::vector<std::string>{"2000-01-03", "2000-01-04", "2000-01-05"}, 10);
    const auto d = first_difference_all(f);
    CHECK(d.first_step() == 11);
    CHECK(d.dates()->front() == "2000-01-04");
    CHECK(d.column("b") == std::vector<double>{1, -1});
    CHECK(d.row_of(12) == 1);
    CHECK_THROWS(d.row_of(10));
}

TEST_CASE("walk-forward windows by hand")
{
    const auto w = walk_forward_windows(10, {3, 2, 2, 2});
    REQUIRE(w.size() == 2);
    CHECK(w[0] == Window{{0, 3}, {3, 5}, {5, 7}});
    CHECK(w[1] == Window{{2, 5}, {5, 7}, {7, 9}});

    CHECK(walk_forward_windows(7, {3, 2, 2, 2}).size() == 1);
    CHECK_THROWS_AS(walk_forward_windows(6, {3, 2, 2, 2}), ConfigError);
    CHECK_THROWS_AS(walk_forward_windows(10, {0, 2, 2, 2}), ConfigError);
    CHECK_THROWS_AS(walk_forward_windows(10, {3, 2, 2, 1}), ConfigError);
}

TEST_CASE("2000-step plan tiles the post-training era")
{
    const auto plan = plan_from_years(6, 2, 2, 250);
    CHECK(plan.fit_len == 1500);
    CHECK(plan.select_len == 500);
    CHECK(plan.test_len == 500);
    CHECK(plan.stride == 500);
    // 2000 steps hold only the training era; extend to 4000 to see the tiling.
    CHECK_THROWS(walk_forward_windows(2000, plan));
    const auto w = walk_forward_windows(4000, plan);
    REQUIRE(w.size() == 4);
    for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(w[i].test.begin == 2000 + 500 * i);
        CHECK(w[i].fit.end == w[i].select.begin);
        CHECK(w[i].select.end == w[i].test.begin);
    }
}

TEST_CASE("every test step belongs to exactly one window")
{
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const WindowPlan plan{1 + rng.below(20), 1 + rng.below(20), 1 + rng.below(20), 0};
        WindowPlan p = plan;
        p.stride = p.test_len + rng.below(5);
        const std::size_t total = p.fit_len + p.select_len + p.test_len + rng.below(100);
        const auto windows = walk_forward_windows(total, p);
        std::vector<int> hits(total, 0);
        for (const auto& w : windows) {
            CHECK(w.test.end <= total);
            for (std::size_t t = w.test.begin; t < w.test.end; ++t) {
                ++hits[t];
            }
        }
        for (int h : hits) {
            REQUIRE(h <= 1);
        }
        if (p.stride == p.test_len) {
            // contiguous tiling: covered steps form one block starting at the first test step
            const std::size_t first = p.fit_len + p.select_len;
            const std::size_t covered = windows.size() * p.test_len;
            for (std::size_t t = first; t < first + covered; ++t) {
                REQUIRE(hits[t] == 1);
            }
            CHECK(total - (first + covered) < p.test_len);
        }
    }
}

TEST_CASE("csv doubles round-trip exactly")
{
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double x = std::ldexp(rng.normal(), static_cast<int>(rng.below(200)) - 100);
        REQUIRE(csv::parse_double(csv::format_double(x)) == x);
    }
    CHECK_FALSE(csv::parse_double("1.5x").has_value());
    CHECK(csv::parse_double(" +2 ") == 2.0);
}
