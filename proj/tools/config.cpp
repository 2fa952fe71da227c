#include "config.hpp"

#include "embedcast/csv.hpp"
#include "embedcast/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>

namespace embedcast::cli {

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

} // namespace

RunConfig::RunConfig(std::vector<KeySpec> schema, const std::vector<std::string>& lines, const std::string& source)
    : schema_(std::move(schema))
{
    for (const auto& k : schema_) {
        values_[k.name] = k.default_value;
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(i + 1) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (!has(key)) {
            throw ConfigError(source + ":" + std::to_string(i + 1) + ": unknown config key '" + key + "'");
        }
        if (user_keys_.count(key)) {
            throw ConfigError(source + ":" + std::to_string(i + 1) + ": config key '" + key + "' given twice");
        }
        values_[key] = value;
        user_keys_[key] = true;
    }
}

void RunConfig::set(const std::string& key, const std::string& value)
{
    spec(key);
    values_[key] = value;
    user_keys_[key] = true;
}

bool RunConfig::has(const std::string& key) const
{
    return std::any_of(schema_.begin(), schema_.end(), [&](const KeySpec& k) { return k.name == key; });
}

const KeySpec& RunConfig::spec(const std::string& key) const
{
    for (const auto& k : schema_) {
        if (k.name == key) {
            return k;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

std::string RunConfig::text(const std::string& key) const
{
    spec(key);
    return values_.at(key);
}

double RunConfig::real(const std::string& key) const
{
    const auto v = csv::parse_double(text(key));
    if (!v || !std::isfinite(*v)) {
        throw ConfigError("config key '" + key + "': '" + text(key) + "' is not a finite number");
    }
    return *v;
}

std::int64_t RunConfig::integer(const std::string& key) const
{
    const auto s = text(key);
    std::int64_t out = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    if (s.empty() || ec != std::errc() || ptr != end) {
        throw ConfigError("config key '" + key + "': '" + s + "' is not an integer");
    }
    return out;
}

std::size_t RunConfig::count(const std::string& key) const
{
    const auto v = integer(key);
    if (v < 0) {
        throw ConfigError("config key '" + key + "' must be >= 0");
    }
    return static_cast<std::size_t>(v);
}

std::uint64_t RunConfig::seed(const std::string& key) const
{
    const auto s = text(key);
    std::uint64_t out = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    if (s.empty() || ec != std::errc() || ptr != end) {
        throw ConfigError("config key '" + key + "': '" + s + "' is not an unsigned integer");
    }
    return out;
}

bool RunConfig::flag(const std::string& key) const
{
    const auto s = text(key);
    if (s == "true" || s == "1" || s == "yes") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no") {
        return false;
    }
    throw ConfigError("config key '" + key + "': '" + s + "' is not true/false");
}

std::vector<std::string> RunConfig::list(const std::string& key) const
{
    std::vector<std::string> out;
    for (const auto& cell : csv::split_line(text(key))) {
        auto t = trim(cell);
        if (!t.empty()) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

std::vector<double> RunConfig::reals(const std::string& key) const
{
    std::vector<double> out;
    for (const auto& cell : list(key)) {
        const auto v = csv::parse_double(cell);
        if (!v || !std::isfinite(*v)) {
            throw ConfigError("config key '" + key + "': '" + cell + "' is not a finite number");
        }
        out.push_back(*v);
    }
    return out;
}

std::string RunConfig::echo() const
{
    std::string out;
    for (const auto& k : schema_) {
        out += k.name + " = " + values_.at(k.name) + '\n';
    }
    return out;
}

} // namespace embedcast::cli
