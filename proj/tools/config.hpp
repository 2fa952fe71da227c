#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace embedcast::cli {

struct KeySpec {
    std::string name;
    std::string default_value;
    std::string help;
};

/// Plain-text "key = value" run configuration. Blank lines and lines
/// starting with '#' are ignored. Only keys listed in the schema are
/// accepted; every accessor reports the key name on a bad value.
class RunConfig {
public:
    RunConfig(std::vector<KeySpec> schema, const std::vector<std::string>& lines, const std::string& source);
    explicit RunConfig(std::vector<KeySpec> schema) : RunConfig(std::move(schema), {}, "<defaults>") {}

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;
    bool is_set_by_user(const std::string& key) const { return user_keys_.count(key) != 0; }

    std::string text(const std::string& key) const;
    double real(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::size_t count(const std::string& key) const; ///< non-negative integer
    std::uint64_t seed(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<std::string> list(const std::string& key) const; ///< comma separated, empty entries dropped
    std::vector<double> reals(const std::string& key) const;

    /// Effective configuration, one "key = value" line per schema key in schema order.
    std::string echo() const;

private:
    const KeySpec& spec(const std::string& key) const;

    std::vector<KeySpec> schema_;
    std::map<std::string, std::string> values_;
    std::map<std::string, bool> user_keys_;
};

} // namespace embedcast::cli
