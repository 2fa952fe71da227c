#include "embedcast/embedding.hpp"

#include "embedcast/csv.hpp"
#include "embedcast/error.hpp"
#include "embedcast/random.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>

namespace embedcast {

int DelayMap::max_lag() const
{
    int m = 0;
    for (const auto& c : coords) {
        m = std::max(m, c.lag);
    }
    return m;
}

CoordinateUniverse build_universe(const std::vector<std::string>& variables, int max_lag)
{
    if (variables.empty()) {
        throw ConfigError("coordinate universe needs at least one variable");
    }
    if (max_lag < 1) {
        throw ConfigError("max_lag must be >= 1");
    }
    std::set<std::string> seen;
    for (const auto& v : variables) {
        if (!seen.insert(v).second) {
            throw ConfigError("duplicate variable name in universe: " + v);
        }
    }
    CoordinateUniverse u;
    u.variables = variables;
    u.max_lag = max_lag;
    u.coords.reserve(variables.size() * static_cast<std::size_t>(max_lag));
    for (const auto& v : variables) {
        for (int lag = 1; lag <= max_lag; ++lag) {
            u.coords.push_back({v, lag});
        }
    }
    return u;
}

namespace {

void check_map_request(const CoordinateUniverse& universe, std::size_t k, int lead)
{
    if (k < 1) {
        throw ConfigError("delay map size k must be >= 1");
    }
    if (k > universe.size()) {
        throw ConfigError("delay map size k=" + std::to_string(k) + " exceeds universe size " +
                          std::to_string(universe.size()));
    }
    if (lead < 1) {
        throw ConfigError("lead must be >= 1");
    }
}

// Coordinates are kept in universe order inside a map.
std::vector<Coordinate> gather(const CoordinateUniverse& universe, std::vector<std::size_t> picks)
{
    std::sort(picks.begin(), picks.end());
    std::vector<Coordinate> coords;
    coords.reserve(picks.size());
    for (auto i : picks) {
        coords.push_back(universe.coords[i]);
    }
    return coords;
}

} // namespace

std::vector<DelayMap> sample_random_maps(const CoordinateUniverse& universe, std::size_t k, std::size_t count,
                                         std::uint64_t seed, const std::string& target, int lead)
{
    check_map_request(universe, k, lead);
    Rng rng(seed);
    std::vector<std::size_t> idx(universe.size());
    std::vector<DelayMap> maps;
    maps.reserve(count);
    for (std::size_t m = 0; m < count; ++m) {
        std::iota(idx.begin(), idx.end(), 0);
        // Partial Fisher-Yates: the first k slots become a uniform k-subset.
        for (std::size_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
            std::swap(idx[i], idx[j]);
        }
        DelayMap map;
        map.id = static_cast<int>(m);
        map.coords = gather(universe, {idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k)});
        map.target = target;
        map.lead = lead;
        maps.push_back(std::move(map));
    }
    return maps;
}

std::vector<DelayMap> sample_disjoint_partitions(const CoordinateUniverse& universe, std::size_t k,
                                                 std::size_t partitions, std::uint64_t seed, const std::string& target,
                                                 int lead)
{
    check_map_request(universe, k, lead);
    Rng rng(seed);
    const std::size_t blocks = universe.size() / k;
    std::vector<std::size_t> idx(universe.size());
    std::vector<DelayMap> maps;
    maps.reserve(partitions * blocks);
    for (std::size_t p = 0; p < partitions; ++p) {
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(std::span<std::size_t>(idx));
        for (std::size_t b = 0; b < blocks; ++b) {
            const auto first = idx.begin() + static_cast<std::ptrdiff_t>(b * k);
            DelayMap map;
            map.id = static_cast<int>(maps.size());
            map.partition_id = static_cast<int>(p);
            map.coords = gather(universe, {first, first + static_cast<std::ptrdiff_t>(k)});
            map.target = target;
            map.lead = lead;
            maps.push_back(std::move(map));
        }
    }
    return maps;
}

Step first_supported_target(const SeriesFrame& frame, int max_lag, int lead)
{
    return frame.first_step() + max_lag + lead - 1;
}

Design materialize_design(const SeriesFrame& frame, const DelayMap& map)
{
    const Step first = first_supported_target(frame, map.max_lag(), map.lead);
    const Step last = frame.first_step() + static_cast<Step>(frame.length());
    if (first >= last) {
        throw DataError("insufficient history: map needs " + std::to_string(map.max_lag() + map.lead) +
                        " steps, frame has " + std::to_string(frame.length()));
    }
    return materialize_design(frame, map, first, last);
}

Design materialize_design(const SeriesFrame& frame, const DelayMap& map, Step first_target, Step last_target)
{
    if (map.coords.empty()) {
        throw ConfigError("delay map has no coordinates");
    }
    if (map.lead < 1) {
        throw ConfigError("lead must be >= 1");
    }
    if (first_target >= last_target) {
        throw DataError("empty target range for design");
    }
    if (first_target < first_supported_target(frame, map.max_lag(), map.lead)) {
        throw DataError("insufficient history for target step " + std::to_string(first_target));
    }
    const auto& target = frame.column(map.target);
    std::vector<const std::vector<double>*> sources;
    for (const auto& c : map.coords) {
        if (c.lag < 1) {
            throw ConfigError("coordinate lag must be >= 1");
        }
        sources.push_back(&frame.column(c.variable));
    }
    const auto rows = static_cast<std::size_t>(last_target - first_target);
    frame.row_of(last_target - 1); // throws when the range runs past the frame

    Design d;
    d.X.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(map.size()));
    d.y.resize(static_cast<Eigen::Index>(rows));
    d.times.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const Step t = first_target + static_cast<Step>(i);
        const std::size_t target_row = frame.row_of(t);
        // The most recent coordinate (lag 1) sits `lead` steps before the target.
        const std::size_t base = target_row - static_cast<std::size_t>(map.lead - 1);
        for (std::size_t j = 0; j < map.size(); ++j) {
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (*sources[j])[base - static_cast<std::size_t>(map.coords[j].lag)];
        }
        d.y(static_cast<Eigen::Index>(i)) = target[target_row];
        d.times[i] = t;
    }
    return d;
}

void write_maps_csv(const std::vector<DelayMap>& maps, std::ostream& out)
{
    out << "map_id,partition_id,variable,lag,target,lead\n";
    for (const auto& m : maps) {
        for (const auto& c : m.coords) {
            out << m.id << ',' << m.partition_id << ',' << c.variable << ',' << c.lag << ',' << m.target << ','
                << m.lead << '\n';
        }
    }
}

std::vector<DelayMap> read_maps_csv(const std::vector<std::string>& lines)
{
    if (lines.empty() || lines.front() != "map_id,partition_id,variable,lag,target,lead") {
        throw DataError("delay-map CSV: unexpected header");
    }
    std::vector<DelayMap> maps;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = csv::split_line(lines[r]);
        if (cells.size() != 6) {
            throw DataError("delay-map CSV: ragged row " + std::to_string(r + 1));
        }
        try {
            const int id = std::stoi(cells[0]);
            if (maps.empty() || maps.back().id != id) {
                DelayMap m;
                m.id = id;
                m.partition_id = std::stoi(cells[1]);
                m.target = cells[4];
                m.lead = std::stoi(cells[5]);
                maps.push_back(std::move(m));
            }
            maps.back().coords.push_back({cells[2], std::stoi(cells[3])});
        } catch (const std::logic_error&) {
            throw DataError("delay-map CSV: bad integer in row " + std::to_string(r + 1));
        }
    }
    return maps;
}

} // namespace embedcast
