#pragma once

#include "embedcast/timeseries.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace embedcast {

/// One measured coordinate: `variable` observed `lag` steps before the base time.
struct Coordinate {
    std::string variable;
    int lag = 1;

    friend bool operator==(const Coordinate&, const Coordinate&) = default;
    friend auto operator<=>(const Coordinate&, const Coordinate&) = default;
};

/// A k-coordinate delay map predicting `target` `lead` steps past its most
/// recent coordinate. Maps drawn by random sampling carry partition_id -1.
struct DelayMap {
    int id = 0;
    int partition_id = -1;
    std::vector<Coordinate> coords;
    std::string target;
    int lead = 1;

    std::size_t size() const { return coords.size(); }
    int max_lag() const;
};

/// Every admissible coordinate, variable-major then lag-minor.
struct CoordinateUniverse {
    std::vector<std::string> variables;
    int max_lag = 0;
    std::vector<Coordinate> coords;

    std::size_t size() const { return coords.size(); }
};

CoordinateUniverse build_universe(const std::vector<std::string>& variables, int max_lag);

/// `count` maps of `k` distinct coordinates each, drawn uniformly without
/// replacement within a map; different maps may share coordinates.
std::vector<DelayMap> sample_random_maps(const CoordinateUniverse& universe, std::size_t k, std::size_t count,
                                         std::uint64_t seed, const std::string& target, int lead);

/// `partitions` independent shuffles of the universe, each cut into
/// floor(|U|/k) disjoint maps of size k; the remainder of each shuffle is dropped.
std::vector<DelayMap> sample_disjoint_partitions(const CoordinateUniverse& universe, std::size_t k,
                                                 std::size_t partitions, std::uint64_t seed, const std::string& target,
                                                 int lead);

/// Regression design for one delay map. Row i predicts the target at step
/// times[i] from coordinates observed at times[i] - (lead - 1) - lag.
struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<Step> times;
};

/// All rows the frame supports for this map (T' = T - max_lag - lead + 1).
Design materialize_design(const SeriesFrame& frame, const DelayMap& map);

/// Rows whose target step lies in [first_target, last_target). Every row
/// must have its full coordinate history inside the frame.
Design materialize_design(const SeriesFrame& frame, const DelayMap& map, Step first_target, Step last_target);

/// Earliest target step that has full history for coordinates up to
/// `max_lag` at lead `lead`.
Step first_supported_target(const SeriesFrame& frame, int max_lag, int lead);

/// Delay-map CSV: map_id,partition_id,variable,lag,target,lead (one row per coordinate).
void write_maps_csv(const std::vector<DelayMap>& maps, std::ostream& out);
std::vector<DelayMap> read_maps_csv(const std::vector<std::string>& lines);

} // namespace embedcast
