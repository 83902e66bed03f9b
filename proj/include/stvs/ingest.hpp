#pragma once

// Loading, validating and windowing PMU-style voltage / reactive power records.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stvs::ingest {

struct Channel {
    std::string id;
    std::vector<double> voltage;          // per-unit
    std::vector<double> reactive_power;   // MVAr; empty when the record has no Q:<id> column

    bool has_reactive_power() const noexcept { return !reactive_power.empty(); }
};

/// Uniformly sampled multi-channel voltage record with its fault markers.
/// Immutable once constructed; the constructor enforces every invariant.
class VoltageTrajectory {
public:
    VoltageTrajectory(std::vector<Channel> channels, double dt, std::size_t fault_clear_index,
                      double start_time = 0.0, std::vector<double> prefault_voltage = {},
                      std::optional<std::size_t> fault_onset_index = std::nullopt);

    const std::vector<Channel>& channels() const noexcept { return channels_; }
    const Channel& channel(std::size_t i) const { return channels_.at(i); }
    const Channel* find_channel(std::string_view id) const noexcept;
    std::size_t channel_count() const noexcept { return channels_.size(); }
    std::size_t length() const noexcept { return channels_.front().voltage.size(); }

    double dt() const noexcept { return dt_; }
    double start_time() const noexcept { return start_time_; }
    double time_at(std::size_t i) const noexcept { return start_time_ + static_cast<double>(i) * dt_; }

    std::size_t fault_clear_index() const noexcept { return fault_clear_index_; }
    std::optional<std::size_t> fault_onset_index() const noexcept { return fault_onset_index_; }

    /// Per-channel V_pre; empty until estimated or supplied.
    std::span<const double> prefault_voltage() const noexcept { return prefault_voltage_; }
    bool has_prefault_voltage() const noexcept { return !prefault_voltage_.empty(); }

    VoltageTrajectory with_prefault_voltage(std::vector<double> v_pre) const;

private:
    std::vector<Channel> channels_;
    double dt_;
    std::size_t fault_clear_index_;
    double start_time_;
    std::vector<double> prefault_voltage_;
    std::optional<std::size_t> fault_onset_index_;
};

/// Column mapping for CSV input: `time`, `V:<id>` and optional `Q:<id>` columns.
struct TrajectorySchema {
    std::string time_column = "time";
    std::string voltage_prefix = "V:";
    std::string reactive_prefix = "Q:";
    std::optional<double> fault_clear_time;  // seconds; auto-detected when absent
    double sampling_tolerance = 1e-6;        // relative, on each time step
};

/// One parsed data row. `line` is the 1-based line number in the source.
struct Row {
    std::size_t line = 0;
    double time = 0.0;
    std::vector<double> voltage;
    std::vector<double> reactive_power;
};

/// Incremental CSV reader shared by batch loading and streaming.
class CsvRowReader {
public:
    CsvRowReader(std::istream& in, const TrajectorySchema& schema);

    const std::vector<std::string>& channel_ids() const noexcept { return ids_; }
    bool has_reactive_power(std::size_t channel) const { return q_columns_.at(channel).has_value(); }

    /// Next row, or nullopt at end of input. Throws ValidationError naming the
    /// line for malformed, non-finite or non-positive voltage fields.
    std::optional<Row> next();

private:
    std::istream& in_;
    std::string time_column_;
    std::size_t time_index_ = 0;
    std::size_t column_count_ = 0;
    std::vector<std::string> ids_;
    std::vector<std::size_t> v_columns_;
    std::vector<std::optional<std::size_t>> q_columns_;
    std::size_t line_ = 1;
};

/// Builds a validated trajectory from parsed rows; dt is t[1] - t[0] and every
/// step must agree with it within `schema.sampling_tolerance` (relative).
VoltageTrajectory trajectory_from_rows(const std::vector<std::string>& ids,
                                       const std::vector<bool>& has_q, const std::vector<Row>& rows,
                                       const TrajectorySchema& schema);

VoltageTrajectory read_trajectory(std::istream& in, const TrajectorySchema& schema);
VoltageTrajectory load_trajectory(const std::string& path, const TrajectorySchema& schema);

/// Writes the record in the CSV input format with shortest round-trip formatting.
void write_trajectory(std::ostream& out, const VoltageTrajectory& traj);

/// Index of the sample at `time`, rounded to the sampling grid.
std::size_t index_at_time(double start_time, double dt, std::size_t length, double time);

/// Last sample below 0.6 pu on any channel that is followed by a strictly
/// rising run of three samples on that channel.
std::optional<std::size_t> detect_fault_clear_index(const std::vector<Channel>& channels);

/// First sample (not after the clear index) where any channel drops below 90 %
/// of its initial value; the clear index itself when no drop precedes it.
std::size_t detect_fault_onset_index(const VoltageTrajectory& traj);

/// Slice of `duration` seconds starting at the fault-clear sample. The slice has
/// fault_clear_index 0 and keeps the parent's prefault voltage.
VoltageTrajectory extract_post_fault_window(const VoltageTrajectory& traj, double duration);

/// Per-channel mean over the `lookback` seconds that end at the fault onset.
std::vector<double> estimate_prefault_voltage(const VoltageTrajectory& traj, double lookback);

}  // namespace stvs::ingest
