#include "stvs/ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <utility>

#include <fmt/format.h>

#include "stvs/errors.hpp"
#include "stvs/numfmt.hpp"

namespace stvs::ingest {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

}  // namespace

VoltageTrajectory::VoltageTrajectory(std::vector<Channel> channels, double dt,
                                     std::size_t fault_clear_index, double start_time,
                                     std::vector<double> prefault_voltage,
                                     std::optional<std::size_t> fault_onset_index)
    : channels_(std::move(channels)),
      dt_(dt),
      fault_clear_index_(fault_clear_index),
      start_time_(start_time),
      prefault_voltage_(std::move(prefault_voltage)),
      fault_onset_index_(fault_onset_index) {
    if (channels_.empty()) {
        throw ValidationError("trajectory needs at least one voltage channel");
    }
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
        throw ValidationError(fmt::format("sampling interval must be positive, got {}", dt_));
    }
    const std::size_t n = channels_.front().voltage.size();
    if (n < 2) {
        throw ValidationError("trajectory needs at least two samples");
    }
    for (const auto& ch : channels_) {
        if (ch.voltage.size() != n) {
            throw ValidationError(fmt::format("channel '{}' has {} samples, expected {}", ch.id,
                                              ch.voltage.size(), n));
        }
        if (ch.has_reactive_power() && ch.reactive_power.size() != n) {
            throw ValidationError(fmt::format("reactive power of '{}' has {} samples, expected {}",
                                              ch.id, ch.reactive_power.size(), n));
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(ch.voltage[i]) || ch.voltage[i] <= 0.0) {
                throw ValidationError(fmt::format("channel '{}' sample {}: voltage {} is not a finite "
                                                  "positive per-unit value",
                                                  ch.id, i, ch.voltage[i]));
            }
        }
    }
    if (fault_clear_index_ >= n) {
        throw ValidationError(
            fmt::format("fault clear index {} outside record of {} samples", fault_clear_index_, n));
    }
    if (!prefault_voltage_.empty() && prefault_voltage_.size() != channels_.size()) {
        throw ValidationError("prefault voltage must have one value per channel");
    }
    if (fault_onset_index_ && *fault_onset_index_ > fault_clear_index_) {
        throw ValidationError("fault onset must not follow fault clearing");
    }
}

const Channel* VoltageTrajectory::find_channel(std::string_view id) const noexcept {
    for (const auto& ch : channels_) {
        if (ch.id == id) {
            return &ch;
        }
    }
    return nullptr;
}

VoltageTrajectory VoltageTrajectory::with_prefault_voltage(std::vector<double> v_pre) const {
    return VoltageTrajectory(channels_, dt_, fault_clear_index_, start_time_, std::move(v_pre),
                             fault_onset_index_);
}

CsvRowReader::CsvRowReader(std::istream& in, const TrajectorySchema& schema)
    : in_(in), time_column_(schema.time_column) {
    std::string header;
    if (!std::getline(in_, header)) {
        throw ValidationError("input is empty: missing CSV header");
    }
    const auto fields = split_fields(header);
    column_count_ = fields.size();
    std::optional<std::size_t> time_idx;
    for (std::size_t c = 0; c < fields.size(); ++c) {
        if (fields[c] == schema.time_column) {
            time_idx = c;
        } else if (starts_with(fields[c], schema.voltage_prefix)) {
            ids_.emplace_back(fields[c].substr(schema.voltage_prefix.size()));
            v_columns_.push_back(c);
        }
    }
    if (!time_idx) {
        throw ValidationError(fmt::format("missing time column '{}'", schema.time_column));
    }
    if (ids_.empty()) {
        throw ValidationError(
            fmt::format("no voltage columns with prefix '{}'", schema.voltage_prefix));
    }
    time_index_ = *time_idx;
    q_columns_.assign(ids_.size(), std::nullopt);
    for (std::size_t c = 0; c < fields.size(); ++c) {
        if (!starts_with(fields[c], schema.reactive_prefix)) {
            continue;
        }
        const auto id = fields[c].substr(schema.reactive_prefix.size());
        bool matched = false;
        for (std::size_t k = 0; k < ids_.size(); ++k) {
            if (ids_[k] == id) {
                q_columns_[k] = c;
                matched = true;
            }
        }
        if (!matched) {
            throw ValidationError(fmt::format("reactive power column '{}' has no voltage column", fields[c]));
        }
    }
}

std::optional<Row> CsvRowReader::next() {
    std::string text;
    while (std::getline(in_, text)) {
        ++line_;
        if (trim(text).empty()) {
            continue;
        }
        const auto fields = split_fields(text);
        if (fields.size() != column_count_) {
            throw ValidationError(fmt::format("line {}: expected {} fields, found {}", line_,
                                              column_count_, fields.size()));
        }
        Row row;
        row.line = line_;
        const auto t = parse_double(fields[time_index_]);
        if (!t || !std::isfinite(*t)) {
            throw ValidationError(fmt::format("line {}: invalid time '{}'", line_, fields[time_index_]));
        }
        row.time = *t;
        row.voltage.reserve(ids_.size());
        for (std::size_t k = 0; k < ids_.size(); ++k) {
            const auto v = parse_double(fields[v_columns_[k]]);
            if (!v || !std::isfinite(*v) || *v <= 0.0) {
                throw ValidationError(fmt::format("line {}: voltage '{}' of channel '{}' is not a "
                                                  "finite positive value",
                                                  line_, fields[v_columns_[k]], ids_[k]));
            }
            row.voltage.push_back(*v);
            if (q_columns_[k]) {
                const auto q = parse_double(fields[*q_columns_[k]]);
                if (!q || !std::isfinite(*q)) {
                    throw ValidationError(fmt::format("line {}: reactive power '{}' of channel '{}' is "
                                                      "not finite",
                                                      line_, fields[*q_columns_[k]], ids_[k]));
                }
                row.reactive_power.push_back(*q);
            }
        }
        return row;
    }
    return std::nullopt;
}

std::size_t index_at_time(double start_time, double dt, std::size_t length, double time) {
    const double pos = (time - start_time) / dt;
    if (!std::isfinite(pos) || pos < -0.5 || pos > static_cast<double>(length) - 0.5) {
        throw ValidationError(fmt::format("time {} s lies outside the record [{}, {}] s", time,
                                          start_time, start_time + dt * static_cast<double>(length - 1)));
    }
    return static_cast<std::size_t>(std::llround(pos));
}

VoltageTrajectory trajectory_from_rows(const std::vector<std::string>& ids,
                                       const std::vector<bool>& has_q, const std::vector<Row>& rows,
                                       const TrajectorySchema& schema) {
    if (rows.size() < 2) {
        throw ValidationError("need at least two data rows");
    }
    const double dt = rows[1].time - rows[0].time;
    if (!(dt > 0.0)) {
        throw ValidationError(fmt::format("line {}: time does not increase", rows[1].line));
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double step = rows[i].time - rows[i - 1].time;
        if (std::abs(step - dt) > schema.sampling_tolerance * dt) {
            throw ValidationError(fmt::format("line {}: non-uniform sampling (step {} s, expected {} s)",
                                              rows[i].line, step, dt));
        }
    }
    std::vector<Channel> channels(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        channels[k].id = ids[k];
        channels[k].voltage.reserve(rows.size());
        if (has_q[k]) {
            channels[k].reactive_power.reserve(rows.size());
        }
    }
    for (const auto& row : rows) {
        std::size_t q = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
            channels[k].voltage.push_back(row.voltage[k]);
            if (has_q[k]) {
                channels[k].reactive_power.push_back(row.reactive_power[q++]);
            }
        }
    }
    std::size_t clear_index = 0;
    if (schema.fault_clear_time) {
        clear_index = index_at_time(rows.front().time, dt, rows.size(), *schema.fault_clear_time);
    } else if (auto detected = detect_fault_clear_index(channels)) {
        clear_index = *detected;
    } else {
        throw ValidationError("fault clear time not given and no fault recovery could be detected");
    }
    return VoltageTrajectory(std::move(channels), dt, clear_index, rows.front().time);
}

VoltageTrajectory read_trajectory(std::istream& in, const TrajectorySchema& schema) {
    CsvRowReader reader(in, schema);
    std::vector<Row> rows;
    while (auto row = reader.next()) {
        rows.push_back(std::move(*row));
    }
    std::vector<bool> has_q(reader.channel_ids().size());
    for (std::size_t k = 0; k < has_q.size(); ++k) {
        has_q[k] = reader.has_reactive_power(k);
    }
    return trajectory_from_rows(reader.channel_ids(), has_q, rows, schema);
}

VoltageTrajectory load_trajectory(const std::string& path, const TrajectorySchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError(fmt::format("cannot open '{}'", path));
    }
    return read_trajectory(in, schema);
}

void write_trajectory(std::ostream& out, const VoltageTrajectory& traj) {
    out << "time";
    for (const auto& ch : traj.channels()) {
        out << ",V:" << ch.id;
    }
    for (const auto& ch : traj.channels()) {
        if (ch.has_reactive_power()) {
            out << ",Q:" << ch.id;
        }
    }
    out << '\n';
    for (std::size_t i = 0; i < traj.length(); ++i) {
        out << format_double(traj.time_at(i));
        for (const auto& ch : traj.channels()) {
            out << ',' << format_double(ch.voltage[i]);
        }
        for (const auto& ch : traj.channels()) {
            if (ch.has_reactive_power()) {
                out << ',' << format_double(ch.reactive_power[i]);
            }
        }
        out << '\n';
    }
}

std::optional<std::size_t> detect_fault_clear_index(const std::vector<Channel>& channels) {
    if (channels.empty() || channels.front().voltage.size() < 4) {
        return std::nullopt;
    }
    const std::size_t n = channels.front().voltage.size();
    for (std::size_t i = n - 3; i-- > 0;) {
        for (const auto& ch : channels) {
            const auto& v = ch.voltage;
            if (v[i] < 0.6 && v[i] < v[i + 1] && v[i + 1] < v[i + 2] && v[i + 2] < v[i + 3]) {
                return i;
            }
        }
    }
    return std::nullopt;
}

std::size_t detect_fault_onset_index(const VoltageTrajectory& traj) {
    if (auto onset = traj.fault_onset_index()) {
        return *onset;
    }
    const std::size_t clear = traj.fault_clear_index();
    for (std::size_t i = 0; i < clear; ++i) {
        for (const auto& ch : traj.channels()) {
            if (ch.voltage[i] < 0.9 * ch.voltage.front()) {
                return i;
            }
        }
    }
    return clear;
}

VoltageTrajectory extract_post_fault_window(const VoltageTrajectory& traj, double duration) {
    const auto samples = static_cast<std::size_t>(std::llround(std::max(duration, 0.0) / traj.dt()));
    if (!(duration > 0.0) || samples == 0) {
        throw ValidationError(fmt::format("post-fault window of {} s is empty", duration));
    }
    const std::size_t start = traj.fault_clear_index();
    const std::size_t available = traj.length() - start;
    if (samples > available) {
        throw ValidationError(fmt::format("post-fault window of {} s exceeds the data; at most {} s "
                                          "available after fault clearing",
                                          duration, static_cast<double>(available) * traj.dt()));
    }
    if (samples < 2) {
        throw ValidationError("post-fault window must span at least two samples");
    }
    std::vector<Channel> channels;
    channels.reserve(traj.channel_count());
    for (const auto& ch : traj.channels()) {
        Channel out;
        out.id = ch.id;
        out.voltage.assign(ch.voltage.begin() + static_cast<std::ptrdiff_t>(start),
                           ch.voltage.begin() + static_cast<std::ptrdiff_t>(start + samples));
        if (ch.has_reactive_power()) {
            out.reactive_power.assign(ch.reactive_power.begin() + static_cast<std::ptrdiff_t>(start),
                                      ch.reactive_power.begin() + static_cast<std::ptrdiff_t>(start + samples));
        }
        channels.push_back(std::move(out));
    }
    std::vector<double> v_pre(traj.prefault_voltage().begin(), traj.prefault_voltage().end());
    return VoltageTrajectory(std::move(channels), traj.dt(), 0, traj.time_at(start), std::move(v_pre));
}

std::vector<double> estimate_prefault_voltage(const VoltageTrajectory& traj, double lookback) {
    const auto samples = static_cast<std::size_t>(std::llround(std::max(lookback, 0.0) / traj.dt()));
    if (samples == 0) {
        throw ValidationError(fmt::format("prefault lookback window of {} s is empty", lookback));
    }
    const std::size_t onset = detect_fault_onset_index(traj);
    if (samples > onset) {
        throw ValidationError(fmt::format("prefault lookback of {} samples does not fit before the "
                                          "fault onset at sample {}",
                                          samples, onset));
    }
    std::vector<double> v_pre;
    v_pre.reserve(traj.channel_count());
    for (const auto& ch : traj.channels()) {
        double sum = 0.0;
        for (std::size_t i = onset - samples; i < onset; ++i) {
            sum += ch.voltage[i];
        }
        v_pre.push_back(sum / static_cast<double>(samples));
    }
    return v_pre;
}

}  // namespace stvs::ingest
