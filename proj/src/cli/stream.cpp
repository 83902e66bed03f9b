#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "stvs/cli.hpp"
#include "stvs/errors.hpp"

namespace stvs::cli {

int stream_assess(std::istream& in, std::ostream& out, std::ostream& err, const RunConfig& config,
                  const std::vector<indices::GeneratorConfig>& generators) {
    if (in.peek() == std::char_traits<char>::eof()) {
        return 0;
    }
    if (!config.fault_clear_time) {
        throw ValidationError("streaming needs the fault clear time (--t0)");
    }
    ingest::TrajectorySchema schema;
    schema.fault_clear_time = config.fault_clear_time;
    ingest::CsvRowReader reader(in, schema);
    std::vector<bool> has_q(reader.channel_ids().size());
    for (std::size_t k = 0; k < has_q.size(); ++k) {
        has_q[k] = reader.has_reactive_power(k);
    }

    int status = 0;
    std::vector<ingest::Row> rows;
    std::optional<std::size_t> clear_index;
    double dt = 0.0;
    std::size_t report = 0;
    std::size_t window_samples = 0;
    auto target = [&](std::size_t j) {
        const double t = config.first_report + static_cast<double>(j) * config.report_interval;
        return static_cast<std::size_t>(std::llround(t / dt));
    };

    while (true) {
        std::optional<ingest::Row> row;
        try {
            row = reader.next();
        } catch (const ValidationError& e) {
            err << "error: " << e.what() << '\n';
            status = 1;
            continue;
        }
        if (!row) {
            break;
        }
        if (!rows.empty()) {
            const double step = row->time - rows.back().time;
            if (!(step > 0.0)) {
                err << fmt::format("error: line {}: out-of-order timestamp {} s after {} s\n", row->line,
                                   row->time, rows.back().time);
                status = 1;
                continue;
            }
            if (rows.size() >= 2 && std::abs(step - dt) > schema.sampling_tolerance * dt) {
                err << fmt::format("error: line {}: non-uniform sampling (step {} s, expected {} s)\n", row->line,
                                   step, dt);
                status = 1;
                continue;
            }
        }
        rows.push_back(std::move(*row));
        if (rows.size() == 2) {
            dt = rows[1].time - rows[0].time;
            const double pos = (*config.fault_clear_time - rows.front().time) / dt;
            if (pos < -0.5) {
                throw ValidationError(fmt::format("fault clear time {} s precedes the stream start {} s",
                                                  *config.fault_clear_time, rows.front().time));
            }
            clear_index = static_cast<std::size_t>(std::llround(pos));
            window_samples = static_cast<std::size_t>(std::llround(config.assess.window / dt));
        }
        if (!clear_index || rows.size() <= *clear_index) {
            continue;
        }
        const std::size_t post = rows.size() - *clear_index;
        if (post > window_samples || post != target(report)) {
            continue;
        }
        while (target(report) <= post) {
            ++report;
        }
        try {
            const auto traj = ingest::trajectory_from_rows(reader.channel_ids(), has_q, rows, schema);
            const auto a = indices::assess(traj, config.assess, generators, post);
            out << assessment_json(a, config, static_cast<double>(post) * dt).dump() << '\n';
            out.flush();
        } catch (const StageError& e) {
            err << "error: " << e.what() << '\n';
            status = std::max(status, e.is_validation() ? 1 : 2);
        } catch (const ValidationError& e) {
            err << "error: " << e.what() << '\n';
            status = std::max(status, 1);
        } catch (const ComputationError& e) {
            err << "error: " << e.what() << '\n';
            status = std::max(status, 2);
        }
    }
    return status;
}

}  // namespace stvs::cli
