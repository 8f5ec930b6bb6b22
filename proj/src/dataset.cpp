#include "beamsense/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "beamsense/errors.hpp"

namespace beamsense {

void TrajectoryConfig::validate() const {
    if (num_slots < 1)
        throw std::invalid_argument("trajectory: need at least one slot");
    if (!(std::isfinite(jitter_std) && jitter_std >= 0.0))
        throw std::invalid_argument("trajectory: jitter_std must be finite and >= 0");
    if (!(std::isfinite(jitter_corr_slots) && jitter_corr_slots >= 0.0))
        throw std::invalid_argument("trajectory: jitter_corr_slots must be finite and >= 0");
    if (!(std::isfinite(start.x) && std::isfinite(start.y) &&
          std::isfinite(end.x) && std::isfinite(end.y)))
        throw std::invalid_argument("trajectory: endpoints must be finite");
}

Dataset generate_dataset(const TrajectoryConfig& traj, const ChannelConfig& chan,
                         const BeamCodebook& cb) {
    traj.validate();
    chan.validate();

    const int T = traj.num_slots;
    std::mt19937_64 rng(traj.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Gaussian jitter as two independent AR(1) offsets with stationary std
    // jitter_std and correlation rho = exp(-1/tau). Correlated jitter makes
    // stale position samples degrade gradually with age instead of all at
    // once; tau = 0 recovers independent per-slot noise.
    const double rho = traj.jitter_corr_slots > 0.0 ? std::exp(-1.0 / traj.jitter_corr_slots) : 0.0;
    const double innov = traj.jitter_std * std::sqrt(1.0 - rho * rho);

    std::vector<Vec2> positions(T);
    double ox = 0.0, oy = 0.0;
    if (traj.jitter_std > 0.0) {
        ox = traj.jitter_std * gauss(rng);
        oy = traj.jitter_std * gauss(rng);
    }
    const double dirx = traj.end.x - traj.start.x;
    const double diry = traj.end.y - traj.start.y;
    for (int t = 0; t < T; ++t) {
        const double frac = T > 1 ? static_cast<double>(t) / (T - 1) : 0.0;
        positions[t] = {traj.start.x + frac * dirx + ox, traj.start.y + frac * diry + oy};
        if (traj.jitter_std > 0.0) {
            ox = rho * ox + innov * gauss(rng);
            oy = rho * oy + innov * gauss(rng);
        }
    }

    double min_x = positions[0].x, max_x = positions[0].x;
    double min_y = positions[0].y, max_y = positions[0].y;
    for (const auto& p : positions) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double range_x = max_x - min_x;
    const double range_y = max_y - min_y;

    Dataset ds;
    ds.records.resize(T);
    for (int t = 0; t < T; ++t) {
        auto& rec = ds.records[t];
        rec.slot = t;
        rec.features.resize(2);
        rec.features(0) = range_x > 0.0 ? (positions[t].x - min_x) / range_x : 0.5;
        rec.features(1) = range_y > 0.0 ? (positions[t].y - min_y) / range_y : 0.5;

        const ChannelSample h = los_channel(positions[t], chan, cb.num_antennas);
        rec.gains.resize(cb.size());
        for (int m = 0; m < cb.size(); ++m)
            rec.gains(m) = beamforming_gain(h, cb.vectors[m]);
        int best = 0;
        for (int m = 1; m < cb.size(); ++m)
            if (rec.gains(m) > rec.gains(best)) best = m;
        rec.label = best;
    }
    return ds;
}

namespace {

double parse_double_field(const std::string& field, const std::string& path, int row) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError(path + ": row " + std::to_string(row) + ": bad number '" + field + "'");
    return value;
}

int parse_int_field(const std::string& field, const std::string& path, int row) {
    int value = 0;
    const char* first = field.data();
    const char* last = first + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError(path + ": row " + std::to_string(row) + ": bad integer '" + field + "'");
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

void save_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    const int d = ds.feature_dim();
    out << "t";
    for (int j = 0; j < d; ++j) out << ",feat_" << j;
    out << ",label\n";
    for (const auto& rec : ds.records) {
        out << rec.slot;
        for (int j = 0; j < d; ++j) out << ',' << format_double(rec.features(j));
        out << ',' << rec.label << '\n';
    }
    if (!out)
        throw IoError("write failed: " + path);
}

Dataset load_dataset_csv(const std::string& path, int num_beams) {
    if (num_beams < 1)
        throw std::invalid_argument("load_dataset_csv: need at least one beam");
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open: " + path);

    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ": empty file");
    line = strip_cr(line);
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header.front() != "t" || header.back() != "label")
        throw ParseError(path + ": expected header t,feat_0,...,label");
    const int d = static_cast<int>(header.size()) - 2;
    for (int j = 0; j < d; ++j)
        if (header[1 + j] != "feat_" + std::to_string(j))
            throw ParseError(path + ": unexpected header column '" + header[1 + j] + "'");

    Dataset ds;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != d + 2)
            throw ParseError(path + ": row " + std::to_string(row) + ": expected " +
                             std::to_string(d + 2) + " fields, got " + std::to_string(fields.size()));
        DatasetRecord rec;
        rec.slot = parse_int_field(fields[0], path, row);
        rec.features.resize(d);
        for (int j = 0; j < d; ++j) {
            rec.features(j) = parse_double_field(fields[1 + j], path, row);
            if (!std::isfinite(rec.features(j)))
                throw ParseError(path + ": row " + std::to_string(row) + ": non-finite feature");
        }
        rec.label = parse_int_field(fields[d + 1], path, row);
        if (rec.label < 0 || rec.label >= num_beams)
            throw ParseError(path + ": row " + std::to_string(row) + ": label " +
                             std::to_string(rec.label) + " outside [0, " +
                             std::to_string(num_beams) + ")");
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

void save_gains_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    const int m = ds.records.empty() ? 0 : static_cast<int>(ds.records.front().gains.size());
    out << "t";
    for (int j = 0; j < m; ++j) out << ",gain_" << j;
    out << '\n';
    for (const auto& rec : ds.records) {
        out << rec.slot;
        for (int j = 0; j < m; ++j) out << ',' << format_double(rec.gains(j));
        out << '\n';
    }
    if (!out)
        throw IoError("write failed: " + path);
}

void load_gains_csv(Dataset& ds, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open: " + path);

    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ": empty file");
    line = strip_cr(line);
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header.front() != "t")
        throw ParseError(path + ": expected header t,gain_0,...");
    const int m = static_cast<int>(header.size()) - 1;

    std::size_t idx = 0;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = strip_cr(line);
        if (line.empty()) continue;
        if (idx >= ds.records.size())
            throw ParseError(path + ": more gain rows than dataset slots");
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != m + 1)
            throw ParseError(path + ": row " + std::to_string(row) + ": expected " +
                             std::to_string(m + 1) + " fields, got " + std::to_string(fields.size()));
        auto& rec = ds.records[idx];
        if (parse_int_field(fields[0], path, row) != rec.slot)
            throw ParseError(path + ": row " + std::to_string(row) + ": slot mismatch with dataset");
        rec.gains.resize(m);
        for (int j = 0; j < m; ++j)
            rec.gains(j) = parse_double_field(fields[1 + j], path, row);
        ++idx;
    }
    if (idx != ds.records.size())
        throw ParseError(path + ": fewer gain rows than dataset slots");
}

}  // namespace beamsense
