#include "bearing/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "bearing/error.hpp"

namespace fs = std::filesystem;

namespace bearing::ingest {

namespace {

bool parse_double(std::string_view field, double& out) {
    // Trim surrounding whitespace; FEMTO files occasionally pad fields.
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
        field.remove_suffix(1);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    if (field.empty()) return false;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

// Extract the numeric suffix from names like acc_00042.csv. Returns -1 when
// the name does not match the accelerometer file pattern.
std::int64_t acc_file_index(const std::string& name) {
    if (name.rfind("acc", 0) != 0) return -1;
    auto dot = name.find_last_of('.');
    if (dot == std::string::npos || name.substr(dot) != ".csv") return -1;
    std::size_t i = 3;
    while (i < dot && !(name[i] >= '0' && name[i] <= '9')) ++i;
    if (i == dot) return -1;
    std::int64_t value = 0;
    for (; i < dot; ++i) {
        if (!(name[i] >= '0' && name[i] <= '9')) return -1;
        value = value * 10 + (name[i] - '0');
    }
    return value;
}

void append_le(std::string& buf, const void* p, std::size_t n) {
    buf.append(static_cast<const char*>(p), n);
}

bool channel_is_constant(const std::vector<float>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] != v[0]) return false;
    return true;
}

} // namespace

VibrationSnapshot parse_snapshot_file(std::istream& text, std::int64_t time_index,
                                      double sample_rate) {
    if (sample_rate <= 0.0)
        throw Error(Errc::invalid_argument, "sample_rate must be positive");

    VibrationSnapshot snap;
    snap.time_index = time_index;
    snap.sample_rate = sample_rate;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(text, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        // Split on commas; need at least 6 fields, acceleration in 5 and 6.
        std::array<std::string_view, 6> fields;
        std::size_t found = 0;
        std::string_view rest(line);
        while (found < 6) {
            auto comma = rest.find(',');
            fields[found++] = rest.substr(0, comma);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (found < 6)
            throw Error(Errc::malformed_row, "line " + std::to_string(line_no) +
                                                 ": expected at least 6 comma-separated fields");

        double values[6];
        for (std::size_t i = 0; i < 6; ++i) {
            if (!parse_double(fields[i], values[i]))
                throw Error(Errc::malformed_row,
                            "line " + std::to_string(line_no) + ": field " + std::to_string(i + 1) +
                                " is not a number");
        }
        if (!std::isfinite(values[4]) || !std::isfinite(values[5]))
            throw Error(Errc::non_finite_sample, "line " + std::to_string(line_no));

        float h = static_cast<float>(values[4]);
        float v = static_cast<float>(values[5]);
        if (!std::isfinite(h) || !std::isfinite(v))
            throw Error(Errc::non_finite_sample,
                        "line " + std::to_string(line_no) + ": overflows float32");
        snap.horizontal.push_back(h);
        snap.vertical.push_back(v);
    }

    if (snap.horizontal.empty()) throw Error(Errc::empty_file, "no sample rows");
    return snap;
}

void write_snapshot_csv(std::ostream& out, const VibrationSnapshot& snapshot,
                        double seconds_between_snapshots) {
    const double t0 = static_cast<double>(snapshot.time_index) * seconds_between_snapshots;
    const long hour = static_cast<long>(t0 / 3600.0);
    const long minute = static_cast<long>(t0 / 60.0) % 60;
    const long second = static_cast<long>(t0) % 60;
    char buf[96];
    for (std::size_t i = 0; i < snapshot.length(); ++i) {
        const long micros = static_cast<long>(std::llround(
            1e6 * static_cast<double>(i) / snapshot.sample_rate));
        // %.9g: enough digits for float32 samples to round-trip through text.
        std::snprintf(buf, sizeof buf, "%ld,%ld,%ld,%ld,%.9g,%.9g\n", hour, minute, second, micros,
                      static_cast<double>(snapshot.horizontal[i]),
                      static_cast<double>(snapshot.vertical[i]));
        out << buf;
    }
}

BearingRun load_run(const fs::path& directory, const std::string& bearing_id, double sample_rate) {
    fs::path dir = directory;
    if (!fs::is_directory(dir)) throw Error(Errc::io_error, "not a directory: " + dir.string());
    // Accept either the bearing directory itself or the dataset root.
    if (!bearing_id.empty() && fs::is_directory(dir / bearing_id)) dir /= bearing_id;

    std::vector<std::pair<std::int64_t, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::int64_t idx = acc_file_index(entry.path().filename().string());
        if (idx >= 0) files.emplace_back(idx, entry.path());
    }
    if (files.empty()) throw Error(Errc::no_snapshots, "no acc_*.csv files in " + dir.string());

    // Explicit sort: directory enumeration order must not matter.
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    BearingRun run;
    run.bearing_id = bearing_id.empty() ? dir.filename().string() : bearing_id;
    run.snapshots.reserve(files.size());
    for (const auto& [idx, path] : files) {
        std::ifstream in(path);
        if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
        VibrationSnapshot snap;
        try {
            snap = parse_snapshot_file(in, idx, sample_rate);
        } catch (const Error& e) {
            throw Error(e.code(), path.filename().string() + ": " + e.what());
        }
        if (!run.snapshots.empty() && snap.length() != run.snapshots.front().length())
            throw Error(Errc::inconsistent_length,
                        path.filename().string() + ": " + std::to_string(snap.length()) +
                            " samples, expected " + std::to_string(run.snapshots.front().length()));
        run.snapshots.push_back(std::move(snap));
    }
    return run;
}

ValidationReport validate_run(const BearingRun& run) {
    ValidationReport report;
    report.snapshot_count = run.snapshots.size();

    const std::size_t expected_len =
        run.snapshots.empty() ? 0 : run.snapshots.front().length();
    std::int64_t prev_index = 0;
    bool have_prev = false;

    for (const auto& snap : run.snapshots) {
        if (have_prev) {
            if (snap.time_index == prev_index)
                report.issues.push_back({ValidationIssue::Kind::duplicate_time_index,
                                         snap.time_index, "duplicate time index"});
            else if (snap.time_index < prev_index)
                report.issues.push_back({ValidationIssue::Kind::unordered_time_index,
                                         snap.time_index, "time index out of order"});
            else if (snap.time_index > prev_index + 1)
                report.gap_count += static_cast<std::size_t>(snap.time_index - prev_index - 1);
        }
        prev_index = snap.time_index;
        have_prev = true;

        if (snap.horizontal.size() != snap.vertical.size())
            report.issues.push_back({ValidationIssue::Kind::channel_length_mismatch,
                                     snap.time_index, "horizontal and vertical lengths differ"});
        if (snap.length() != expected_len)
            report.issues.push_back({ValidationIssue::Kind::inconsistent_length, snap.time_index,
                                     std::to_string(snap.length()) + " samples, expected " +
                                         std::to_string(expected_len)});
        if (snap.length() < 2)
            report.issues.push_back(
                {ValidationIssue::Kind::short_snapshot, snap.time_index, "fewer than 2 samples"});
        if (snap.sample_rate <= 0.0)
            report.issues.push_back(
                {ValidationIssue::Kind::bad_sample_rate, snap.time_index, "sample rate <= 0"});
        else if (std::fabs(snap.sample_rate - run.snapshots.front().sample_rate) > 0.0)
            report.issues.push_back({ValidationIssue::Kind::bad_sample_rate, snap.time_index,
                                     "sample rate differs from first snapshot"});
        if (snap.length() >= 2 &&
            (channel_is_constant(snap.horizontal) || channel_is_constant(snap.vertical)))
            report.issues.push_back(
                {ValidationIssue::Kind::constant_signal, snap.time_index, "constant channel"});
    }

    if (run.labels && run.labels->size() != run.snapshots.size())
        report.issues.push_back({ValidationIssue::Kind::missing_labels, -1,
                                 "label count does not match snapshot count"});
    return report;
}

std::string report_to_text(const ValidationReport& report) {
    std::ostringstream out;
    out << "snapshots: " << report.snapshot_count << "\n";
    out << "gaps: " << report.gap_count << "\n";
    out << "issues: " << report.issues.size() << "\n";
    for (const auto& issue : report.issues) {
        out << "  [";
        switch (issue.kind) {
            case ValidationIssue::Kind::duplicate_time_index: out << "duplicate"; break;
            case ValidationIssue::Kind::unordered_time_index: out << "unordered"; break;
            case ValidationIssue::Kind::inconsistent_length: out << "length"; break;
            case ValidationIssue::Kind::channel_length_mismatch: out << "channels"; break;
            case ValidationIssue::Kind::constant_signal: out << "constant"; break;
            case ValidationIssue::Kind::bad_sample_rate: out << "sample-rate"; break;
            case ValidationIssue::Kind::short_snapshot: out << "short"; break;
            case ValidationIssue::Kind::missing_labels: out << "labels"; break;
        }
        out << "] time_index=" << issue.time_index << " " << issue.detail << "\n";
    }
    return out.str();
}

void save_run_binary(const BearingRun& run, const fs::path& path) {
    if (run.snapshots.empty()) throw Error(Errc::no_snapshots, "empty run");
    const std::uint32_t n = static_cast<std::uint32_t>(run.snapshots.front().length());
    const double rate = run.snapshots.front().sample_rate;

    std::string buf;
    buf.reserve(16 + run.snapshots.size() * n * 8);
    buf.append("BSR1", 4);
    append_le(buf, &n, 4);
    append_le(buf, &rate, 8);
    for (const auto& snap : run.snapshots) {
        if (snap.length() != n || snap.vertical.size() != n)
            throw Error(Errc::inconsistent_length,
                        "snapshot " + std::to_string(snap.time_index));
        append_le(buf, snap.horizontal.data(), n * sizeof(float));
        append_le(buf, snap.vertical.data(), n * sizeof(float));
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error(Errc::io_error, "short write to " + path.string());
}

BearingRun load_run_binary(const fs::path& path, const std::string& bearing_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < 16 || data.compare(0, 4, "BSR1") != 0)
        throw Error(Errc::corrupt_file, path.string() + ": bad magic");
    std::uint32_t n = 0;
    double rate = 0.0;
    std::memcpy(&n, data.data() + 4, 4);
    std::memcpy(&rate, data.data() + 8, 8);
    if (n < 2 || rate <= 0.0) throw Error(Errc::corrupt_file, path.string() + ": bad header");

    const std::size_t block = static_cast<std::size_t>(n) * 2 * sizeof(float);
    const std::size_t payload = data.size() - 16;
    if (payload == 0 || payload % block != 0)
        throw Error(Errc::corrupt_file, path.string() + ": truncated snapshot block");

    BearingRun run;
    run.bearing_id = bearing_id.empty() ? path.stem().string() : bearing_id;
    const std::size_t count = payload / block;
    run.snapshots.resize(count);
    const char* p = data.data() + 16;
    for (std::size_t i = 0; i < count; ++i) {
        auto& snap = run.snapshots[i];
        snap.time_index = static_cast<std::int64_t>(i) + 1;
        snap.sample_rate = rate;
        snap.horizontal.resize(n);
        snap.vertical.resize(n);
        std::memcpy(snap.horizontal.data(), p, n * sizeof(float));
        p += n * sizeof(float);
        std::memcpy(snap.vertical.data(), p, n * sizeof(float));
        p += n * sizeof(float);
    }
    return run;
}

} // namespace bearing::ingest
