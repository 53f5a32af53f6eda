#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bearing/error.hpp"
#include "bearing/ingest.hpp"
#include "bearing/synth.hpp"

using namespace bearing;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("bearing_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

synth::SynthConfig small_synth() {
    synth::SynthConfig cfg;
    cfg.sample_rate = 5120.0;
    cfg.snapshot_len = 512;
    cfg.snapshots_per_stage = {6, 6, 4, 4};
    cfg.natural_band = {600.0, 1100.0};
    cfg.seed = 11;
    return cfg;
}

} // namespace

TEST_CASE("parse_snapshot_file maps columns 5 and 6 to the channels") {
    std::istringstream text("0,0,0,0,1.0,-1.0\n0,0,0,39,1.0,-1.0\n");
    const auto snap = ingest::parse_snapshot_file(text, 7, 25600.0);
    CHECK(snap.time_index == 7);
    CHECK(snap.length() == 2);
    CHECK(snap.horizontal[0] == 1.0f);
    CHECK(snap.horizontal[1] == 1.0f);
    CHECK(snap.vertical[0] == -1.0f);
    CHECK(snap.vertical[1] == -1.0f);
}

TEST_CASE("parse_snapshot_file failure modes") {
    SUBCASE("non-numeric acceleration") {
        std::istringstream text("0,0,0,0,abc,1.0\n");
        try {
            ingest::parse_snapshot_file(text, 1, 25600.0);
            FAIL("expected MalformedRow");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::malformed_row);
            CHECK(std::string(e.what()).find("line 1") != std::string::npos);
        }
    }
    SUBCASE("too few fields") {
        std::istringstream text("0,0,0,0,1.0\n");
        CHECK_THROWS_AS(ingest::parse_snapshot_file(text, 1, 25600.0), Error);
    }
    SUBCASE("empty file") {
        std::istringstream text("");
        try {
            ingest::parse_snapshot_file(text, 1, 25600.0);
            FAIL("expected EmptyFile");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::empty_file);
        }
    }
    SUBCASE("non-finite sample") {
        std::istringstream text("0,0,0,0,inf,1.0\n");
        try {
            ingest::parse_snapshot_file(text, 1, 25600.0);
            FAIL("expected NonFiniteSample");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::non_finite_sample);
        }
    }
}

TEST_CASE("load_run orders by filename suffix, not creation order") {
    const auto dir = scratch_dir("order");
    // Created deliberately out of order.
    write_file(dir / "acc_00003.csv", "0,0,30,0,3.0,0.3\n0,0,30,39,3.5,0.3\n");
    write_file(dir / "acc_00001.csv", "0,0,10,0,1.0,0.1\n0,0,10,39,1.5,0.1\n");
    write_file(dir / "acc_00002.csv", "0,0,20,0,2.0,0.2\n0,0,20,39,2.5,0.2\n");
    write_file(dir / "notes.txt", "ignored\n");

    const auto run = ingest::load_run(dir, "b");
    REQUIRE(run.size() == 3);
    CHECK(run.snapshots[0].time_index == 1);
    CHECK(run.snapshots[1].time_index == 2);
    CHECK(run.snapshots[2].time_index == 3);
    CHECK(run.snapshots[0].horizontal[0] == 1.0f);
    CHECK(run.snapshots[2].horizontal[0] == 3.0f);
}

TEST_CASE("load_run treats a missing file as a gap, not an error") {
    const auto dir = scratch_dir("gap");
    write_file(dir / "acc_00001.csv", "0,0,0,0,1.0,0.1\n0,0,0,39,1.5,0.2\n");
    write_file(dir / "acc_00004.csv", "0,0,0,0,4.0,0.4\n0,0,0,39,4.5,0.5\n");
    const auto run = ingest::load_run(dir, "b");
    REQUIRE(run.size() == 2);
    CHECK(run.snapshots[1].time_index == 4);
    const auto report = ingest::validate_run(run);
    CHECK(report.empty());
    CHECK(report.gap_count == 2);
}

TEST_CASE("load_run rejects inconsistent snapshot lengths") {
    const auto dir = scratch_dir("inconsistent");
    write_file(dir / "acc_00001.csv", "0,0,0,0,1.0,0.1\n0,0,0,39,1.0,0.1\n");
    write_file(dir / "acc_00002.csv", "0,0,0,0,2.0,0.2\n");
    try {
        ingest::load_run(dir, "b");
        FAIL("expected InconsistentLength");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::inconsistent_length);
        CHECK(std::string(e.what()).find("acc_00002") != std::string::npos);
    }
}

TEST_CASE("load_run with no matching files") {
    const auto dir = scratch_dir("empty_dir");
    write_file(dir / "readme.md", "nothing here\n");
    try {
        ingest::load_run(dir, "b");
        FAIL("expected NoSnapshots");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::no_snapshots);
    }
}

TEST_CASE("validate_run flags duplicates, constants and mismatches") {
    auto synthetic = synth::generate_run(small_synth());
    CHECK(ingest::validate_run(synthetic.run).empty());

    SUBCASE("duplicate time index") {
        auto run = synthetic.run;
        run.snapshots[3].time_index = run.snapshots[2].time_index;
        const auto report = ingest::validate_run(run);
        REQUIRE_FALSE(report.empty());
        bool found = false;
        for (const auto& issue : report.issues)
            if (issue.kind == ingest::ValidationIssue::Kind::duplicate_time_index &&
                issue.time_index == run.snapshots[3].time_index)
                found = true;
        CHECK(found);
    }
    SUBCASE("constant snapshot") {
        auto run = synthetic.run;
        std::fill(run.snapshots[2].horizontal.begin(), run.snapshots[2].horizontal.end(), 0.0f);
        std::fill(run.snapshots[2].vertical.begin(), run.snapshots[2].vertical.end(), 0.0f);
        const auto report = ingest::validate_run(run);
        bool found = false;
        for (const auto& issue : report.issues)
            if (issue.kind == ingest::ValidationIssue::Kind::constant_signal &&
                issue.time_index == run.snapshots[2].time_index)
                found = true;
        CHECK(found);
    }
    SUBCASE("channel length mismatch") {
        auto run = synthetic.run;
        run.snapshots[1].vertical.pop_back();
        const auto report = ingest::validate_run(run);
        CHECK_FALSE(report.empty());
    }
    SUBCASE("validation never mutates the run") {
        auto run = synthetic.run;
        const auto before = run.snapshots[0].horizontal;
        (void)ingest::validate_run(run);
        CHECK(run.snapshots[0].horizontal == before);
    }
}

TEST_CASE("binary run container round-trips bit-exactly") {
    const auto dir = scratch_dir("bsr");
    const auto synthetic = synth::generate_run(small_synth());

    const fs::path first = dir / "run.bsr";
    ingest::save_run_binary(synthetic.run, first);
    const auto loaded = ingest::load_run_binary(first, "b");
    REQUIRE(loaded.size() == synthetic.run.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded.snapshots[i].horizontal == synthetic.run.snapshots[i].horizontal);
        CHECK(loaded.snapshots[i].vertical == synthetic.run.snapshots[i].vertical);
        CHECK(loaded.snapshots[i].sample_rate == synthetic.run.snapshots[i].sample_rate);
    }

    // parse -> serialize -> parse is the identity on sample values.
    const fs::path second = dir / "run2.bsr";
    ingest::save_run_binary(loaded, second);
    CHECK(slurp(first) == slurp(second));
}

TEST_CASE("binary loader rejects corrupt containers") {
    const auto dir = scratch_dir("bsr_bad");
    const auto synthetic = synth::generate_run(small_synth());
    const fs::path path = dir / "run.bsr";
    ingest::save_run_binary(synthetic.run, path);

    SUBCASE("bad magic") {
        auto bytes = slurp(path);
        bytes[0] = 'X';
        write_file(path, bytes);
        try {
            ingest::load_run_binary(path);
            FAIL("expected CorruptFile");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::corrupt_file);
        }
    }
    SUBCASE("truncated payload") {
        auto bytes = slurp(path);
        bytes.resize(bytes.size() - 7);
        write_file(path, bytes);
        CHECK_THROWS_AS(ingest::load_run_binary(path), Error);
    }
}

TEST_CASE("a full-rate femto file parses to 2560 samples") {
    synth::SynthConfig cfg;  // defaults: 25,600 Hz, 2560 samples per snapshot
    cfg.snapshots_per_stage = {1, 1, 1, 1};
    cfg.seed = 9;
    const auto synthetic = synth::generate_run(cfg);
    std::ostringstream text;
    ingest::write_snapshot_csv(text, synthetic.run.snapshots[0]);
    std::istringstream in(text.str());
    const auto snap = ingest::parse_snapshot_file(in, 1, 25600.0);
    CHECK(snap.length() == 2560);
    CHECK(snap.horizontal == synthetic.run.snapshots[0].horizontal);
}

TEST_CASE("femto csv export parses back to the same samples") {
    const auto dir = scratch_dir("csv_roundtrip");
    const auto synthetic = synth::generate_run(small_synth());
    synth::write_femto_dataset(synthetic, dir);

    const auto run = ingest::load_run(dir, "", small_synth().sample_rate);
    REQUIRE(run.size() == synthetic.run.size());
    for (std::size_t i = 0; i < run.size(); ++i) {
        CHECK(run.snapshots[i].horizontal == synthetic.run.snapshots[i].horizontal);
        CHECK(run.snapshots[i].vertical == synthetic.run.snapshots[i].vertical);
    }
}
