#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cforge/cli.hpp"
#include "cforge/dataset.hpp"
#include "cforge/forge.hpp"

namespace {

namespace fs = std::filesystem;

struct CaptureOut {
    std::stringstream buf;
    std::streambuf* old;
    CaptureOut() : old(std::cout.rdbuf(buf.rdbuf())) {}
    ~CaptureOut() { std::cout.rdbuf(old); }
    std::string text() const { return buf.str(); }
};

struct CaptureErr {
    std::stringstream buf;
    std::streambuf* old;
    CaptureErr() : old(std::cerr.rdbuf(buf.rdbuf())) {}
    ~CaptureErr() { std::cerr.rdbuf(old); }
    std::string text() const { return buf.str(); }
};

fs::path temp_file(const char* name) {
    fs::path p = fs::temp_directory_path() / name;
    fs::remove(p);
    return p;
}

}  // namespace

TEST_CASE("forge writes a bounded dataset and probe fills it") {
    fs::path out = temp_file("cforge_cli_forge.json");
    CaptureOut cap;
    CaptureErr err;
    int rc = cforge::run({"forge", "--k", "2..3", "--M", "5..11", "--bits", "14", "--count",
                          "5", "--seed", "42", "--no-bias", "--out", out.string()});
    REQUIRE(rc == 0);
    auto ds = cforge::load_dataset(out.string(), cforge::LoadMode::Strict);
    CHECK(ds.records.size() <= 5);
    CHECK(ds.records.size() > 0);
    CHECK(ds.meta.seed == 42);
    for (const auto& r : ds.records) {
        CHECK(cforge::korselt_check(r.p1, r.p2, r.p3));
        CHECK_FALSE(r.lucas.has_value());
    }

    rc = cforge::run({"probe", "--in", out.string()});
    REQUIRE(rc == 0);
    auto measured = cforge::load_dataset(out.string(), cforge::LoadMode::Strict);
    for (const auto& r : measured.records) CHECK(r.lucas.has_value());
    fs::remove(out);
}

TEST_CASE("analyze prints the summarized deltas") {
    fs::path out = temp_file("cforge_cli_analyze.json");
    {
        CaptureOut cap;
        REQUIRE(cforge::run({"forge", "--k", "2..5", "--M", "2..11", "--bits", "12",
                             "--count", "8", "--seed", "7", "--no-bias", "--out",
                             out.string()}) == 0);
        REQUIRE(cforge::run({"probe", "--in", out.string()}) == 0);
    }
    CaptureOut cap;
    int rc = cforge::run({"analyze", "--in", out.string()});
    CHECK(rc == 0);
    std::string text = cap.text();
    CHECK(text.find("records: ") != std::string::npos);
    CHECK(text.find("delta") != std::string::npos);
    fs::remove(out);
}

TEST_CASE("report emits the output bundle") {
    fs::path out = temp_file("cforge_cli_report.json");
    fs::path dir = fs::temp_directory_path() / "cforge_cli_report_dir";
    fs::remove_all(dir);
    {
        CaptureOut cap;
        REQUIRE(cforge::run({"forge", "--k", "2..5", "--M", "2..11", "--bits", "12",
                             "--count", "8", "--seed", "7", "--no-bias", "--out",
                             out.string()}) == 0);
        REQUIRE(cforge::run({"probe", "--in", out.string()}) == 0);
        REQUIRE(cforge::run({"report", "--in", out.string(), "--out", dir.string()}) == 0);
    }
    CHECK(fs::exists(dir / "report.md"));
    CHECK(fs::exists(dir / "delta_hist.csv"));
    CHECK(fs::exists(dir / "delta_hist.svg"));
    CHECK(fs::exists(dir / "patterns_top15.csv"));
    CHECK(fs::exists(dir / "patterns_top15.svg"));
    CHECK(fs::exists(dir / "scatter_k.csv"));
    CHECK(fs::exists(dir / "scatter_M.csv"));
    CHECK(fs::exists(dir / "scatter_bits.csv"));
    CHECK(fs::exists(dir / "scatter.svg"));
    fs::remove(out);
    fs::remove_all(dir);
}

TEST_CASE("usage errors exit 2") {
    CaptureErr err;
    CHECK(cforge::run({}) == 2);
    CHECK(cforge::run({"frobnicate"}) == 2);
    CHECK(cforge::run({"forge"}) == 2);                       // missing --out
    CHECK(cforge::run({"forge", "--out", "x.json", "--k", "zap", "--count", "1"}) == 2);
    CHECK(cforge::run({"analyze"}) == 2);                     // missing --in
    CHECK(cforge::run({"analyze", "--in", "/nonexistent/x.json"}) == 2);
}

TEST_CASE("help exits 0") {
    CaptureOut cap;
    CHECK(cforge::run({"--help"}) == 0);
    CHECK(cforge::run({"forge", "--help"}) == 0);
}

TEST_CASE("malformed dataset names the first bad record index on exit 2") {
    fs::path out = temp_file("cforge_cli_bad.json");
    {
        CaptureOut cap;
        REQUIRE(cforge::run({"forge", "--k", "2..5", "--M", "2..11", "--bits", "12",
                             "--count", "3", "--seed", "7", "--no-bias", "--out",
                             out.string()}) == 0);
    }
    std::ifstream in(out);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    auto pos = text.find("\"k\": ");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 6, "\"k\": 9");  // break the p2 = k(p1-1)+1 identity
    {
        std::ofstream f(out, std::ios::binary | std::ios::trunc);
        f << text;
    }
    CaptureErr err;
    int rc = cforge::run({"analyze", "--in", out.string()});
    CHECK(rc == 2);
    CHECK(err.text().find("record 0") != std::string::npos);
    fs::remove(out);
}

TEST_CASE("seed falls back to the environment variable") {
    fs::path a = temp_file("cforge_cli_env_a.json");
    fs::path b = temp_file("cforge_cli_env_b.json");
    CaptureOut cap;
    setenv("COLLAPSE_FORGE_SEED", "123", 1);
    REQUIRE(cforge::run({"forge", "--k", "2..5", "--M", "2..11", "--bits", "12", "--count",
                         "5", "--no-bias", "--out", a.string()}) == 0);
    unsetenv("COLLAPSE_FORGE_SEED");
    REQUIRE(cforge::run({"forge", "--k", "2..5", "--M", "2..11", "--bits", "12", "--count",
                         "5", "--seed", "123", "--no-bias", "--out", b.string()}) == 0);
    auto da = cforge::load_dataset(a.string(), cforge::LoadMode::Strict);
    auto db = cforge::load_dataset(b.string(), cforge::LoadMode::Strict);
    CHECK(da.meta.seed == 123);
    REQUIRE(da.records.size() == db.records.size());
    for (std::size_t i = 0; i < da.records.size(); ++i)
        CHECK(da.records[i].n == db.records[i].n);
    fs::remove(a);
    fs::remove(b);
}

TEST_CASE("forge --append extends an existing dataset") {
    fs::path out = temp_file("cforge_cli_append.json");
    CaptureOut cap;
    REQUIRE(cforge::run({"forge", "--k", "2..5", "--M", "2..11", "--bits", "12", "--count",
                         "3", "--seed", "1", "--no-bias", "--out", out.string()}) == 0);
    auto first = cforge::load_dataset(out.string(), cforge::LoadMode::Strict);
    REQUIRE(cforge::run({"forge", "--k", "2..5", "--M", "2..11", "--bits", "12", "--count",
                         "2", "--seed", "2", "--no-bias", "--append", "--out",
                         out.string()}) == 0);
    auto merged = cforge::load_dataset(out.string(), cforge::LoadMode::Strict);
    CHECK(merged.records.size() == first.records.size() + 2);
    CHECK(merged.meta.seed == first.meta.seed);
    fs::remove(out);
}
