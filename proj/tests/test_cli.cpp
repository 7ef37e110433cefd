#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "packwise/text.hpp"
#include "packwise/workload.hpp"

namespace fs = std::filesystem;
using packwise::read_file;
using packwise::write_file;

namespace {

const fs::path& workdir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "packwise_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Runs the binary with stdout/stderr captured into workdir()/last.{out,err}.
int cli(const std::string& args) {
    const auto out = workdir() / "last.out", err = workdir() / "last.err";
    const std::string cmd = std::string(PACKWISE_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string last_err() { return read_file(workdir() / "last.err"); }

std::string dir(const std::string& name) { return (workdir() / name).string(); }

const std::string kFast = "--generations 60 --population 30 --restarts 5";

// Trace, catalogs and a table under workdir()/base, built once.
const std::string& base() {
    static const std::string b = [] {
        const auto d = dir("base");
        REQUIRE(cli("--seed 1 --out " + d + " gen --emit-catalogs") == 0);
        REQUIRE(cli(kFast + " --out " + d + " build --trace " + d + "/trace.csv --catalog " + d +
                    "/catalog.csv --vms " + d + "/vms.csv") == 0);
        return d;
    }();
    return b;
}

std::string inputs(const std::string& trace) {
    return "--trace " + trace + " --catalog " + base() + "/catalog.csv --vms " + base() + "/vms.csv";
}

std::vector<std::vector<std::string>> csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    const auto content = read_file(p);
    for (auto line : packwise::text::lines(content)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        for (auto f : packwise::text::split(line, ',')) row.emplace_back(f);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("gen writes the requested trace deterministically") {
    const auto a = dir("gen_a"), b = dir("gen_b");
    CHECK(cli("--seed 1 --out " + a + " gen --services 5 --periods 100 --modes 10") == 0);
    CHECK(cli("--seed 1 --out " + b + " gen --services 5 --periods 100 --modes 10") == 0);
    const auto rows = csv(fs::path(a) / "trace.csv");
    REQUIRE(rows.size() == 101);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].size() == 5);
    CHECK(read_file(fs::path(a) / "trace.csv") == read_file(fs::path(b) / "trace.csv"));
    CHECK(cli("--seed 2 --out " + b + " gen") == 0);
    CHECK(read_file(fs::path(a) / "trace.csv") != read_file(fs::path(b) / "trace.csv"));
}

TEST_CASE("usage errors exit nonzero without a stack trace") {
    CHECK(cli("--out " + dir("zero") + " gen --periods 0") != 0);
    CHECK(last_err().find("usage error") != std::string::npos);
    CHECK(last_err().find("terminate") == std::string::npos);
    CHECK(cli("") != 0);
    CHECK(cli("frobnicate") != 0);
    CHECK(cli("gen --no-such-flag") != 0);
    CHECK(cli("--fallback sideways gen") != 0);
    CHECK(cli("build --trace missing.csv --catalog missing.csv --vms missing.csv") == 1);
    CHECK(last_err().find("does not exist") != std::string::npos);
    for (const char* sub : {"", "gen ", "build ", "run ", "compare ", "inspect-table "})
        CHECK(cli(std::string(sub) + "--help") == 0);
}

TEST_CASE("build writes the table and reports") {
    const auto& d = base();
    for (const char* f : {"table.json", "offline_report.csv", "index_kmeans.csv", "index_ahc.csv", "dendrogram.csv",
                          "representatives.csv"})
        CHECK(fs::exists(fs::path(d) / f));
    const auto table = nlohmann::json::parse(read_file(fs::path(d) / "table.json"));
    CHECK(table.at("version") == "packwise-table-v1");
    CHECK(table.at("entries").size() == 10);
    CHECK(csv(fs::path(d) / "offline_report.csv").size() == 11);
    CHECK(csv(fs::path(d) / "index_kmeans.csv").size() == 15);
    CHECK(csv(fs::path(d) / "dendrogram.csv").size() == 100);
    CHECK(cli("inspect-table " + d + "/table.json") == 0);
    CHECK(read_file(workdir() / "last.out").find("entries        10") != std::string::npos);
}

TEST_CASE("build error exits with 2") {
    CHECK(cli("--k-max 200 --out " + dir("bad_build") + " build " + inputs(base() + "/trace.csv")) == 2);
    CHECK(last_err().find("build error") != std::string::npos);
}

TEST_CASE("run on the training distribution hits") {
    const auto out = dir("run_train");
    CHECK(cli("--out " + out + " run " + inputs(base() + "/trace.csv") + " --table " + base() + "/table.json") == 0);
    const auto summary = csv(fs::path(out) / "simulation_summary.csv");
    REQUIRE(summary.size() == 8);
    CHECK(summary[3][0] == "hit_rate");
    CHECK(std::stod(summary[3][1]) >= 0.99);
    CHECK(csv(fs::path(out) / "simulation.csv").size() == 101);
}

TEST_CASE("fingerprint mismatch exits with 3") {
    auto vms = read_file(fs::path(base()) / "vms.csv");
    vms.replace(vms.find("0.1\n"), 4, "0.2\n");
    write_file(workdir() / "other_vms.csv", vms);
    const std::string args = "--trace " + base() + "/trace.csv --catalog " + base() + "/catalog.csv --vms " +
                             dir("other_vms.csv") + " --table " + base() + "/table.json";
    CHECK(cli("--out " + dir("mismatch") + " run " + args) == 3);
    CHECK(cli("--out " + dir("mismatch") + " compare " + args) == 3);
    CHECK(cli("inspect-table " + base() + "/table.json --catalog " + base() + "/catalog.csv --vms " +
              dir("other_vms.csv")) == 3);
}

TEST_CASE("fallback policy changes only the source column") {
    // different planted centers make many of these periods miss
    const auto novel = dir("novel");
    REQUIRE(cli("--seed 9 --out " + novel + " gen --catalog " + base() + "/catalog.csv") == 0);
    const auto g = dir("fb_greedy"), n = dir("fb_nearest");
    const std::string common = " run " + inputs(novel + "/trace.csv") + " --table " + base() + "/table.json";
    CHECK(cli("--buffer 1000 --fallback greedy --out " + g + common) == 0);
    CHECK(cli("--buffer 1000 --fallback=nearest --out " + n + common) == 0);
    const auto a = csv(fs::path(g) / "simulation.csv"), b = csv(fs::path(n) / "simulation.csv");
    REQUIRE(a.size() == b.size());
    std::size_t differ = 0;
    for (std::size_t i = 1; i < a.size(); ++i) {
        CHECK(a[i][3] == b[i][3]);
        if (a[i][3] == "0") {
            CHECK(a[i][4] == "fallback");
            CHECK(b[i][4] == "nearest");
        }
        differ += a[i][4] != b[i][4];
    }
    CHECK(differ > 0);
}

TEST_CASE("compare emits one row per period plus totals") {
    const auto out = dir("compare");
    CHECK(cli(kFast + " --out " + out + " compare " + inputs(base() + "/trace.csv") + " --table " + base() +
              "/table.json") == 0);
    const auto rows = csv(fs::path(out) / "comparison.csv");
    REQUIRE(rows.size() == 102);
    CHECK(rows[0] == std::vector<std::string>{"period", "pipeline", "per_period_ga", "first_fit", "best_fit", "static_peak"});
    CHECK(rows.back()[0] == "total");
    for (std::size_t col = 1; col < 6; ++col) {
        double sum = 0;
        for (std::size_t i = 1; i + 1 < rows.size(); ++i) sum += std::stod(rows[i][col]);
        CHECK(std::stod(rows.back()[col]) == doctest::Approx(sum).epsilon(1e-4));
    }
    write_file(workdir() / "empty_trace.csv", "# services=5 period_seconds=600\n");
    CHECK(cli("--out " + out + " compare " + inputs(dir("empty_trace.csv")) + " --table " + base() + "/table.json") == 1);
}

TEST_CASE("config file values sit between defaults and flags") {
    write_file(workdir() / "seed3.cfg", "# comment\nseed=3\n");
    const auto viacfg = dir("cfg_a"), viaflag = dir("cfg_b"), both = dir("cfg_c"), plain = dir("cfg_d");
    CHECK(cli("--config " + dir("seed3.cfg") + " --out " + viacfg + " gen --periods 5") == 0);
    CHECK(cli("--seed 3 --out " + viaflag + " gen --periods 5") == 0);
    CHECK(cli("--config " + dir("seed3.cfg") + " --seed 1 --out " + both + " gen --periods 5") == 0);
    CHECK(cli("--out " + plain + " gen --periods 5") == 0);
    const auto t = [](const std::string& d) { return read_file(fs::path(d) / "trace.csv"); };
    CHECK(t(viacfg) == t(viaflag));
    CHECK(t(both) == t(plain));
    CHECK(t(both) != t(viacfg));
    write_file(workdir() / "typo.cfg", "sead=3\n");
    CHECK(cli("--config " + dir("typo.cfg") + " --out " + plain + " gen --periods 5") != 0);
}

TEST_CASE("build and run are byte-identical across invocations") {
    const auto a = dir("det_a"), b = dir("det_b");
    for (const auto& d : {a, b}) {
        REQUIRE(cli(kFast + " --seed 4 --out " + d + " build " + inputs(base() + "/trace.csv")) == 0);
        REQUIRE(cli(kFast + " --seed 4 --out " + d + " run " + inputs(base() + "/trace.csv") + " --table " + d +
                    "/table.json") == 0);
    }
    for (const char* f : {"table.json", "offline_report.csv", "index_kmeans.csv", "index_ahc.csv", "dendrogram.csv",
                          "representatives.csv", "simulation.csv", "simulation_summary.csv"})
        CHECK(read_file(fs::path(a) / f) == read_file(fs::path(b) / f));
}

TEST_CASE("a fresh trace from the same modes hits the table") {
    const auto fresh = dir("fresh");
    REQUIRE(cli("--seed 1 --out " + fresh + " gen --noise-seed 99") == 0);
    CHECK(read_file(fs::path(fresh) / "trace.csv") != read_file(fs::path(base()) / "trace.csv"));
    const auto out = dir("run_fresh");
    CHECK(cli("--out " + out + " run " + inputs(fresh + "/trace.csv") + " --table " + base() + "/table.json") == 0);
    const auto summary = csv(fs::path(out) / "simulation_summary.csv");
    REQUIRE(summary.size() == 8);
    CHECK(std::stod(summary[3][1]) >= 0.99);
}
