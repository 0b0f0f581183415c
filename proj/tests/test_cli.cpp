#include "doctest.h"

#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int rc = -1;
    std::string out;
};

Result echlab(const std::string& args) {
    std::string cmd = std::string(ECHLAB_BIN) + " " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int status = pclose(p);
    r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string data(const std::string& name) { return std::string(ECHLAB_SOURCE_DIR) + "/tests/data/" + name; }

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("echlab_cli_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(echlab("").rc == 2);
    CHECK(echlab("bogus").rc == 2);
    CHECK(echlab("twist").rc == 2);
    CHECK(echlab("partitions --colour red").rc == 2);
    CHECK(echlab("partitions --theta 1/3 --m 2 --format xml").rc == 2);
    CHECK(echlab("score --input /nonexistent/tower.json").rc == 2);
    CHECK(echlab("--config /nonexistent.json selftest").rc == 2);
}

TEST_CASE("help and version exit 0") {
    CHECK(echlab("--help").rc == 0);
    Result v = echlab("--version");
    CHECK(v.rc == 0);
    CHECK(v.out.find("echlab") != std::string::npos);
}

TEST_CASE("partitions csv example") {
    Result r = echlab("partitions --theta 7/10 --m 2");
    CHECK(r.rc == 0);
    CHECK(r.out == "theta,m,p_plus,p_minus,cz,disjoint,one_exclusive,small_count\n7/10,2,2,1 1,3,1,1,1\n");
}

TEST_CASE("partitions json example") {
    Result r = echlab("partitions --theta 1/5 --m 4 --format json");
    REQUIRE(r.rc == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["data"]["p_plus"] == nlohmann::json({1, 1, 1, 1}));
    CHECK(j["data"]["p_minus"] == nlohmann::json({4}));
    CHECK(j["data"]["cz"] == 1);
    CHECK(j["all_pass"] == true);
}

TEST_CASE("tower and score on the sample file") {
    CHECK(echlab("tower --input " + data("tower_small.json")).rc == 0);
    Result s = echlab("score --input " + data("tower_small.json") + " --format json");
    CHECK(s.rc == 0);
    CHECK(nlohmann::json::parse(s.out).contains("verdicts"));
}

TEST_CASE("failing verdicts exit 1") {
    // Window 0 of the brute-force scan contains curves with T < 0.
    CHECK(echlab("score --scan --max-mult 2").rc == 1);
}

TEST_CASE("config file supplies the command and parameters") {
    fs::path dir = scratch("config");
    fs::create_directories(dir);
    fs::path cfg = dir / "run.json";
    std::ofstream(cfg) << R"({"command": "partitions", "params": {"theta": "7/10", "m": 2}})";
    Result a = echlab("--config " + cfg.string());
    CHECK(a.rc == 0);
    CHECK(a.out == echlab("partitions --theta 7/10 --m 2").out);
    // Command-line values win over the file.
    Result b = echlab("--config " + cfg.string() + " partitions --theta 1/5 --m 4");
    CHECK(b.out.find("1/5,4") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("bundles are deterministic") {
    fs::path a = scratch("a"), b = scratch("b");
    REQUIRE(echlab("--out " + a.string() + " --format json twist calabi --profile lin:1").rc == 0);
    REQUIRE(echlab("--out " + b.string() + " --format json twist calabi --profile lin:1").rc == 0);
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        ++n;
        std::ifstream x(e.path(), std::ios::binary), y(b / e.path().filename(), std::ios::binary);
        std::stringstream sx, sy;
        sx << x.rdbuf();
        sy << y.rdbuf();
        CHECK(sx.str() == sy.str());
    }
    CHECK(n >= 2);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("svg output is a document") {
    Result r = echlab("--format svg ellipsoid weyl --a 1 --b sqrt2 --kmax 2000");
    CHECK(r.out.rfind("<svg", 0) == 0);
}

TEST_CASE("cache directory from the environment") {
    fs::path dir = scratch("cache");
    std::string env = "ECHLAB_CACHE_DIR=" + dir.string() + " ";
    std::string cmd = env + ECHLAB_BIN + " ellipsoid spectrum --a 1 --b sqrt2 --count 50 >/dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir));
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".bin";
    CHECK(n == 1);
    CHECK(std::system(cmd.c_str()) == 0);
    fs::remove_all(dir);
}
