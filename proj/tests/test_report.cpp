#include "doctest.h"

#include "echlab/app.hpp"
#include "echlab/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace echlab;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("format_real") {
    CHECK(format_real(0.0) == "0");
    CHECK(format_real(-0.0) == "0");
    CHECK(format_real(0.1) == "0.1");
    CHECK(format_real(1.0 / 3) == "0.3333333333333333");
    CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_real(std::nan("")) == "nan");
    for (double x : {1e-300, 3.14159, -2.5e17, 123456789.0}) CHECK(std::stod(format_real(x)) == x);
    CHECK(format_int(-42) == "-42");
}

TEST_CASE("csv quoting") {
    Table t{"t", {"a", "b"}, {}};
    t.add_row({"1", "x,y"});
    t.add_row({"say \"hi\"", "line\nbreak"});
    CHECK(to_csv(t) == "a,b\n1,\"x,y\"\n\"say \"\"hi\"\"\",\"line\nbreak\"\n");
    CHECK_THROWS_AS(t.add_row({"only one"}), std::invalid_argument);
    CHECK_THROWS_AS(t.column("c"), UsageError);
    CHECK(t.column("b") == 1);
}

TEST_CASE("json cells become numbers when numeric") {
    Table t{"t", {"n", "s", "r"}, {}};
    t.add_row({"3", "1 1", "0.25"});
    auto j = to_json(t);
    REQUIRE(j.is_array());
    CHECK(j[0]["n"].is_number());
    CHECK(j[0]["s"] == "1 1");
    CHECK(j[0]["r"].get<double>() == 0.25);
}

TEST_CASE("svg output") {
    Table t{"t", {"x", "y", "k"}, {}};
    for (int i = 1; i <= 5; ++i) t.add_row({format_int(i), format_real(i * 0.5), i % 2 ? "odd" : "even"});
    PlotSpec spec{"demo", "x", {"y"}, "k", false, true};
    std::string a = emit_svg(t, spec), b = emit_svg(t, spec);
    CHECK(a == b);
    CHECK(a.rfind("<svg", 0) == 0);
    CHECK(a.find("</svg>") != std::string::npos);

    Table empty{"e", {"x", "y"}, {}};
    CHECK(emit_svg(empty, PlotSpec{"e", "x", {"y"}, "", false, false}).find("no data") != std::string::npos);

    Table bad{"b", {"x", "y"}, {{"1", "oops"}}};
    CHECK_THROWS_AS(emit_svg(bad, PlotSpec{"b", "x", {"y"}, "", false, false}), UsageError);
}

TEST_CASE("parse_format") {
    CHECK(parse_format("csv") == Format::Csv);
    CHECK(parse_format("json") == Format::Json);
    CHECK(parse_format("svg") == Format::Svg);
    CHECK_THROWS_AS(parse_format("xml"), UsageError);
}

TEST_CASE("run rejects unknown commands and parameters") {
    RunConfig cfg;
    cfg.command = {"twist", "spin"};
    CHECK_THROWS_AS(run(cfg), UsageError);
    cfg.command = {"partitions"};
    cfg.params = {{"colour", "red"}};
    CHECK_THROWS_AS(run(cfg), UsageError);
}

TEST_CASE("config merge keeps explicit values") {
    RunConfig cfg;
    cfg.command = {"partitions"};
    cfg.params = {{"theta", "1/3"}};
    apply_config(cfg, {{"command", "twist cd"}, {"params", {{"theta", "1/2"}, {"m", 5}}}, {"seed", 7}});
    CHECK(cfg.command == std::vector<std::string>{"partitions"});
    CHECK(cfg.params["theta"] == "1/3");
    CHECK(cfg.params.contains("m"));
    CHECK(cfg.seed == 7);

    RunConfig empty;
    apply_config(empty, {{"command", "twist calabi"}});
    CHECK(empty.command == std::vector<std::string>{"twist", "calabi"});
}

TEST_CASE("selftest bundles are byte-identical") {
    RunConfig cfg;
    cfg.command = {"selftest"};
    ReportBundle a = run(cfg), b = run(cfg);
    CHECK(a.all_pass());
    CHECK(exit_code(a) == 0);
    for (Format f : {Format::Csv, Format::Json}) CHECK(render_bundle(a, f) == render_bundle(b, f));

    auto root = std::filesystem::temp_directory_path() / "echlab_test_report";
    std::filesystem::remove_all(root);
    write_bundle(a, (root / "a").string(), Format::Json);
    write_bundle(b, (root / "b").string(), Format::Json);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(root / "a")) {
        ++files;
        CHECK(slurp(e.path()) == slurp(root / "b" / e.path().filename()));
    }
    CHECK(files >= 2);
    CHECK(std::filesystem::exists(root / "a" / "manifest.json"));
    std::filesystem::remove_all(root);
}

TEST_CASE("exit code follows verdicts") {
    ReportBundle b;
    b.verdicts.push_back({"a", true, 1, ""});
    CHECK(exit_code(b) == 0);
    b.verdicts.push_back({"b", false, -1, ""});
    CHECK(exit_code(b) == 1);
}
