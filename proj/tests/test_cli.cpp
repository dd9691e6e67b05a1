#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "satbasin/reference_systems.hpp"
#include "support/test_support.hpp"

using namespace satbasin;
using satbasin::testing::run_command;
using satbasin::testing::schema_mismatch;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string cli = SATBASIN_CLI_PATH;
const fs::path schema_dir = SATBASIN_SCHEMA_DIR;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("satbasin_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

json load_schema(const std::string& name) {
    std::ifstream in(schema_dir / name);
    REQUIRE(in.good());
    return json::parse(in);
}

std::string write_reference_system(const fs::path& dir) {
    const fs::path path = dir / "reference_system.json";
    std::ofstream out(path);
    out << counterexample_3d_json();
    return path.string();
}

}  // namespace

TEST_CASE("generate emits a valid, reproducible system file") {
    TempDir tmp;
    const auto first = run_command(cli + " generate --n 3 --seed 42");
    CHECK(first.exit_code == 0);
    const auto second = run_command(cli + " generate --n 3 --seed 42");
    CHECK(first.output == second.output);

    const json parsed = json::parse(first.output);
    CHECK(schema_mismatch(load_schema("system.schema.json"), parsed).empty());
    CHECK(parsed["n"] == 3);
    CHECK(parsed["m"] == 1);
}

TEST_CASE("validate command") {
    TempDir tmp;
    const std::string system = write_reference_system(tmp.path);
    const auto result = run_command(cli + " validate --system " + system);
    CHECK(result.exit_code == 0);
    const json doc = json::parse(result.output);
    CHECK(schema_mismatch(load_schema("validate_output.schema.json"), doc).empty());
    CHECK(doc["validation"]["all_ok"] == true);
    CHECK(doc["config"]["command"] == "validate");

    // A non-Hurwitz gain flips the exit code to a check failure.
    json broken = json::parse(testing::read_file(system));
    broken["K"] = json::array({json::array({0.0, 0.0, 0.0})});
    const fs::path bad_path = tmp.path / "broken.json";
    std::ofstream(bad_path) << broken.dump();
    const auto bad = run_command(cli + " validate --system " + bad_path.string());
    CHECK(bad.exit_code == 1);
}

TEST_CASE("equilibria command lists the three roots with indices") {
    TempDir tmp;
    const std::string system = write_reference_system(tmp.path);
    const auto result = run_command(cli + " equilibria --system " + system);
    CHECK(result.exit_code == 0);
    const json doc = json::parse(result.output);
    CHECK(schema_mismatch(load_schema("equilibria_output.schema.json"), doc).empty());
    const auto& eqs = doc["result"]["equilibria"];
    REQUIRE(eqs.size() == 3);
    CHECK(eqs[0]["index"] == 1);
    CHECK(eqs[1]["index"] == -1);
    CHECK(eqs[2]["index"] == 1);
    CHECK(doc["parity"]["pass"] == true);
}

TEST_CASE("degree command at a pinned radius") {
    TempDir tmp;
    const std::string system = write_reference_system(tmp.path);
    const auto result = run_command(cli + " degree --system " + system + " --radius 1.5");
    CHECK(result.exit_code == 0);
    const json doc = json::parse(result.output);
    CHECK(schema_mismatch(load_schema("degree_output.schema.json"), doc).empty());
    CHECK(doc["degree"]["value"] == 1);
    CHECK(doc["degree"]["solutions"].size() == 3);
    CHECK(doc["index_sum"]["pass"] == true);
    CHECK(doc["config"]["radius"] == 1.5);
}

TEST_CASE("fate command classifies the bundled outside point") {
    TempDir tmp;
    const std::string system = write_reference_system(tmp.path);
    const auto result =
        run_command(cli + " fate --system " + system + " --x ' -0.283356,-0.335251,-0.003430'");
    CHECK(result.exit_code == 0);
    const json doc = json::parse(result.output);
    CHECK(schema_mismatch(load_schema("fate_output.schema.json"), doc).empty());
    CHECK(doc["fate"]["verdict"] == "not_converged");
    CHECK(doc["config"]["t_max"] == 100.0);
}

TEST_CASE("scan command brackets the boundary along a ray") {
    TempDir tmp;
    const std::string system = write_reference_system(tmp.path);
    const auto result = run_command(cli + " scan --system " + system + " --x 0,0,1");
    CHECK(result.exit_code == 0);
    const json doc = json::parse(result.output);
    CHECK(schema_mismatch(load_schema("scan_output.schema.json"), doc).empty());
    CHECK(doc["scan"]["width_ok"] == true);
    CHECK(doc["scan"]["r_lo"].get<double>() < doc["scan"]["r_hi"].get<double>());
}

TEST_CASE("convexity command always probes the reference triple") {
    TempDir tmp;
    const std::string system = write_reference_system(tmp.path);
    const auto result =
        run_command(cli + " convexity --system " + system + " --trials 2 --seed 9");
    CHECK(result.exit_code == 0);
    const json doc = json::parse(result.output);
    CHECK(schema_mismatch(load_schema("convexity_output.schema.json"), doc).empty());
    CHECK(doc["convexity"]["contains_reference_triple"] == true);
}

TEST_CASE("output lands in --out when requested") {
    TempDir tmp;
    const std::string system = write_reference_system(tmp.path);
    const fs::path out = tmp.path / "validation.json";
    const auto result =
        run_command(cli + " validate --system " + system + " --out " + out.string());
    CHECK(result.exit_code == 0);
    const json doc = json::parse(testing::read_file(out.string()));
    CHECK(doc["validation"]["all_ok"] == true);
}

TEST_CASE("usage and parse failures exit with 2") {
    TempDir tmp;
    const std::string system = write_reference_system(tmp.path);

    CHECK(run_command(cli + " validate --system /nonexistent.json").exit_code == 2);
    CHECK(run_command(cli + " validate").exit_code == 2);            // missing required flag
    CHECK(run_command(cli + " no-such-command").exit_code == 2);
    CHECK(run_command(cli + " validate --system " + system + " --bogus 1").exit_code == 2);
    CHECK(run_command(cli + " fate --system " + system + " --x 0,0").exit_code == 2);  // dimension

    const fs::path malformed = tmp.path / "malformed.json";
    std::ofstream(malformed) << "{\"n\": 3, \"m\": ";
    const auto bad = run_command(cli + " validate --system " + malformed.string());
    CHECK(bad.exit_code == 2);
    CHECK(bad.output.find("error") != std::string::npos);

    const fs::path wrong_shape = tmp.path / "wrong_shape.json";
    std::ofstream(wrong_shape) << R"({"n": 3, "m": 1, "A": [[1]], "B": [[1]], "K": [[1]], "M": 1.0})";
    CHECK(run_command(cli + " validate --system " + wrong_shape.string()).exit_code == 2);
}

TEST_CASE("help exits cleanly") {
    CHECK(run_command(cli + " --help").exit_code == 0);
    CHECK(run_command(cli + " fate --help").exit_code == 0);
}

TEST_CASE("reproduce-paper writes a passing bundle") {
    TempDir tmp;
    const fs::path bundle = tmp.path / "bundle";
    const auto result =
        run_command(cli + " reproduce-paper --rays 16 --out " + bundle.string());
    CHECK(result.exit_code == 0);
    CHECK(fs::exists(bundle / "summary.json"));
    CHECK(fs::exists(bundle / "point_cloud.csv"));
    CHECK(fs::exists(bundle / "system.json"));
    CHECK(fs::exists(bundle / "traj_p1.csv"));
    CHECK(fs::exists(bundle / "traj_p2.csv"));
    CHECK(fs::exists(bundle / "traj_p3.csv"));

    const json summary = json::parse(testing::read_file((bundle / "summary.json").string()));
    CHECK(summary["pass"] == true);
    CHECK(summary["fates"]["p1"]["verdict"] == "converged_to_origin");
    CHECK(summary["fates"]["p3"]["verdict"] == "not_converged");
    CHECK(summary["mismatches"].empty());

    // The embedded system file matches the documented schema.
    const json system = json::parse(testing::read_file((bundle / "system.json").string()));
    CHECK(schema_mismatch(load_schema("system.schema.json"), system).empty());
}
