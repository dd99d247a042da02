#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "depthinit/report.hpp"

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int exit_code = -1;
    std::string stdout_text;
};

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "depthinit_cli_tests";
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const fs::path out = work_dir() / "stdout.txt";
    std::ostringstream command;
    command << env_prefix << DEPTHINIT_CLI_PATH << " " << args << " > " << out.string()
            << " 2> " << (work_dir() / "stderr.txt").string();
    const int status = std::system(command.str().c_str());
    CliResult result;
    result.exit_code = WEXITSTATUS(status);
    std::ifstream in(out);
    std::ostringstream text;
    text << in.rdbuf();
    result.stdout_text = text.str();
    return result;
}

std::string tiny_train_args() {
    return "--layers 3 --width 16 --data synthetic --samples 96 --dims 8 --classes 3 "
           "--separation 4 --data-seed 5 --epochs 3 --lr 0.05 --batch 32 --seed 9";
}

} // namespace

TEST_CASE("solve-k prints K and the verified gain product") {
    const CliResult r = run_cli("solve-k --layers 2 --width 64 --variance 1");
    REQUIRE(r.exit_code == 0);
    const json report = json::parse(r.stdout_text);
    CHECK(report.at("K").get<double>() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(report.at("gain_product_check").get<double>() == doctest::Approx(1.0).epsilon(1e-9));

    const CliResult big = run_cli("solve-k --layers 54 --width 64 --variance 22");
    REQUIRE(big.exit_code == 0);
    const json big_report = json::parse(big.stdout_text);
    CHECK(big_report.at("gain_product_check").get<double>() ==
          doctest::Approx(22.0).epsilon(1e-9));
}

TEST_CASE("solve-k exit codes: infeasible configurations exit 2, bad flags 64") {
    CHECK(run_cli("solve-k --layers 54 --width 2 --variance 22").exit_code == 2);
    CHECK(run_cli("solve-k --layers 2 --width 64 --variance 40").exit_code == 2);
    CHECK(run_cli("solve-k --layers 54 --width 64").exit_code == 64);
    CHECK(run_cli("solve-k --layers 1 --width 64 --variance 2").exit_code == 64);
    CHECK(run_cli("nonsense").exit_code == 64);
}

TEST_CASE("profile prints to stdout when --out is missing") {
    const CliResult r = run_cli(
        "profile --scheme he --layers 5 --width 16 --trials 2 --batch 16 --seed 3");
    REQUIRE(r.exit_code == 0);
    const json report = json::parse(r.stdout_text);
    CHECK(report.at("profile").at("layers").size() == 5);
    for (const json& row : report.at("profile").at("layers"))
        CHECK(row.at("theo_fwd").get<double>() == 1.0);
}

TEST_CASE("profile writes json and csv next to --out") {
    const fs::path base = work_dir() / "profile_out";
    fs::remove(fs::path(base.string() + ".json"));
    fs::remove(fs::path(base.string() + ".csv"));
    const CliResult r = run_cli(
        "profile --scheme depthwise-inc --variance 22 --layers 54 --width 64 --trials 2 "
        "--batch 32 --seed 3 --out " +
        base.string());
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(base.string() + ".json"));
    REQUIRE(fs::exists(base.string() + ".csv"));

    std::ifstream in(base.string() + ".json");
    json report;
    in >> report;
    const auto& layers = report.at("profile").at("layers");
    CHECK(layers.back().at("theo_fwd").get<double>() == doctest::Approx(22.0).epsilon(1e-9));
}

TEST_CASE("profile rejects scheme flag conflicts with exit 64") {
    CHECK(run_cli("profile --scheme glorot --variance 22 --layers 5 --width 16").exit_code ==
          64);
    CHECK(run_cli("profile --scheme depthwise-inc --layers 5 --width 16").exit_code == 64);
    CHECK(run_cli("profile --scheme depthwise-inc --variance 2 --k 3 --layers 5 --width 16")
              .exit_code == 64);
}

TEST_CASE("train writes a report whose loss falls on the easy task") {
    const fs::path out = work_dir() / "train_small.json";
    fs::remove(out);
    const CliResult r =
        run_cli("train --scheme he " + tiny_train_args() + " --out " + out.string());
    REQUIRE(r.exit_code == 0);
    std::ifstream in(out);
    json report;
    in >> report;
    const auto& epochs = report.at("epochs");
    CHECK(epochs.size() == 4);  // baseline + 3 epochs
    CHECK(epochs.back().at("loss").get<double>() < epochs.front().at("loss").get<double>());
}

TEST_CASE("train exit codes: usage 64, data error 66, divergence 3") {
    CHECK(run_cli("train --scheme he " + tiny_train_args() + " --lr 0").exit_code == 64);
    CHECK(run_cli("train --scheme he --data cifar10:/nonexistent/batch.bin --layers 3 "
                  "--width 8 --epochs 1")
              .exit_code == 66);
    CHECK(run_cli("train --scheme depthwise-inc --variance 22 --layers 10 --width 32 "
                  "--samples 128 --dims 16 --classes 4 --epochs 12 --lr 1e4 --batch 32 "
                  "--data-seed 5 --seed 9")
              .exit_code == 3);
}

TEST_CASE("rerun reproduces a train report bitwise up to wall clock") {
    const fs::path first = work_dir() / "rerun_first.json";
    const fs::path second = work_dir() / "rerun_second.json";
    fs::remove(first);
    fs::remove(second);
    REQUIRE(run_cli("train --scheme depthwise-inc --variance 4 " + tiny_train_args() +
                    " --out " + first.string())
                .exit_code == 0);
    REQUIRE(run_cli("rerun --report " + first.string() + " --out " + second.string())
                .exit_code == 0);

    std::ifstream in1(first), in2(second);
    json a, b;
    in1 >> a;
    in2 >> b;
    CHECK(depthinit::canonical_report_bytes(a) == depthinit::canonical_report_bytes(b));
}

TEST_CASE("compare emits one row per scheme and ranks them") {
    const fs::path out = work_dir() / "compare_small.json";
    fs::remove(out);
    const CliResult r = run_cli("compare --variance 4 " + tiny_train_args() + " --out " +
                                out.string());
    REQUIRE(r.exit_code == 0);
    std::ifstream in(out);
    json report;
    in >> report;
    CHECK(report.at("rows").size() == 8);  // default grid
    CHECK(report.at("ranking").size() == 8);
    for (const json& row : report.at("rows")) CHECK(row.at("ok").get<bool>());
}

TEST_CASE("the output directory environment variable supplies default paths") {
    const fs::path dir = work_dir() / "envout";
    fs::create_directories(dir);
    fs::remove(dir / "solve_k.json");
    const CliResult r = run_cli("solve-k --layers 10 --width 32 --variance 2",
                                "DEPTHINIT_OUT_DIR=" + dir.string() + " ");
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(dir / "solve_k.json"));
}
