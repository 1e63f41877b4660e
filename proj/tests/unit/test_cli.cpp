#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = RISEM_CLI_PATH;
const fs::path kScenarios = RISEM_SCENARIO_DIR;

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / "risem_cli_test";
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args, const fs::path& out = {}) {
    std::string cmd = kCli + " " + args;
    cmd += out.empty() ? " >/dev/null 2>&1" : " >" + out.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = scratch() / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

}  // namespace

TEST(Cli, SuccessPaths) {
    const fs::path out = scratch() / "out.txt";
    EXPECT_EQ(run("--version"), 0);
    EXPECT_EQ(run("patch-rcs --a 5 --b 5 --grid -90,90,181", out), 0);
    EXPECT_EQ(slurp(out).rfind("theta_deg,", 0), 0u);
    EXPECT_EQ(run("linear-field --cells 16 --theta-i 30 --compensate 30,-50 --grid -90,90,19", out), 0);
    EXPECT_EQ(run("sweep " + (kScenarios / "linear_minimal.yaml").string() + " --format json", out), 0);
    EXPECT_TRUE(nlohmann::json::accept(slurp(out)));
    EXPECT_EQ(run("configure " + (kScenarios / "fig6_d05.yaml").string(), out), 0);
    EXPECT_EQ(run("preset fig6", out), 0);
}

TEST(Cli, MimoDocument) {
    const fs::path out = scratch() / "mimo.json";
    ASSERT_EQ(run("mimo " + (kScenarios / "fig7a.yaml").string(), out), 0);
    const nlohmann::json doc = nlohmann::json::parse(slurp(out));
    EXPECT_EQ(doc.at("format"), "risem-mimo");
    EXPECT_EQ(doc.at("incident_amplitudes").size(), 2u);
    // unit sampling: the direct sum and the MIMO chain differ only by rounding
    EXPECT_LE(doc.at("diagnostics").at("sampling_discrepancy").get<double>(), 1e-12);
}

TEST(Cli, ValidationFailuresExitTwo) {
    EXPECT_EQ(run("no-such-command"), 2);
    EXPECT_EQ(run("sweep /no/such/file.yaml"), 2);
    EXPECT_EQ(run("patch-rcs --a -1"), 2);
    EXPECT_EQ(run("linear-field --theta-i 120"), 2);
    const fs::path bad = write("bad.yaml", "geometry: {linear: {cells: 4}}\nincident: [{theta_deg: 120}]\n"
                                           "observation: {points_deg: [0]}\n");
    EXPECT_EQ(run("sweep " + bad.string()), 2);
    const fs::path unknown = write("unknown.yaml", "geometry: {linear: {cells: 4, colour: 1}}\n"
                                                   "observation: {points_deg: [0]}\n");
    EXPECT_EQ(run("sweep " + unknown.string()), 2);
}

TEST(Cli, NumericalFailureExitsThree) {
    // closely spaced cells on a narrow sector: the truncated solve drops most of the target
    std::string rows = "theta_deg,re,im\n";
    for (int k = 0; k < 24; ++k) rows += std::to_string(-10 + k) + "," + (k % 2 ? "1e-4" : "-1e-4") + ",0\n";
    write("alternating.csv", rows);
    const fs::path scn = write("illposed.yaml",
                               "geometry: {linear: {cells: 24, spacing: 0.05, sampling: unit}}\n"
                               "incident: [{theta_deg: 5}]\n"
                               "observation: {grid: {start_deg: -10, stop_deg: 13, count: 24}}\n"
                               "configuration:\n"
                               "  reshape: {desired_pattern_file: alternating.csv, solve_on: observation,\n"
                               "            truncation_tol: 0.9, max_discarded_fraction: 0}\n");
    EXPECT_EQ(run("configure " + scn.string()), 3);
    EXPECT_EQ(run("sweep " + scn.string()), 3);
}
