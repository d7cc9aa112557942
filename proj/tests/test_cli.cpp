#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "problem_tools.hpp"

using namespace screw_grasp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "screw-grasp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Outcome r;
    r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> v;
    std::stringstream ss(text);
    std::string l;
    while (std::getline(ss, l)) v.push_back(l);
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> v;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) v.push_back(c);
    if (!line.empty() && line.back() == ',') v.emplace_back();
    return v;
}

std::string temp_path(const std::string& name) { return (fs::path(testing::TempDir()) / name).string(); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string write_scenario(const std::string& name, const GraspProblem& p) {
    Scenario s;
    s.name = name;
    s.problem = p;
    s.tasks = {{"S", p.task}};
    const std::string path = temp_path(name + ".scenario");
    std::ofstream(path, std::ios::binary) << dump_scenario(s);
    return path;
}

}  // namespace

TEST(CliEval, TextReport) {
    const Outcome r = run({"eval", "--builtin", "door_handle"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("status:     optimal"), std::string::npos) << r.out;
    const auto at = r.out.find("eta:");
    ASSERT_NE(at, std::string::npos) << r.out;
    EXPECT_NEAR(std::stod(r.out.substr(at + 4)), 0.12, 1e-6);
    EXPECT_NE(r.out.find("c1.f_n<=max"), std::string::npos) << r.out;
}

TEST(CliEval, CsvReport) {
    const Outcome r = run({"eval", "--builtin", "door_handle", "--set", "theta=5deg", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_EQ(ls[0], "param,eta,status,iterations,wall_ms");
    const auto cells = split(ls[1]);
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_NEAR(std::stod(cells[1]), 0.12 - 0.6 * 5.0 * M_PI / 180.0, 1e-6);
    EXPECT_EQ(cells[2], "optimal");
    EXPECT_EQ(cells[4], "0");
}

TEST(CliEval, NegativeEtaWarns) {
    const Outcome r = run({"eval", "--builtin", "door_handle", "--set", "theta=20deg"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("negative"), std::string::npos) << r.err;
}

TEST(CliEval, TaskAndDirectionSelection) {
    const Outcome plus = run({"eval", "--builtin", "cuboid_pivot", "--task", "S2", "--dir", "+", "--format", "csv"});
    const Outcome minus = run({"eval", "--builtin", "cuboid_pivot", "--task", "S2", "--dir", "-", "--format", "csv"});
    ASSERT_EQ(plus.code, 0);
    ASSERT_EQ(minus.code, 0);
    EXPECT_GT(std::stod(split(lines(plus.out)[1])[1]), std::stod(split(lines(minus.out)[1])[1]));
    EXPECT_EQ(run({"eval", "--builtin", "cuboid_pivot", "--task", "S7"}).code, 4);
}

TEST(CliSweep, GridRowsAndSummary) {
    const Outcome r = run({"sweep", "--builtin", "door_handle", "--sweep", "theta=0deg:20deg:5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 6u);
    EXPECT_EQ(split(ls[1])[0], "0");
    EXPECT_NE(r.err.find("eta* = "), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("at theta = "), std::string::npos) << r.err;
}

TEST(CliSweep, OutputIsDeterministic) {
    const std::vector<std::string> args = {"sweep", "--builtin", "cuboid_pivot", "--sweep", "alpha=10deg:80deg:8", "--parallel", "3"};
    const Outcome a = run(args);
    const Outcome b = run(args);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST(CliSweep, OutFileGetsCsvAndStdoutGetsSummary) {
    const std::string path = temp_path("sweep.csv");
    const Outcome r = run({"sweep", "--builtin", "door_handle", "--sweep", "x_c=0L:0.75L:4", "--out", path});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(read_file(path)).size(), 5u);
    EXPECT_NE(r.out.find("eta* = "), std::string::npos);
}

TEST(CliSweep, BadSpecsAreInputErrors) {
    EXPECT_EQ(run({"sweep", "--builtin", "door_handle", "--sweep", "theta=0:1"}).code, 4);
    EXPECT_EQ(run({"sweep", "--builtin", "door_handle", "--sweep", "theta=0:1:x"}).code, 4);
    EXPECT_EQ(run({"sweep", "--builtin", "door_handle", "--sweep", "alpha=0:1:3"}).code, 4);
    EXPECT_EQ(run({"sweep", "--builtin", "door_handle", "--sweep", "theta=0m:1m:3"}).code, 4);
    EXPECT_EQ(run({"sweep", "--builtin", "door_handle"}).code, 4);
}

TEST(CliOracle, PassesOnBuiltins) {
    for (const char* name : {"door_handle", "cuboid_pivot", "cuboid_slide"}) {
        const Outcome r = run({"oracle-check", "--builtin", name});
        EXPECT_EQ(r.code, 0) << name << "\n" << r.out << r.err;
        EXPECT_NE(r.out.find("result:   pass"), std::string::npos) << r.out;
    }
}

TEST(CliOracle, CoarseFacetsWithZeroThresholdMismatch) {
    const Outcome r = run({"oracle-check", "--builtin", "cuboid_pivot", "--facets", "4", "--threshold", "0"});
    EXPECT_EQ(r.code, 1) << r.out;
    EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(CliOracle, AgreesOnInfeasibility) {
    const Outcome r = run({"oracle-check", "--scenario", write_scenario("overloaded", sg_test::unreachable_load())});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("pass (both infeasible)"), std::string::npos) << r.out;
}

TEST(CliExitCodes, InfeasibleAndUnbounded) {
    const Outcome inf = run({"eval", "--scenario", write_scenario("overloaded", sg_test::unreachable_load())});
    EXPECT_EQ(inf.code, 2) << inf.out << inf.err;
    EXPECT_NE(inf.out.find("certificate:"), std::string::npos);
    const Outcome unb = run({"eval", "--scenario", write_scenario("uncapped", sg_test::uncapped_support())});
    EXPECT_EQ(unb.code, 3) << unb.out << unb.err;
}

TEST(CliExitCodes, IterationLimitIsSolverFailure) {
    EXPECT_EQ(run({"eval", "--builtin", "cuboid_pivot", "--max-iter", "1"}).code, 5);
}

TEST(CliExitCodes, InputErrors) {
    EXPECT_EQ(run({}).code, 4);
    EXPECT_EQ(run({"frobnicate"}).code, 4);
    EXPECT_EQ(run({"eval"}).code, 4);
    EXPECT_EQ(run({"eval", "--builtin", "teapot"}).code, 4);
    EXPECT_EQ(run({"eval", "--builtin", "door_handle", "--scenario", "x.scenario"}).code, 4);
    EXPECT_EQ(run({"eval", "--builtin", "door_handle", "--set", "theta"}).code, 4);
    EXPECT_EQ(run({"eval", "--builtin", "door_handle", "--set", "mu_c=0"}).code, 4);
    EXPECT_EQ(run({"eval", "--builtin", "door_handle", "--dir", "sideways"}).code, 4);
    EXPECT_EQ(run({"eval", "--builtin", "door_handle", "--format", "xml"}).code, 4);
    EXPECT_EQ(run({"oracle-check", "--builtin", "door_handle", "--facets", "2"}).code, 4);
    EXPECT_EQ(run({"eval", "--scenario", "/nonexistent/x.scenario"}).code, 4);
    EXPECT_EQ(run({"eval", "--builtin", "door_handle", "--out", "/nonexistent/dir/out.txt"}).code, 4);
}

TEST(CliExitCodes, HelpIsSuccess) {
    const Outcome r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("oracle-check"), std::string::npos);
}

TEST(CliGws, OneRowPerRay) {
    const Outcome r = run({"gws", "--builtin", "door_handle", "--subspace", "fx,tz", "--rays", "16"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 17u);
    EXPECT_EQ(ls[0], "fx,tz,eta,status");
    for (std::size_t i = 1; i < ls.size(); ++i) EXPECT_EQ(split(ls[i]).size(), 4u) << ls[i];
    EXPECT_EQ(run({"gws", "--builtin", "door_handle", "--subspace", "fx,fx"}).code, 4);
    EXPECT_EQ(run({"gws", "--builtin", "door_handle", "--subspace", "fw"}).code, 4);
    EXPECT_EQ(run({"gws", "--builtin", "door_handle", "--subspace", "fx,fy,fz,tx"}).code, 4);
}

TEST(CliExport, RoundTripsThroughEval) {
    const std::string path = temp_path("exported.scenario");
    ASSERT_EQ(run({"export", "--builtin", "cuboid_slide", "--set", "alpha=30deg", "--out", path}).code, 0);
    const Outcome a = run({"eval", "--scenario", path, "--format", "csv"});
    const Outcome b = run({"eval", "--builtin", "cuboid_slide", "--set", "alpha=30deg", "--format", "csv"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    // A file-backed family scenario still accepts --set.
    EXPECT_EQ(run({"eval", "--scenario", path, "--set", "alpha=40deg"}).code, 0);
}
