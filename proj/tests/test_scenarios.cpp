#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "generators.hpp"
#include "screw_grasp/metric_engine.hpp"
#include "screw_grasp/scenarios.hpp"

using namespace screw_grasp;
using Json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string bundled(const std::string& name) { return std::string(SG_SCENARIO_DIR) + "/" + name + ".scenario"; }

Json door_json() { return Json::parse(dump_scenario(builtin_scenario("door_handle"))); }

template <class E>
std::string error_of(const Json& j) {
    try {
        parse_scenario(j.dump());
    } catch (const E& e) {
        return e.what();
    }
    return "<no error>";
}

}  // namespace

TEST(Builtins, AllThreeAreKnown) {
    EXPECT_EQ(builtin_names(), (std::vector<std::string>{"door_handle", "cuboid_pivot", "cuboid_slide"}));
    EXPECT_THROW(builtin_scenario("teapot"), InvalidArgument);
}

TEST(Builtins, BundledFilesMatchTheGenerators) {
    for (const auto& name : builtin_names()) {
        EXPECT_EQ(read_file(bundled(name)), dump_scenario(builtin_scenario(name))) << name;
    }
}

TEST(Builtins, BundledFilesSolveLikeTheGenerators) {
    for (const auto& name : builtin_names()) {
        const Scenario loaded = load_scenario(bundled(name));
        const Scenario built = builtin_scenario(name);
        const MetricResult a = local_metric(loaded.problem_for(), Direction::Positive);
        const MetricResult b = local_metric(built.problem_for(), Direction::Positive);
        ASSERT_TRUE(a.eta && b.eta) << name;
        EXPECT_EQ(*a.eta, *b.eta) << name;
    }
}

TEST(RoundTrip, DumpParseDumpIsStable) {
    sg_test::Gen g(61);
    for (const auto& name : builtin_names()) {
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<std::pair<std::string, std::string>> overrides;
            if (name == "door_handle") {
                overrides = {{"theta", std::to_string(g.uniform(0, 20)) + "deg"}, {"x_c", std::to_string(g.uniform(0, 0.75)) + "L"}};
            } else {
                overrides = {{"alpha", std::to_string(g.uniform(10, 80)) + "deg"}, {"x_E", std::to_string(g.uniform(0.1, 0.45)) + "L"}};
            }
            const std::string text = dump_scenario(builtin_scenario(name, overrides));
            const Scenario back = parse_scenario(text);
            EXPECT_EQ(dump_scenario(back), text) << name << " " << trial;
        }
    }
}

TEST(RoundTrip, KeepsTasksAndFamily) {
    const Scenario s = parse_scenario(dump_scenario(builtin_scenario("cuboid_pivot")));
    ASSERT_EQ(s.tasks.size(), 2u);
    EXPECT_EQ(s.tasks[0].label, "S1");
    EXPECT_EQ(s.tasks[1].label, "S2");
    EXPECT_TRUE(s.tasks[0].screw.pitch.is_infinite());
    ASSERT_TRUE(s.family.has_value());
    EXPECT_EQ(s.family->type, "cuboid_pivot");
    EXPECT_DOUBLE_EQ(s.family->get("alpha"), 50.0 * std::numbers::pi / 180.0);
    EXPECT_EQ(s.task("S2").label, "S2");
    EXPECT_THROW((void)s.task("S9"), InvalidArgument);
}

TEST(Errors, ZeroFrictionNamesTheContact) {
    Json j = door_json();
    j["manipulator_contacts"][1]["cone"]["mu"] = 0.0;
    try {
        parse_scenario(j.dump());
        FAIL() << "expected PhysicalInvariantError";
    } catch (const PhysicalInvariantError& e) {
        EXPECT_NE(std::string(e.what()).find("c2"), std::string::npos) << e.what();
        EXPECT_NE(e.field().find("manipulator_contacts[1]"), std::string::npos) << e.field();
    }
}

TEST(Errors, UnsupportedVersion) {
    Json j = door_json();
    j["schema_version"] = 2;
    EXPECT_NE(error_of<VersionError>(j).find("schema_version 2"), std::string::npos);
}

TEST(Errors, MalformedText) {
    EXPECT_THROW(parse_scenario("{ \"schema_version\": 1,"), ParseError);
    EXPECT_THROW(parse_scenario("[]"), SchemaError);
}

TEST(Errors, SchemaErrorsCarryThePath) {
    Json j = door_json();
    j["tasks"] = Json::array();
    try {
        parse_scenario(j.dump());
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.field(), "tasks");
    }

    j = door_json();
    j["manipulator_contacts"][0]["position"] = Json::array({1.0, 2.0});
    try {
        parse_scenario(j.dump());
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.field(), "manipulator_contacts[0].position");
    }

    j = door_json();
    j["surprise"] = 1;
    EXPECT_NE(error_of<SchemaError>(j).find("surprise"), std::string::npos);

    j = door_json();
    j["family"]["params"]["banana"] = 1.0;
    EXPECT_NE(error_of<SchemaError>(j).find("family.params.banana"), std::string::npos);
}

TEST(Errors, RotationMustBeOrthonormal) {
    Json j = door_json();
    j["manipulator_contacts"][0]["rotation"][0][0] = 1.1;
    EXPECT_NE(error_of<PhysicalInvariantError>(j).find("rotation"), std::string::npos);
}

TEST(Errors, TaskDirectionMustBeUnit) {
    Json j = door_json();
    j["tasks"][0]["l"] = Json::array({0.0, 0.0, 2.0});
    EXPECT_NE(error_of<PhysicalInvariantError>(j).find("tasks[0].l"), std::string::npos);
}

TEST(Errors, MissingFile) {
    EXPECT_THROW(load_scenario("/nonexistent/dir/none.scenario"), IoError);
}

TEST(DoorGeometry, FingersAreAntipodalAndPressInward) {
    for (double theta : {0.0, 0.1, 0.3}) {
        DoorHandleParams d;
        d.theta = theta;
        d.x_c = 0.05;
        const GraspProblem p = make_door_handle(d);
        ASSERT_EQ(p.manipulator_contacts.size(), 2u);
        const auto& c1 = p.manipulator_contacts[0];
        const auto& c2 = p.manipulator_contacts[1];
        const Vec3 n1 = c1.rotation.col(2), n2 = c2.rotation.col(2);
        EXPECT_NEAR((n1 + n2).norm(), 0.0, 1e-15);
        EXPECT_NEAR((c1.position - c2.position).norm(), d.W, 1e-15);
        // Normals point from each finger toward the other.
        EXPECT_NEAR((c2.position - c1.position).normalized().dot(n1), 1.0, 1e-12);
        // The fingers stay at distance x_c from the hinge axis.
        const Vec3 mid = (c1.position + c2.position) / 2.0;
        EXPECT_NEAR(mid.norm(), d.x_c, 1e-15);
        EXPECT_TRUE(p.task.pitch.is_infinite());
    }
}

TEST(CuboidGeometry, EdgeContactsLieOnThePivotAxis) {
    CuboidParams c;
    const TaskScrew s1 = cuboid_pivot_screw(c);
    const GraspProblem p = make_cuboid(c, CuboidTask::Pivot);
    ASSERT_EQ(p.environment_contacts.size(), 2u);
    for (const auto& e : p.environment_contacts) {
        EXPECT_NEAR((e.position - s1.q).cross(s1.l).norm(), 0.0, 1e-15) << e.label;
    }
}

TEST(CuboidGeometry, GravityPointsDownInTheWorld) {
    for (double deg : {10.0, 50.0, 80.0}) {
        CuboidParams c;
        c.alpha = deg * std::numbers::pi / 180.0;
        const GraspProblem p = make_cuboid(c, CuboidTask::Slide);
        ASSERT_EQ(p.external.size(), 1u);
        const Vec3 world = cuboid_tilt(c.alpha) * p.external[0].force;
        EXPECT_NEAR((world - Vec3(0, 0, -c.weight)).norm(), 0.0, 1e-12);
        // Slide task: horizontal in the world.
        const Vec3 l = cuboid_tilt(c.alpha) * p.task.l;
        EXPECT_NEAR(l.z(), 0.0, 1e-15);
        EXPECT_NEAR(l.x(), -1.0, 1e-15);
    }
}

TEST(CuboidGeometry, FingersSitAtXe) {
    CuboidParams c;
    c.x_E = 0.25 * c.L;
    const GraspProblem p = make_cuboid(c, CuboidTask::Pivot);
    for (const auto& m : p.manipulator_contacts) EXPECT_DOUBLE_EQ(m.position.x(), c.x_E);
}

TEST(Quantities, UnitsConvert) {
    EXPECT_DOUBLE_EQ(parse_quantity("50deg", Dimension::Angle), 50.0 * std::numbers::pi / 180.0);
    EXPECT_DOUBLE_EQ(parse_quantity("0.5 rad", Dimension::Angle), 0.5);
    EXPECT_DOUBLE_EQ(parse_quantity("0.4L", Dimension::Length, 0.3), 0.4 * 0.3);
    EXPECT_DOUBLE_EQ(parse_quantity("0.02m", Dimension::Length), 0.02);
    EXPECT_DOUBLE_EQ(parse_quantity("12N", Dimension::Force), 12.0);
    EXPECT_DOUBLE_EQ(parse_quantity(" +3.5 ", Dimension::Dimensionless), 3.5);
    EXPECT_DOUBLE_EQ(parse_quantity("-1e-3", Dimension::Stiffness), -1e-3);
}

TEST(Quantities, RejectsBadInput) {
    EXPECT_THROW(parse_quantity("abc", Dimension::Angle), InvalidArgument);
    EXPECT_THROW(parse_quantity("5kg", Dimension::Force), InvalidArgument);
    EXPECT_THROW(parse_quantity("1deg", Dimension::Length), InvalidArgument);
    EXPECT_THROW(parse_quantity("0.4L", Dimension::Length), InvalidArgument);
    EXPECT_THROW(parse_quantity("inf", Dimension::Force), InvalidArgument);
}

TEST(Overrides, UnknownParameterListsTheKnownOnes) {
    try {
        builtin_scenario("door_handle", {{"alpha", "10deg"}});
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("theta"), std::string::npos) << e.what();
    }
}

TEST(Overrides, NeedAFamily) {
    Scenario s = builtin_scenario("door_handle");
    s.family.reset();
    EXPECT_THROW(with_overrides(s, {{"theta", "1deg"}}), InvalidArgument);
    EXPECT_NO_THROW(with_overrides(s, {}));
}

TEST(Overrides, PhysicalChecksApply) {
    EXPECT_THROW(builtin_scenario("cuboid_pivot", {{"mu_c", "0"}}), PhysicalInvariantError);
}
