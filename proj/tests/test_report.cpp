#include "relorb/report.hpp"

#include <catch_amalgamated.hpp>

#include <cstdio>
#include <sstream>

using namespace relorb;

TEST_CASE("deterministic float formatting", "[report]") {
    CHECK(fmt_double(0.1) == "0.1");
    CHECK(fmt_double(-3.0) == "-3");
    CHECK(fmt_double(1e-30) == "1e-30");
    // shortest round trip
    double x = 0.30000000000000004;
    CHECK(std::stod(fmt_double(x)) == x);
    CHECK(fmt_rational(Rational(-5, 10)) == "-1/2");
    CHECK(fmt_rational(Rational(4)) == "4");
}

TEST_CASE("csv round trip", "[report]") {
    Table t;
    t.columns = {"a", "b", "c"};
    t.add_row({"1", "x", "-0.5"});
    t.add_row({"2", "y", "7"});
    std::string csv = t.to_csv();
    std::istringstream in(csv);
    Table back = Table::from_csv(in);
    CHECK(back.columns == t.columns);
    CHECK(back.rows == t.rows);
    CHECK(t.to_csv() == back.to_csv());  // identical bytes
}

TEST_CASE("empty report is header-only", "[report]") {
    Table t;
    t.columns = {"m", "empty"};
    CHECK(t.to_csv() == "m,empty\n");
    auto j = t.to_json();
    CHECK(j["rows"].empty());
}

TEST_CASE("json mirror contains every csv row", "[report]") {
    Table t;
    t.columns = {"k", "v"};
    for (int i = 0; i < 5; ++i) t.add_row({std::to_string(i), fmt_double(i * 0.5)});
    auto j = t.to_json();
    REQUIRE(j["rows"].size() == t.rows.size());
    for (size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(j["rows"][i]["k"] == t.rows[i][0]);
        CHECK(j["rows"][i]["v"] == t.rows[i][1]);
    }
    // keys are emitted sorted
    std::string dumped = j.dump();
    CHECK(dumped.find("\"columns\"") < dumped.find("\"rows\""));
}

TEST_CASE("emit_report to file and failure paths", "[report]") {
    Table t;
    t.columns = {"x"};
    t.add_row({"1"});
    std::string path = "test_report_out.csv";
    emit_report(t, "csv", path);
    std::ifstream in(path);
    Table back = Table::from_csv(in);
    CHECK(back.rows.size() == 1);
    std::remove(path.c_str());

    CHECK_THROWS_AS(emit_report(t, "csv", "/nonexistent_dir_xyz/out.csv"), IoError);
    CHECK_THROWS_AS(emit_report(t, "yaml", ""), std::invalid_argument);

    // identical content twice gives identical bytes
    std::ostringstream a, b;
    emit_report(t, "json", "", a);
    emit_report(t, "json", "", b);
    CHECK(a.str() == b.str());
}
