#include "doctest.h"

#include <sstream>

#include "cfslab/config.hpp"
#include "cfslab/errors.hpp"
#include "cfslab/experiments.hpp"

using namespace cfslab;

TEST_CASE("doubles are written with 17 significant digits") {
    Json j;
    j["x"] = 0.1;
    j["v"] = Json::array({1.0, 1.0 / 3.0});
    const std::string s = to_json_string(j);
    CHECK(s.find("0.10000000000000001") != std::string::npos);
    CHECK(s.find("0.33333333333333331") != std::string::npos);
}

TEST_CASE("non-finite values are written as strings") {
    Json j;
    j["a"] = std::numeric_limits<double>::infinity();
    CHECK(to_json_string(j).find("\"inf\"") != std::string::npos);
}

TEST_CASE("csv rows use 12 significant digits") {
    CsvTable t{"t", {"a", "b"}, {{1.0 / 3.0, 2.0}}};
    std::ostringstream os;
    write_csv(os, t);
    CHECK(os.str() == "a,b\n0.333333333333,2\n");
}

TEST_CASE("assertions keep both sides") {
    Report r;
    CHECK(r.check("x", "anchor", 1.0, "<", 2.0));
    CHECK_FALSE(r.check("y", "anchor", 3.0, "<=", 2.0));
    CHECK(r.check("z", "anchor", 2.0, "==", 2.0));
    CHECK(r.failures() == 1);
    CHECK_FALSE(r.all_passed());
    const Json j = report_to_json(r);
    CHECK(j["assertions"][1]["lhs"] == 3.0);
    CHECK(j["assertions"][1]["rhs"] == 2.0);
    CHECK(j["summary"]["failed"] == 1);
}

TEST_CASE("malformed configs are invalid input") {
    CHECK_THROWS_AS(parse_config(Json::parse(R"({"mass": -1})")), InvalidArgument);
    CHECK_THROWS_AS(parse_config(Json::parse(R"({"bogus": 1})")), InvalidArgument);
    CHECK_THROWS_AS(parse_config(Json::parse(R"({"cutoff": {"kind": "box", "epsilon": 0.1}})")), InvalidArgument);
    CHECK_THROWS_AS(parse_config(Json::parse(R"({"points": []})")), InvalidArgument);
    CHECK_THROWS_AS(parse_config(Json::parse(R"({"points": [[0, 1, 2]]})")), InvalidArgument);
    try {
        parse_config(Json::parse(R"({"mass": "one"})"));
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.exit_code() == 2);
    }
}

TEST_CASE("unknown experiments are invalid input") {
    CHECK_THROWS_AS(run_experiment("no-such", ExperimentConfig{}), InvalidArgument);
    CHECK(experiment_names().size() == 9);
}

TEST_CASE("experiment reports are reproducible") {
    const Json cfg = Json::parse(R"({
        "experiment": "kernel-diag", "mass": 1.0,
        "cutoff": {"kind": "sharp", "epsilon": 0.1},
        "params": {"expected": {"lambda_plus": 1.54035, "lambda_minus": -1.14728, "tolerance": 1e-4}}})");
    const Report a = run_experiment("kernel-diag", parse_config(cfg));
    const Report b = run_experiment("kernel-diag", parse_config(cfg));
    CHECK(a.all_passed());
    CHECK(to_json_string(report_to_json(a)) == to_json_string(report_to_json(b)));
}

TEST_CASE("rng streams are fixed by the seed") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 10; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        (void)c.uniform();
    }
    CHECK(Rng(1).index(5) < 5);
}
