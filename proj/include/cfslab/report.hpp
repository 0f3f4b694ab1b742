#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace cfslab {

using Json = nlohmann::ordered_json;

// An inequality or equality check with both sides kept.
struct Assertion {
    std::string name;
    std::string anchor;    // short quotation locating the statement being checked
    double lhs = 0.0;
    std::string relation;  // "<", "<=", ">", ">=", "=="
    double rhs = 0.0;
    bool pass = false;
};

struct CsvTable {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

struct Report {
    std::string experiment;
    std::uint64_t seed = 0;
    Json config;
    Json provenance = Json::object();
    Json results = Json::object();
    std::vector<Assertion> assertions;
    std::vector<CsvTable> tables;

    // Records and returns the outcome.
    bool check(const std::string& name, const std::string& anchor, double lhs, const std::string& relation,
               double rhs);
    bool all_passed() const;
    int failures() const;
};

extern const char* const kVersion;

// Fixed key order, two-space indent, doubles as %.17g; non-finite doubles become strings.
void write_json(std::ostream& os, const Json& j);
std::string to_json_string(const Json& j);
// Doubles as %.12g.
void write_csv(std::ostream& os, const CsvTable& t);

Json report_to_json(const Report& r);
// Writes <dir>/<experiment>.json and <dir>/<experiment>_<table>.csv; returns the paths written.
std::vector<std::string> emit(const Report& r, const std::string& dir);

std::string format_g(double v, int digits);

}  // namespace cfslab
