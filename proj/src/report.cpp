#include "cfslab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfslab/errors.hpp"

namespace cfslab {

const char* const kVersion = "cfslab 0.1.0";

std::string format_g(double v, int digits) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

bool Report::check(const std::string& name, const std::string& anchor, double lhs, const std::string& relation,
                   double rhs) {
    bool ok = false;
    if (relation == "<") ok = lhs < rhs;
    else if (relation == "<=") ok = lhs <= rhs;
    else if (relation == ">") ok = lhs > rhs;
    else if (relation == ">=") ok = lhs >= rhs;
    else if (relation == "==") ok = lhs == rhs;
    else throw InvalidArgument("unknown relation " + relation);
    assertions.push_back({name, anchor, lhs, relation, rhs, ok});
    return ok;
}

bool Report::all_passed() const { return failures() == 0; }

int Report::failures() const {
    int n = 0;
    for (const auto& a : assertions) n += a.pass ? 0 : 1;
    return n;
}

namespace {

void write_value(std::ostream& os, const Json& j, int indent) {
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close(static_cast<std::size_t>(indent), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ",\n";
                first = false;
                os << pad << Json(it.key()).dump() << ": ";
                write_value(os, it.value(), indent + 2);
            }
            os << "\n" << close << "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            // arrays of scalars stay on one line
            bool flat = true;
            for (const auto& e : j) flat = flat && !e.is_structured();
            if (flat) {
                os << "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) os << ", ";
                    write_value(os, j[i], indent);
                }
                os << "]";
                return;
            }
            os << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ",\n";
                os << pad;
                write_value(os, j[i], indent + 2);
            }
            os << "\n" << close << "]";
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            if (std::isfinite(v)) os << format_g(v, 17);
            else os << '"' << format_g(v, 17) << '"';
            return;
        }
        default: os << j.dump(); return;
    }
}

}  // namespace

void write_json(std::ostream& os, const Json& j) {
    write_value(os, j, 0);
    os << "\n";
}

std::string to_json_string(const Json& j) {
    std::ostringstream os;
    write_json(os, j);
    return os.str();
}

void write_csv(std::ostream& os, const CsvTable& t) {
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_g(row[i], 12);
        os << "\n";
    }
}

Json report_to_json(const Report& r) {
    Json j;
    j["experiment"] = r.experiment;
    j["version"] = kVersion;
    j["seed"] = r.seed;
    j["config"] = r.config;
    j["provenance"] = r.provenance;
    j["results"] = r.results;
    Json as = Json::array();
    for (const auto& a : r.assertions) {
        Json e;
        e["name"] = a.name;
        e["anchor"] = a.anchor;
        e["lhs"] = a.lhs;
        e["relation"] = a.relation;
        e["rhs"] = a.rhs;
        e["pass"] = a.pass;
        as.push_back(std::move(e));
    }
    j["assertions"] = std::move(as);
    j["summary"] = {{"assertions", r.assertions.size()}, {"failed", r.failures()}};
    return j;
}

std::vector<std::string> emit(const Report& r, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidArgument("cannot create output directory " + dir + ": " + ec.message());
    std::vector<std::string> paths;
    const fs::path jp = fs::path(dir) / (r.experiment + ".json");
    {
        std::ofstream os(jp, std::ios::binary);
        if (!os) throw InvalidArgument("cannot write " + jp.string());
        write_json(os, report_to_json(r));
    }
    paths.push_back(jp.string());
    for (const auto& t : r.tables) {
        const fs::path cp = fs::path(dir) / (r.experiment + "_" + t.name + ".csv");
        std::ofstream os(cp, std::ios::binary);
        if (!os) throw InvalidArgument("cannot write " + cp.string());
        write_csv(os, t);
        paths.push_back(cp.string());
    }
    return paths;
}

}  // namespace cfslab
