#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "cfslab/cutoff.hpp"
#include "cfslab/packets.hpp"
#include "cfslab/report.hpp"

namespace cfslab {

// Parsed top level of an experiment config.  Anything experiment specific stays in params.
struct ExperimentConfig {
    std::string experiment;
    double mass = 1.0;
    Json cutoff_spec;             // null when absent
    EvalOptions eval;
    Json family_spec;             // null when absent
    std::vector<SpacetimePoint> points;
    Json params = Json::object();
    std::uint64_t seed = 1;
    Json raw;
};

ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);

// Rejects keys outside the allowed set.
void require_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where);

double get_positive(const Json& obj, const char* key, double fallback, const std::string& where);
double get_number(const Json& obj, const char* key, double fallback, const std::string& where);
int get_int(const Json& obj, const char* key, int fallback, int lo, int hi, const std::string& where);

SpacetimePoint parse_point(const Json& j, const std::string& where);
std::vector<SpacetimePoint> parse_points(const Json& j, const std::string& where);
Vec3 parse_vec3(const Json& j, const std::string& where);
std::vector<double> parse_doubles(const Json& j, const std::string& where);

// {"kind": "sharp" | "gaussian" | "mollifier", "epsilon": e, "width": w, "amplitude": a}
CutoffProfile parse_cutoff(const Json& j, double m);
Json describe_cutoff(const CutoffProfile& g);

// {"type": "gaussian" | "special_a" | "special_b" | "mode", ...}
WavePacket parse_packet(const Json& j, double m);
// A list of packets, or {"preset": "special4", "sigma": s, "center": [t,x,y,z]}.
// Members are orthonormalised unless "orthonormalize": false is given in object form.
SolutionFamily parse_family(const Json& j, double m, const EvalOptions& opt);

Json point_json(const SpacetimePoint& p);
Json quad_json(const EvalOptions& opt);

}  // namespace cfslab
