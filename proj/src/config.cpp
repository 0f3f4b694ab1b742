#include "cfslab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "cfslab/errors.hpp"

namespace cfslab {

namespace {

const Json& at(const Json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw InvalidArgument(where + ": missing \"" + key + "\"");
    return obj.at(key);
}

double as_number(const Json& j, const std::string& where) {
    if (!j.is_number()) throw InvalidArgument(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw InvalidArgument(where + ": not finite");
    return v;
}

Spin parse_spin(const Json& j, const std::string& where) {
    const std::string s = j.is_string() ? j.get<std::string>() : "";
    if (s == "up") return Spin::up;
    if (s == "down") return Spin::down;
    throw InvalidArgument(where + ": spin must be \"up\" or \"down\"");
}

Energy parse_sign(const Json& j, const std::string& where) {
    const std::string s = j.is_string() ? j.get<std::string>() : "";
    if (s == "-" || s == "negative") return Energy::negative;
    if (s == "+" || s == "positive") return Energy::positive;
    throw InvalidArgument(where + ": sign must be \"+\" or \"-\"");
}

}  // namespace

void require_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw InvalidArgument(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) throw InvalidArgument(where + ": unknown key \"" + it.key() + "\"");
}

double get_number(const Json& obj, const char* key, double fallback, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return as_number(obj.at(key), where + "." + key);
}

double get_positive(const Json& obj, const char* key, double fallback, const std::string& where) {
    const double v = get_number(obj, key, fallback, where);
    if (!(v > 0.0)) throw InvalidArgument(where + "." + key + ": must be positive");
    return v;
}

int get_int(const Json& obj, const char* key, int fallback, int lo, int hi, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    const Json& v = obj.at(key);
    if (!v.is_number_integer()) throw InvalidArgument(where + "." + key + ": expected an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi)
        throw InvalidArgument(where + "." + key + ": out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(x);
}

SpacetimePoint parse_point(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4) throw InvalidArgument(where + ": a point is [t, x1, x2, x3]");
    return {as_number(j[0], where), as_number(j[1], where), as_number(j[2], where), as_number(j[3], where)};
}

std::vector<SpacetimePoint> parse_points(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw InvalidArgument(where + ": expected a nonempty list of points");
    std::vector<SpacetimePoint> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_point(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

Vec3 parse_vec3(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw InvalidArgument(where + ": expected [k1, k2, k3]");
    return {as_number(j[0], where), as_number(j[1], where), as_number(j[2], where)};
}

std::vector<double> parse_doubles(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw InvalidArgument(where + ": expected a nonempty list of numbers");
    std::vector<double> out;
    for (const auto& e : j) out.push_back(as_number(e, where));
    return out;
}

CutoffProfile parse_cutoff(const Json& j, double m) {
    const std::string w = "cutoff";
    require_keys(j, {"kind", "epsilon", "width", "amplitude"}, w);
    const Json& k = at(j, "kind", w);
    const std::string kind = k.is_string() ? k.get<std::string>() : "";
    const double eps = as_number(at(j, "epsilon", w), w + ".epsilon");
    if (!(eps > 0.0)) throw InvalidArgument("cutoff.epsilon: must be positive");
    if (kind == "sharp") return CutoffProfile::sharp(eps);
    if (kind == "gaussian")
        return CutoffProfile::gaussian(eps, get_positive(j, "width", 1.0, w), get_positive(j, "amplitude", 1.0, w));
    if (kind == "mollifier") return CutoffProfile::mollifier(eps, m);
    throw InvalidArgument("cutoff.kind: expected sharp, gaussian or mollifier");
}

Json describe_cutoff(const CutoffProfile& g) {
    Json j;
    j["kind"] = to_string(g.kind());
    j["epsilon"] = g.epsilon();
    if (g.kind() == CutoffKind::gaussian) {
        j["width"] = g.width();
        j["amplitude"] = g.amplitude();
    }
    j["support_radius"] = std::isfinite(g.support_radius()) ? Json(g.support_radius()) : Json("inf");
    return j;
}

WavePacket parse_packet(const Json& j, double m) {
    const std::string w = "packet";
    const Json& t = at(j, "type", w);
    const std::string type = t.is_string() ? t.get<std::string>() : "";
    const SpacetimePoint center = j.contains("center") ? parse_point(j.at("center"), w + ".center") : SpacetimePoint{};
    if (type == "gaussian") {
        require_keys(j, {"type", "sign", "spin", "width", "momentum", "center", "amplitude"}, w);
        const Energy e = j.contains("sign") ? parse_sign(j.at("sign"), w) : Energy::negative;
        const Spin s = j.contains("spin") ? parse_spin(j.at("spin"), w) : Spin::up;
        const Vec3 p = j.contains("momentum") ? parse_vec3(j.at("momentum"), w + ".momentum") : Vec3::Zero();
        return gaussian_packet(e, s, get_positive(j, "width", 1.0, w), p, center, get_number(j, "amplitude", 1.0, w), m);
    }
    if (type == "special_a" || type == "special_b") {
        require_keys(j, {"type", "spin", "sigma", "center"}, w);
        const Spin s = j.contains("spin") ? parse_spin(j.at("spin"), w) : Spin::up;
        const double sigma = get_positive(j, "sigma", m, w);
        return type == "special_a" ? special_a(s, sigma, center, m) : special_b(s, sigma, center, m);
    }
    if (type == "mode") {
        require_keys(j, {"type", "sign", "spin", "momentum", "half"}, w);
        const Energy e = j.contains("sign") ? parse_sign(j.at("sign"), w) : Energy::negative;
        const Spin s = j.contains("spin") ? parse_spin(j.at("spin"), w) : Spin::up;
        return mode_packet(e, s, parse_vec3(at(j, "momentum", w), w + ".momentum"), get_positive(j, "half", 0.1, w), m);
    }
    throw InvalidArgument("packet.type: expected gaussian, special_a, special_b or mode");
}

SolutionFamily parse_family(const Json& j, double m, const EvalOptions& opt) {
    std::vector<WavePacket> packets;
    bool ortho = true;
    if (j.is_array()) {
        for (const auto& e : j) packets.push_back(parse_packet(e, m));
    } else if (j.is_object()) {
        require_keys(j, {"preset", "sigma", "center", "packets", "orthonormalize"}, "family");
        if (j.contains("orthonormalize")) {
            if (!j.at("orthonormalize").is_boolean()) throw InvalidArgument("family.orthonormalize: expected a boolean");
            ortho = j.at("orthonormalize").get<bool>();
        }
        if (j.contains("preset")) {
            const std::string p = j.at("preset").is_string() ? j.at("preset").get<std::string>() : "";
            if (p != "special4") throw InvalidArgument("family.preset: only \"special4\" is known");
            const double sigma = get_positive(j, "sigma", m, "family");
            const SpacetimePoint c = j.contains("center") ? parse_point(j.at("center"), "family.center") : SpacetimePoint{};
            packets = {special_b(Spin::up, sigma, c, m), special_b(Spin::down, sigma, c, m),
                       special_a(Spin::up, sigma, c, m), special_a(Spin::down, sigma, c, m)};
        } else {
            for (const auto& e : at(j, "packets", "family")) packets.push_back(parse_packet(e, m));
        }
    } else {
        throw InvalidArgument("family: expected a list of packets or an object");
    }
    if (packets.empty()) throw InvalidArgument("family: no packets");
    SolutionFamily f(std::move(packets));
    return ortho ? orthonormalize_family(f, opt) : f;
}

ExperimentConfig parse_config(const Json& j) {
    require_keys(j, {"experiment", "mass", "cutoff", "quadrature", "family", "points", "params", "seed"}, "config");
    ExperimentConfig c;
    c.raw = j;
    if (j.contains("experiment")) {
        if (!j.at("experiment").is_string()) throw InvalidArgument("config.experiment: expected a string");
        c.experiment = j.at("experiment").get<std::string>();
    }
    c.mass = get_positive(j, "mass", 1.0, "config");
    if (j.contains("cutoff")) {
        c.cutoff_spec = j.at("cutoff");
        parse_cutoff(c.cutoff_spec, c.mass);  // validate early; the mollifier table is built lazily
    }
    if (j.contains("quadrature")) {
        const Json& q = j.at("quadrature");
        require_keys(q, {"rel_tol", "hermite_rel", "hermite_min", "hermite_max"}, "quadrature");
        c.eval.quad.rel_tol = get_positive(q, "rel_tol", c.eval.quad.rel_tol, "quadrature");
        c.eval.hermite_rel = get_positive(q, "hermite_rel", c.eval.hermite_rel, "quadrature");
        c.eval.hermite_min = get_int(q, "hermite_min", c.eval.hermite_min, 4, 256, "quadrature");
        c.eval.hermite_max = get_int(q, "hermite_max", c.eval.hermite_max, c.eval.hermite_min, 256, "quadrature");
    }
    if (j.contains("family")) c.family_spec = j.at("family");
    if (j.contains("points")) c.points = parse_points(j.at("points"), "points");
    if (j.contains("params")) {
        if (!j.at("params").is_object()) throw InvalidArgument("config.params: expected an object");
        c.params = j.at("params");
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw InvalidArgument("config.seed: expected a nonnegative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidArgument("cannot open config " + path);
    Json j;
    try {
        j = Json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("config " + path + ": " + e.what());
    }
    return parse_config(j);
}

Json point_json(const SpacetimePoint& p) { return Json::array({p.t, p.x(0), p.x(1), p.x(2)}); }

Json quad_json(const EvalOptions& opt) {
    return {{"rel_tol", opt.quad.rel_tol},
            {"hermite_rel", opt.hermite_rel},
            {"hermite_min", opt.hermite_min},
            {"hermite_max", opt.hermite_max}};
}

}  // namespace cfslab
