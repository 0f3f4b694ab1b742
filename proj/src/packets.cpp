#include "cfslab/packets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <gsl/gsl_integration.h>

#include "cfslab/errors.hpp"
#include "cfslab/parallel.hpp"

namespace cfslab {

namespace {

constexpr double pi = std::numbers::pi;
const double inv_norm3 = std::pow(2.0 * pi, -1.5);
const cplx I(0.0, 1.0);

void check_mass(double m) {
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("wave packet: mass must be positive and finite");
}

void check_point(const SpacetimePoint& x) {
    if (!std::isfinite(x.t) || !x.x.allFinite()) throw InvalidArgument("wave packet: non-finite spacetime point");
}

// (sigma . n) e_spin as a 2-vector.
Eigen::Vector2cd sigma_dot(const Vec3& n, Spin s) {
    Eigen::Vector2cd v;
    if (s == Spin::up)
        v << n(2), cplx(n(0), n(1));
    else
        v << cplx(n(0), -n(1)), -n(2);
    return v;
}

Eigen::Vector2cd spin_vec(Spin s) {
    Eigen::Vector2cd v;
    if (s == Spin::up)
        v << 1.0, 0.0;
    else
        v << 0.0, 1.0;
    return v;
}

Bispinor place(Energy e, const Eigen::Vector2cd& big, const Eigen::Vector2cd& small) {
    Bispinor out;
    if (e == Energy::positive) {
        out << big(0), big(1), small(0), small(1);
    } else {
        out << -small(0), -small(1), big(0), big(1);
    }
    return out;
}

cplx center_phase(const WavePacket& u, const Vec3& k) {
    const double s = sign_of(u.sign);
    return std::polar(1.0, s * omega(k.norm(), u.mass) * u.center.t - k.dot(u.center.x));
}

double filter_product(const WavePacket& u, double kabs) {
    double f = 1.0;
    for (const auto& g : u.filters) f *= g(kabs);
    return f;
}

// Radial part F(|k|) of lambda for packets isotropic about the origin: no k3 factor, no phase.
cplx radial_factor(const WavePacket& u, double k) {
    switch (u.kind) {
        case ProfileKind::gaussian:
        case ProfileKind::k3_gaussian: return u.amplitude * std::exp(-k * k / (2.0 * u.width * u.width)) * filter_product(u, k);
        case ProfileKind::radial:
            if (k > u.radial_support) return 0.0;
            return u.amplitude * u.radial_profile(k) * filter_product(u, k);
        case ProfileKind::mode: break;
    }
    throw InvalidArgument("radial_factor: mode packets have no radial profile");
}

double packet_scale(const WavePacket& u) {
    switch (u.kind) {
        case ProfileKind::gaussian: return u.width;
        case ProfileKind::k3_gaussian: return u.width;
        case ProfileKind::radial: return u.radial_scale;
        case ProfileKind::mode: return u.momentum.norm() + u.cell_half;
    }
    return 1.0;
}

double packet_support(const WavePacket& u, const CutoffProfile* g) {
    double s = std::numeric_limits<double>::infinity();
    if (u.kind == ProfileKind::radial) s = u.radial_support;
    for (const auto& f : u.filters) s = std::min(s, f.support_radius());
    if (g) s = std::min(s, g->support_radius());
    return s;
}

std::vector<double> packet_breaks(const WavePacket& u, const CutoffProfile* g) {
    std::vector<double> b;
    if (u.kind == ProfileKind::radial) b = u.radial_breaks;
    for (const auto& f : u.filters) b.insert(b.end(), f.breakpoints().begin(), f.breakpoints().end());
    if (g) b.insert(b.end(), g->breakpoints().begin(), g->breakpoints().end());
    return b;
}

// Upper integration limit for a radial factor with polynomial weight k^5 (omega+m)^2.
double radial_upper(const std::function<double(double)>& absF, double scale, double support, double m) {
    auto env = [&](double k) {
        const double w = omega(k, m) + m;
        return std::pow(k, 5) * w * w * absF(k);
    };
    double r;
    if (std::isfinite(support)) {
        try {
            r = truncation_radius(env, std::min(scale, support));
        } catch (const NumericalFailure&) {
            r = support;
        }
        return std::min(r, support);
    }
    return truncation_radius(env, scale);
}

RadialProblem evaluation_problem(const WavePacket& u, const CutoffProfile* g) {
    const double m = u.mass;
    auto F = [u, g](double k) -> cplx {
        cplx v = radial_factor(u, k);
        if (g) v *= (*g)(k);
        return v;
    };
    RadialProblem P;
    P.mass = m;
    P.scale = packet_scale(u);
    if (g && g->decays()) P.scale = std::min(P.scale, g->scale());
    P.breaks = packet_breaks(u, g);
    P.upper = radial_upper([&](double k) { return std::abs(F(k)); }, packet_scale(u), packet_support(u, g), m);
    if (u.kind == ProfileKind::k3_gaussian) {
        P.weights = [F, m](double k) -> std::array<cplx, 4> {
            const cplx f = F(k);
            return {0.0, f * (omega(k, m) + m), f, f};
        };
    } else {
        P.weights = [F, m](double k) -> std::array<cplx, 4> {
            const cplx f = F(k);
            return {f, f / (omega(k, m) + m), 0.0, 0.0};
        };
    }
    return P;
}

Bispinor evaluate_radial(const WavePacket& u, const SpacetimePoint& x, const CutoffProfile* g, const EvalOptions& opt) {
    const SpacetimePoint d = x - u.center;
    const double r = d.x.norm();
    const Vec3 n = r > 0.0 ? Vec3(d.x / r) : Vec3::Zero();
    const int s = sign_of(u.sign);
    const auto P = evaluation_problem(u, g);
    const CVec<4> mo = radial_moments(P, s, d.t, r, opt.quad);
    const Eigen::Vector2cd e = spin_vec(u.spin);
    Eigen::Vector2cd big, small;
    if (u.kind == ProfileKind::k3_gaussian) {
        big = I * n(2) * mo(1) * e;
        small = mo(2) * sigma_dot(Vec3(0, 0, 1), u.spin) - mo(3) * n(2) * sigma_dot(n, u.spin);
    } else {
        big = mo(0) * e;
        small = I * mo(1) * sigma_dot(n, u.spin);
    }
    return inv_norm3 * place(u.sign, big, small);
}

// ---- Gauss-Hermite tensor rules ---------------------------------------------

struct HermiteRule {
    std::vector<double> x, w;
};

const HermiteRule& hermite_rule(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<HermiteRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) {
        gsl_integration_fixed_workspace* ws = gsl_integration_fixed_alloc(gsl_integration_fixed_hermite, n, 0.0, 1.0, 0.0, 0.0);
        if (!ws) throw NumericalFailure("Gauss-Hermite rule allocation failed");
        auto r = std::make_unique<HermiteRule>();
        const double* xs = gsl_integration_fixed_nodes(ws);
        const double* ws_ = gsl_integration_fixed_weights(ws);
        r->x.assign(xs, xs + n);
        r->w.assign(ws_, ws_ + n);
        gsl_integration_fixed_free(ws);
        slot = std::move(r);
    }
    return *slot;
}

// int exp(-|k-c|^2/(2 w^2)) f(k) d^3k, refining the rule until two successive values agree.
template <int N, class F>
CVec<N> hermite_integrate(const Vec3& c, double w, const F& f, const EvalOptions& opt) {
    auto apply = [&](int n, double* l1) {
        const auto& R = hermite_rule(n);
        const double a = std::sqrt(2.0) * w;
        CVec<N> acc = CVec<N>::Zero();
        double mag = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) {
                    const double wt = R.w[i] * R.w[j] * R.w[l];
                    if (wt < 1e-300) continue;
                    const Vec3 k = c + a * Vec3(R.x[i], R.x[j], R.x[l]);
                    const CVec<N> v = f(k);
                    acc += wt * v;
                    mag += wt * v.cwiseAbs().sum();
                }
        *l1 = mag * a * a * a;
        return CVec<N>(acc * (a * a * a));
    };
    double l1 = 0.0;
    int n = opt.hermite_min;
    CVec<N> prev = apply(n, &l1);
    while (true) {
        const int next = std::min(opt.hermite_max, n + n / 2);
        if (next <= n) break;
        CVec<N> cur = apply(next, &l1);
        const double diff = (cur - prev).cwiseAbs().sum();
        if (diff <= std::max(opt.hermite_rel * cur.cwiseAbs().sum(), 1e-13 * l1)) return cur;
        prev = cur;
        n = next;
    }
    throw NumericalFailure("Gauss-Hermite integration did not converge with " + std::to_string(n) + " nodes per axis");
}

// lambda without the exp(-|k-p|^2/(2w^2)) factor (gaussian kinds) and without any cutoff.
cplx lambda_rest(const WavePacket& u, const Vec3& k) {
    const double ka = k.norm();
    cplx v = u.amplitude * filter_product(u, ka) * center_phase(u, k);
    if (u.kind == ProfileKind::k3_gaussian) v *= (omega(ka, u.mass) + u.mass) * k(2);
    if (u.kind == ProfileKind::radial) v *= ka > u.radial_support ? cplx(0.0) : u.radial_profile(ka);
    return v;
}

bool has_gaussian(const WavePacket& u) {
    return u.kind == ProfileKind::gaussian || u.kind == ProfileKind::k3_gaussian;
}

Vec3 gaussian_center(const WavePacket& u) { return u.kind == ProfileKind::gaussian ? u.momentum : Vec3::Zero(); }

// Gaussian packets: the integrand without the Gaussian weight, omega and the phase computed once per node.
// out(k, omega, v) maps the plane-wave spinor v = lambda chi exp(i(k.x - s omega t)) to the integrated quantity.
template <int N, class Out>
CVec<N> hermite_packet_integral(const WavePacket& u, const SpacetimePoint& x, const CutoffProfile* g,
                                const EvalOptions& opt, const Out& out) {
    const SpacetimePoint d = x - u.center;
    const double s = sign_of(u.sign), m = u.mass;
    auto f = [&](const Vec3& k) -> CVec<N> {
        const double k2 = k.squaredNorm(), ka = std::sqrt(k2), w = std::sqrt(k2 + m * m);
        double a = filter_product(u, ka);
        if (g) a *= (*g)(ka);
        if (a == 0.0) return CVec<N>::Zero();
        const double ph = k.dot(d.x) - s * w * d.t;
        const cplx c = u.amplitude * a * cplx(std::cos(ph), std::sin(ph));
        Bispinor v;
        const cplx kp(k(0), k(1)), km(k(0), -k(1));
        const double inv = 1.0 / (w + m);
        if (u.spin == Spin::up) {
            if (u.sign == Energy::positive) v << 1.0, 0.0, k(2) * inv, kp * inv;
            else v << -k(2) * inv, -kp * inv, 1.0, 0.0;
        } else {
            if (u.sign == Energy::positive) v << 0.0, 1.0, km * inv, -k(2) * inv;
            else v << -km * inv, k(2) * inv, 0.0, 1.0;
        }
        return out(k, w, Bispinor(c * v));
    };
    return inv_norm3 * hermite_integrate<N>(gaussian_center(u), u.width, f, opt);
}

Bispinor evaluate_hermite(const WavePacket& u, const SpacetimePoint& x, const CutoffProfile* g, const EvalOptions& opt) {
    return hermite_packet_integral<4>(u, x, g, opt, [](const Vec3&, double, const Bispinor& v) { return v; });
}

// d_t and d_j act on the plane wave as -i s omega and i k_j; one pass over the nodes.
std::array<Bispinor, 4> gradient_hermite(const WavePacket& u, const SpacetimePoint& x, const CutoffProfile* g,
                                         const EvalOptions& opt) {
    const double s = sign_of(u.sign);
    const CVec<16> r = hermite_packet_integral<16>(u, x, g, opt, [s](const Vec3& k, double w, const Bispinor& v) {
        CVec<16> o;
        o.segment<4>(0) = (-I * s * w) * v;
        for (int j = 0; j < 3; ++j) o.segment<4>(4 * (j + 1)) = (I * k(j)) * v;
        return o;
    });
    std::array<Bispinor, 4> out;
    for (int mu = 0; mu < 4; ++mu) out[mu] = r.segment<4>(4 * mu);
    return out;
}

double mode_regularization(const WavePacket& u, const CutoffProfile* g, const EvalOptions& opt) {
    if (!g) return 1.0;
    if (opt.cell_average) return std::sqrt(cell_mean_square(*g, u.momentum, u.cell_half));
    return (*g)(u.momentum.norm());
}

Bispinor evaluate_mode(const WavePacket& u, const SpacetimePoint& x, const CutoffProfile* g, const EvalOptions& opt) {
    const int s = sign_of(u.sign);
    const SpacetimePoint d = x - u.center;
    const Vec3& k = u.momentum;
    const cplx ph = std::polar(1.0, k.dot(d.x) - s * omega(k.norm(), u.mass) * d.t);
    const double reg = mode_regularization(u, g, opt) * filter_product(u, k.norm());
    return inv_norm3 * u.amplitude * std::sqrt(u.cell_volume) * reg * ph *
           unit_fundamental_spinor(k, u.sign, u.spin, u.mass);
}

Bispinor packet_spinor(const WavePacket& u, const Vec3& k) {
    return u.kind == ProfileKind::mode ? unit_fundamental_spinor(k, u.sign, u.spin, u.mass)
                                       : fundamental_spinor(k, u.sign, u.spin, u.mass);
}

}  // namespace

std::string to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::gaussian: return "gaussian";
        case ProfileKind::k3_gaussian: return "k3_gaussian";
        case ProfileKind::radial: return "radial";
        case ProfileKind::mode: return "mode";
    }
    return "gaussian";
}

cplx WavePacket::lambda(const Vec3& k) const {
    if (kind == ProfileKind::mode) {
        if ((k - momentum).cwiseAbs().maxCoeff() > cell_half) return 0.0;
        return amplitude * filter_product(*this, k.norm()) * center_phase(*this, k) / std::sqrt(cell_volume);
    }
    cplx v = lambda_rest(*this, k);
    if (has_gaussian(*this)) v *= std::exp(-(k - gaussian_center(*this)).squaredNorm() / (2.0 * width * width));
    return v;
}

// ---- factories --------------------------------------------------------------

double special_a_constant(double sigma) { return std::pow(2.0 * std::sqrt(pi) * sigma, -3); }
double special_b_constant(double sigma) { return std::pow(2.0, -4) * std::pow(pi, -1.5) * std::pow(sigma, -5); }
double k3_gaussian_moment(double sigma) { return 16.0 * std::pow(pi, 1.5) * std::pow(sigma, 5); }

WavePacket special_a(Spin s, double sigma, const SpacetimePoint& x0, double m) {
    if (!(sigma > 0.0)) throw InvalidArgument("special_a: sigma must be positive");
    WavePacket u = gaussian_packet(Energy::negative, s, std::sqrt(2.0) * sigma, Vec3::Zero(), x0,
                                   std::pow(2.0 * pi, 1.5) * special_a_constant(sigma), m);
    return u;
}

WavePacket special_b(Spin s, double sigma, const SpacetimePoint& x0, double m) {
    if (!(sigma > 0.0)) throw InvalidArgument("special_b: sigma must be positive");
    check_mass(m);
    check_point(x0);
    WavePacket u;
    u.sign = Energy::negative;
    u.spin = s;
    u.kind = ProfileKind::k3_gaussian;
    u.mass = m;
    u.width = std::sqrt(2.0) * sigma;
    u.center = x0;
    u.amplitude = std::pow(2.0 * pi, 1.5) * special_b_constant(sigma);
    return u;
}

WavePacket gaussian_packet(Energy e, Spin s, double width, const Vec3& p, const SpacetimePoint& x0, cplx amplitude,
                           double m) {
    check_mass(m);
    check_point(x0);
    if (!(width > 0.0) || !std::isfinite(width)) throw InvalidArgument("gaussian packet: width must be positive");
    if (!p.allFinite()) throw InvalidArgument("gaussian packet: non-finite momentum centre");
    WavePacket u;
    u.sign = e;
    u.spin = s;
    u.kind = ProfileKind::gaussian;
    u.mass = m;
    u.width = width;
    u.momentum = p;
    u.center = x0;
    u.amplitude = amplitude;
    return u;
}

WavePacket delta_packet(const Vec3& p, double sigma, double m) {
    return gaussian_packet(Energy::negative, Spin::up, sigma, p, SpacetimePoint{},
                           std::pow(std::sqrt(2.0 * pi) * sigma, -3), m);
}

WavePacket radial_packet(Energy e, Spin s, std::function<cplx(double)> f, double scale, const SpacetimePoint& x0,
                         double m, double support, std::vector<double> breaks) {
    check_mass(m);
    check_point(x0);
    if (!f) throw InvalidArgument("radial packet: empty profile");
    if (!(scale > 0.0)) throw InvalidArgument("radial packet: scale must be positive");
    WavePacket u;
    u.sign = e;
    u.spin = s;
    u.kind = ProfileKind::radial;
    u.mass = m;
    u.center = x0;
    u.radial_profile = std::move(f);
    u.radial_scale = scale;
    u.radial_support = support;
    u.radial_breaks = std::move(breaks);
    return u;
}

WavePacket mode_packet(Energy e, Spin s, const Vec3& kn, double cell_half, double m, cplx amplitude) {
    check_mass(m);
    if (!(cell_half > 0.0)) throw InvalidArgument("mode packet: cell size must be positive");
    WavePacket u;
    u.sign = e;
    u.spin = s;
    u.kind = ProfileKind::mode;
    u.mass = m;
    u.momentum = kn;
    u.cell_half = cell_half;
    u.cell_volume = std::pow(2.0 * cell_half, 3);
    u.amplitude = amplitude;
    return u;
}

Bispinor unit_fundamental_spinor(const Vec3& k, Energy e, Spin s, double m) {
    const Bispinor c = fundamental_spinor(k, e, s, m);
    return c / c.norm();
}

// ---- evaluation -------------------------------------------------------------

Bispinor evaluate_with(const WavePacket& u, const SpacetimePoint& x, const CutoffProfile* g, const EvalOptions& opt) {
    check_point(x);
    switch (u.kind) {
        case ProfileKind::mode: return evaluate_mode(u, x, g, opt);
        case ProfileKind::gaussian:
            if (u.momentum.squaredNorm() > 0.0) return evaluate_hermite(u, x, g, opt);
            return evaluate_radial(u, x, g, opt);
        default: return evaluate_radial(u, x, g, opt);
    }
}

Bispinor evaluate(const WavePacket& u, const SpacetimePoint& x, const EvalOptions& opt) {
    return evaluate_with(u, x, nullptr, opt);
}

Bispinor evaluate_regularized(const WavePacket& u, const SpacetimePoint& x, const CutoffProfile& g,
                              const EvalOptions& opt) {
    return evaluate_with(u, x, &g, opt);
}

WavePacket regularize_profile(const WavePacket& u, const CutoffProfile& g) {
    WavePacket v = u;
    v.filters.push_back(g);
    return v;
}

double cell_mean_square(const CutoffProfile& g, const Vec3& kn, double half) {
    // Does a breakpoint of g cross the cell?
    double rmin2 = 0.0, rmax2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double lo = kn(i) - half, hi = kn(i) + half;
        const double near = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
        const double far = std::max(std::abs(lo), std::abs(hi));
        rmin2 += near * near;
        rmax2 += far * far;
    }
    const double rmin = std::sqrt(rmin2), rmax = std::sqrt(rmax2);
    bool edge = false;
    for (double b : g.breakpoints())
        if (b >= rmin && b <= rmax) edge = true;
    double acc = 0.0;
    if (edge) {
        const int n = 16;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    const Vec3 k = kn + half * Vec3((2 * a + 1.0) / n - 1.0, (2 * b + 1.0) / n - 1.0, (2 * c + 1.0) / n - 1.0);
                    const double v = g(k.norm());
                    acc += v * v;
                }
        return acc / (n * n * n);
    }
    static const double x3[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double w3[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                const Vec3 k = kn + half * Vec3(x3[a], x3[b], x3[c]);
                const double v = g(k.norm());
                acc += w3[a] * w3[b] * w3[c] * v * v;
            }
    return acc;
}

// ---- inner products -----------------------------------------------------------

cplx inner_product(const WavePacket& u, const WavePacket& v, const EvalOptions& opt) {
    if (u.sign != v.sign || u.spin != v.spin) return 0.0;
    if (u.mass != v.mass) throw InvalidArgument("inner_product: packets with different masses");
    const double m = u.mass;
    const int s = sign_of(u.sign);
    if (u.kind == ProfileKind::mode || v.kind == ProfileKind::mode) {
        const WavePacket& md = u.kind == ProfileKind::mode ? u : v;
        if (u.kind == ProfileKind::mode && v.kind == ProfileKind::mode &&
            ((u.momentum - v.momentum).squaredNorm() > 0.0 || u.cell_half != v.cell_half))
            return 0.0;
        const Vec3& k = md.momentum;
        return md.cell_volume * std::conj(u.lambda(k)) * v.lambda(k) * packet_spinor(u, k).dot(packet_spinor(v, k));
    }
    if (u.isotropic_about_origin() && v.isotropic_about_origin()) {
        const int q = (u.kind == ProfileKind::k3_gaussian) + (v.kind == ProfileKind::k3_gaussian);
        auto F = [u, v, m, q](double k) -> cplx {
            const double w = omega(k, m);
            return std::conj(radial_factor(u, k)) * radial_factor(v, k) * (2.0 * w / (w + m)) * std::pow(w + m, q);
        };
        RadialProblem P;
        P.mass = m;
        P.scale = std::min(packet_scale(u), packet_scale(v));
        P.breaks = packet_breaks(u, nullptr);
        const auto bv = packet_breaks(v, nullptr);
        P.breaks.insert(P.breaks.end(), bv.begin(), bv.end());
        P.upper = radial_upper([&](double k) { return std::abs(F(k)); }, P.scale,
                               std::min(packet_support(u, nullptr), packet_support(v, nullptr)), m);
        P.weights = [F](double k) -> std::array<cplx, 4> {
            const cplx f = F(k);
            return {f, f, f, f};
        };
        const SpacetimePoint d = u.center - v.center;
        const double r = d.x.norm();
        const Vec3 n = r > 0.0 ? Vec3(d.x / r) : Vec3::Zero();
        const CVec<4> mo = radial_moments(P, s, d.t, r, opt.quad);
        if (q == 0) return mo(0);
        if (q == 1) return I * n(2) * mo(1);
        return mo(2) - n(2) * n(2) * mo(3);
    }
    // At least one Gaussian off the origin.
    auto weight = [m](const Vec3& k) {
        const double w = omega(k.norm(), m);
        return 2.0 * w / (w + m);
    };
    if (has_gaussian(u) && has_gaussian(v)) {
        const double wu = u.width, wv = v.width;
        const double W2 = 1.0 / (1.0 / (wu * wu) + 1.0 / (wv * wv));
        const Vec3 pu = gaussian_center(u), pv = gaussian_center(v);
        const Vec3 P = W2 * (pu / (wu * wu) + pv / (wv * wv));
        const double C = std::exp(-(pu - pv).squaredNorm() / (2.0 * (wu * wu + wv * wv)));
        auto f = [&](const Vec3& k) -> CVec<1> {
            CVec<1> r;
            r << std::conj(lambda_rest(u, k)) * lambda_rest(v, k) * weight(k);
            return r;
        };
        return C * hermite_integrate<1>(P, std::sqrt(W2), f, opt)(0);
    }
    const WavePacket& gp = has_gaussian(u) ? u : v;
    const bool u_is_g = &gp == &u;
    auto f = [&](const Vec3& k) -> CVec<1> {
        const cplx a = u_is_g ? lambda_rest(u, k) : u.lambda(k);
        const cplx b = u_is_g ? v.lambda(k) : lambda_rest(v, k);
        CVec<1> r;
        r << std::conj(a) * b * weight(k);
        return r;
    };
    return hermite_integrate<1>(gaussian_center(gp), gp.width, f, opt)(0);
}

double packet_l2_norm(const WavePacket& u, const EvalOptions& opt) {
    return std::sqrt(std::max(0.0, inner_product(u, u, opt).real()));
}

double profile_l2_norm(const WavePacket& u, const EvalOptions& opt) {
    const double m = u.mass;
    if (u.kind == ProfileKind::mode) return std::abs(u.amplitude) * filter_product(u, u.momentum.norm());
    if (u.isotropic_about_origin()) {
        const bool k3 = u.kind == ProfileKind::k3_gaussian;
        auto F = [&](double k) {
            const double a = std::norm(radial_factor(u, k));
            return k3 ? a * std::pow(omega(k, m) + m, 2) / 3.0 * k * k : a;
        };
        RadialProblem P;
        P.mass = m;
        P.scale = packet_scale(u);
        P.breaks = packet_breaks(u, nullptr);
        P.upper = radial_upper(F, P.scale, packet_support(u, nullptr), m);
        P.weights = [F](double k) -> std::array<cplx, 4> { return {F(k), 0.0, 0.0, 0.0}; };
        return std::sqrt(radial_moments(P, 1, 0.0, 0.0, opt.quad)(0).real());
    }
    auto f = [&](const Vec3& k) -> CVec<1> {
        CVec<1> r;
        r << std::norm(lambda_rest(u, k));
        return r;
    };
    // |exp(-|k-p|^2/(2w^2))|^2 has width w / sqrt 2.
    return std::sqrt(hermite_integrate<1>(u.momentum, u.width / std::sqrt(2.0), f, opt)(0).real());
}

WavePacket translate(const WavePacket& u, const SpacetimePoint& a) {
    check_point(a);
    WavePacket v = u;
    v.center = u.center - a;
    return v;
}

// ---- SolutionFamily -----------------------------------------------------------

SolutionFamily::SolutionFamily(std::vector<WavePacket> packets)
    : basis_(std::move(packets)),
      coeffs_(Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(basis_.size()),
                                         static_cast<Eigen::Index>(basis_.size()))) {}

SolutionFamily::SolutionFamily(std::vector<WavePacket> basis, Eigen::MatrixXcd coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (coeffs_.rows() != static_cast<Eigen::Index>(basis_.size()))
        throw InvalidArgument("SolutionFamily: coefficient rows must match the basis size");
}

const Eigen::MatrixXcd& SolutionFamily::basis_gram(const EvalOptions& opt) const {
    if (gram_cache_) return *gram_cache_;
    const Eigen::Index n = static_cast<Eigen::Index>(basis_.size());
    Eigen::MatrixXcd G(n, n);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<cplx> vals(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t p) {
        vals[p] = inner_product(basis_[pairs[p].first], basis_[pairs[p].second], opt);
    });
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs[p];
        G(i, j) = vals[p];
        G(j, i) = std::conj(vals[p]);
        if (i == j) G(i, i) = vals[p].real();
    }
    gram_cache_ = G;
    return *gram_cache_;
}

Eigen::MatrixXcd SolutionFamily::gram(const EvalOptions& opt) const {
    return coeffs_.adjoint() * basis_gram(opt) * coeffs_;
}

Eigen::MatrixXcd SolutionFamily::basis_values(const SpacetimePoint& x, const CutoffProfile* g,
                                              const EvalOptions& opt) const {
    Eigen::MatrixXcd V(4, static_cast<Eigen::Index>(basis_.size()));
    std::vector<Bispinor> cols(basis_.size());
    parallel_for(basis_.size(), [&](std::size_t i) { cols[i] = evaluate_with(basis_[i], x, g, opt); });
    for (std::size_t i = 0; i < cols.size(); ++i) V.col(static_cast<Eigen::Index>(i)) = cols[i];
    return V;
}

Eigen::MatrixXcd SolutionFamily::values(const SpacetimePoint& x, const CutoffProfile* g, const EvalOptions& opt) const {
    return basis_values(x, g, opt) * coeffs_;
}

SolutionFamily SolutionFamily::with_coeffs(Eigen::MatrixXcd c) const {
    SolutionFamily f(basis_, std::move(c));
    f.gram_cache_ = gram_cache_;
    return f;
}

SolutionFamily SolutionFamily::translated(const SpacetimePoint& a) const {
    std::vector<WavePacket> b;
    b.reserve(basis_.size());
    for (const auto& u : basis_) b.push_back(translate(u, a));
    SolutionFamily f(std::move(b), coeffs_);
    f.gram_cache_ = gram_cache_;  // translations are unitary
    return f;
}

SolutionFamily SolutionFamily::subfamily(const std::vector<int>& cols) const {
    Eigen::MatrixXcd c(coeffs_.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] < 0 || cols[i] >= coeffs_.cols()) throw InvalidArgument("subfamily: column out of range");
        c.col(static_cast<Eigen::Index>(i)) = coeffs_.col(cols[i]);
    }
    return with_coeffs(std::move(c));
}

SolutionFamily SolutionFamily::joined(const SolutionFamily& other) const {
    std::vector<WavePacket> b = basis_;
    b.insert(b.end(), other.basis_.begin(), other.basis_.end());
    const Eigen::Index r1 = coeffs_.rows(), r2 = other.coeffs_.rows();
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(r1 + r2, coeffs_.cols() + other.coeffs_.cols());
    c.topLeftCorner(r1, coeffs_.cols()) = coeffs_;
    c.bottomRightCorner(r2, other.coeffs_.cols()) = other.coeffs_;
    return SolutionFamily(std::move(b), std::move(c));
}

SolutionFamily orthonormalize_family(const SolutionFamily& raw, const EvalOptions& opt) {
    const Eigen::MatrixXcd G = raw.gram(opt);
    if (G.rows() == 0) return raw;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12)
        throw DegenerateFamily("orthonormalize_family: Gram matrix singular or ill-conditioned (eigenvalues " +
                               std::to_string(lo) + ", " + std::to_string(hi) + ")");
    Eigen::LLT<Eigen::MatrixXcd> llt(G);
    if (llt.info() != Eigen::Success) throw DegenerateFamily("orthonormalize_family: Cholesky failed");
    const Eigen::MatrixXcd L = llt.matrixL();
    const Eigen::MatrixXcd Linv =
        L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXcd::Identity(G.rows(), G.cols()));
    return raw.with_coeffs(raw.coeffs() * Linv.adjoint());
}

// ---- derivatives ---------------------------------------------------------------

std::vector<SpacetimePoint> ball_samples(const SpacetimePoint& x, double eps) {
    std::vector<SpacetimePoint> pts{x};
    for (int mu = 0; mu < 4; ++mu)
        for (int sg : {-1, 1}) {
            SpacetimePoint p = x;
            if (mu == 0)
                p.t += sg * eps;
            else
                p.x(mu - 1) += sg * eps;
            pts.push_back(p);
        }
    for (int b = 0; b < 16; ++b) {
        SpacetimePoint p = x;
        p.t += (b & 1 ? 0.5 : -0.5) * eps;
        for (int j = 0; j < 3; ++j) p.x(j) += (b & (2 << j) ? 0.5 : -0.5) * eps;
        pts.push_back(p);
    }
    return pts;
}

namespace {

double derivative_scale(const WavePacket& u, const CutoffProfile* g) {
    double K = std::max(u.mass, 3.0 * packet_scale(u));
    if (u.kind == ProfileKind::gaussian) K = std::max(K, u.momentum.norm() + 3.0 * u.width);
    if (u.kind == ProfileKind::mode) K = std::max(K, omega(u.momentum.norm(), u.mass));
    if (g && g->decays()) K = std::min(K, std::max(u.mass, 3.0 * g->scale()));
    return K;
}

}  // namespace

std::array<Bispinor, 4> gradient(const WavePacket& u, const SpacetimePoint& x, const CutoffProfile* g,
                                 const EvalOptions& opt, double h) {
    if (h <= 0.0 && u.kind == ProfileKind::gaussian && u.momentum.squaredNorm() > 0.0)
        return gradient_hermite(u, x, g, opt);
    const double step = h > 0.0 ? h : 0.02 / derivative_scale(u, g);
    std::array<Bispinor, 4> out;
    for (int mu = 0; mu < 4; ++mu) {
        auto at = [&](double d) {
            SpacetimePoint p = x;
            if (mu == 0)
                p.t += d;
            else
                p.x(mu - 1) += d;
            return evaluate_with(u, p, g, opt);
        };
        out[mu] = (-at(2 * step) + 8.0 * at(step) - 8.0 * at(-step) + at(-2 * step)) / (12.0 * step);
    }
    return out;
}

double jacobian_density(const std::array<Bispinor, 4>& grad) {
    double acc = 0.0;
    for (int c = 0; c < 4; ++c) {
        double re = 0.0, im = 0.0;
        for (int mu = 0; mu < 4; ++mu) {
            re += std::pow(grad[mu](c).real(), 2);
            im += std::pow(grad[mu](c).imag(), 2);
        }
        acc += std::sqrt(re) + std::sqrt(im);
    }
    return acc;
}

std::array<double, 4> momentum_l1_norms(const WavePacket& u, const EvalOptions& opt) {
    const double m = u.mass;
    std::array<double, 4> out{};
    if (u.kind == ProfileKind::mode) {
        const double a = std::abs(u.amplitude) * std::sqrt(u.cell_volume) * filter_product(u, u.momentum.norm());
        out[0] = a * omega(u.momentum.norm(), m);
        for (int j = 0; j < 3; ++j) out[j + 1] = a * std::abs(u.momentum(j));
        return out;
    }
    if (u.isotropic_about_origin()) {
        const bool k3 = u.kind == ProfileKind::k3_gaussian;
        // Angular factors: int |n_j| = 2 pi, int n_3^2 = 4 pi / 3, int |n_1 n_3| = 8 / 3.
        auto F = [&](double k) {
            const double a = std::abs(radial_factor(u, k));
            return k3 ? a * (omega(k, m) + m) : a;
        };
        RadialProblem P;
        P.mass = m;
        P.scale = packet_scale(u);
        P.breaks = packet_breaks(u, nullptr);
        P.upper = radial_upper(F, P.scale, packet_support(u, nullptr), m);
        auto W = [F, m, k3](double k) -> std::array<double, 4> {
            const double f = F(k);
            if (k3)
                return {f * k * omega(k, m) * 2.0 * pi, f * k * k * (8.0 / 3.0), f * k * k * (8.0 / 3.0),
                        f * k * k * (4.0 * pi / 3.0)};
            return {f * omega(k, m) * 4.0 * pi, f * k * 2.0 * pi, f * k * 2.0 * pi, f * k * 2.0 * pi};
        };
        // radial_moments integrates against 4 pi k^2 dk; the angular factors are already in W.
        for (int mu = 0; mu < 4; ++mu) {
            RadialProblem S = P;
            S.weights = [W, mu](double k) -> std::array<cplx, 4> { return {W(k)[mu], 0.0, 0.0, 0.0}; };
            out[mu] = radial_moments(S, 1, 0.0, 0.0, opt.quad)(0).real() / (4.0 * pi);
        }
        return out;
    }
    // |k_j| has a kink that Gauss-Hermite cannot resolve; without filters the spatial
    // components are folded-normal means instead.
    const bool closed = u.kind == ProfileKind::gaussian && u.filters.empty();
    auto f = [&](const Vec3& k) -> CVec<4> {
        const double a = std::abs(lambda_rest(u, k));
        CVec<4> r;
        r << a * omega(k.norm(), m), a * std::abs(k(0)), a * std::abs(k(1)), a * std::abs(k(2));
        if (closed) r.tail<3>().setZero();
        return r;
    };
    EvalOptions o = opt;
    o.hermite_rel = std::max(o.hermite_rel, 1e-6);
    const CVec<4> r = hermite_integrate<4>(u.momentum, u.width, f, o);
    for (int mu = 0; mu < 4; ++mu) out[mu] = r(mu).real();
    if (closed) {
        const double w = u.width, mass = std::abs(u.amplitude) * std::pow(2.0 * pi * w * w, 1.5);
        for (int j = 0; j < 3; ++j) {
            const double p = u.momentum(j);
            out[j + 1] = mass * (w * std::sqrt(2.0 / pi) * std::exp(-p * p / (2 * w * w)) + p * std::erf(p / (std::sqrt(2.0) * w)));
        }
    }
    return out;
}

JacobianEstimate jacobian_sup(const WavePacket& u, const SpacetimePoint& x, double eps, const EvalOptions& opt) {
    if (!(eps >= 0.0)) throw InvalidArgument("jacobian_sup: eps must be nonnegative");
    const auto pts = ball_samples(x, eps);
    std::vector<double> vals(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { vals[i] = jacobian_density(gradient(u, pts[i], nullptr, opt, 0.0)); });
    JacobianEstimate J;
    J.sampled = *std::max_element(vals.begin(), vals.end());
    J.samples = static_cast<int>(pts.size());
    const auto l1 = momentum_l1_norms(u, opt);
    double s = 0.0;
    for (double v : l1) s += v;
    J.analytic_bound = 8.0 * std::sqrt(2.0) * inv_norm3 * s;
    return J;
}

double family_jacobian_sup(const SolutionFamily& f, int i, const SpacetimePoint& x, double eps, const EvalOptions& opt) {
    if (i < 0 || static_cast<std::size_t>(i) >= f.size()) throw InvalidArgument("family_jacobian_sup: index");
    const auto pts = ball_samples(x, eps);
    const auto& B = f.basis();
    const Eigen::VectorXcd c = f.coeffs().col(i);
    std::vector<double> vals(pts.size());
    parallel_for(pts.size(), [&](std::size_t p) {
        std::array<Bispinor, 4> g{Bispinor::Zero(), Bispinor::Zero(), Bispinor::Zero(), Bispinor::Zero()};
        for (std::size_t k = 0; k < B.size(); ++k) {
            if (c(static_cast<Eigen::Index>(k)) == cplx(0.0)) continue;
            const auto gk = gradient(B[k], pts[p], nullptr, opt, 0.0);
            for (int mu = 0; mu < 4; ++mu) g[mu] += c(static_cast<Eigen::Index>(k)) * gk[mu];
        }
        vals[p] = jacobian_density(g);
    });
    return *std::max_element(vals.begin(), vals.end());
}

MollificationBound mollification_pointwise_bounds(const WavePacket& u, const SpacetimePoint& x, const CutoffProfile& g,
                                                  const EvalOptions& opt) {
    MollificationBound b;
    const Bispinor r = evaluate_regularized(u, x, g, opt);
    b.lhs = (r - evaluate(u, x, opt)).norm();
    b.rhs = g.epsilon() * jacobian_sup(u, x, g.epsilon(), opt).sampled;
    b.sup_value = r.norm();
    const double eps = g.epsilon();
    b.sup_bound = pi * std::pow(eps, 2.5) * (mollifier_h0() / std::pow(eps, 4)) * packet_l2_norm(u, opt);
    return b;
}

// ---- position space --------------------------------------------------------------

double position_norm(const WavePacket& u, double t, const EvalOptions& opt) {
    if (u.kind == ProfileKind::mode || u.kind == ProfileKind::k3_gaussian || !u.isotropic_about_origin())
        throw InvalidArgument("position_norm: needs an isotropic packet centred at zero momentum");
    const auto P = evaluation_problem(u, nullptr);
    const int s = sign_of(u.sign);
    const double tau = t - u.center.t;
    auto dens = [&](double r) {
        const CVec<4> mo = radial_moments(P, s, tau, r, opt.quad);
        return std::pow(inv_norm3, 2) * (std::norm(mo(0)) + std::norm(mo(1)));
    };
    const double width = 1.0 / packet_scale(u);
    const double R = truncation_radius([&](double r) { return r * r * dens(r); }, std::abs(tau) + 4.0 * width, 1e-18);
    auto nodes = panel_nodes(0.0, R, std::max(width, 1e-3) / 2.0);
    auto f = [&](double r) {
        CVec<1> v;
        v << 4.0 * pi * r * r * dens(r);
        return v;
    };
    QuadOptions o;
    o.rel_tol = 1e-10;
    QuadReport rep;
    const double n2 = integrate_adaptive<1>(f, nodes, o, &rep)(0).real();
    if (!rep.converged) throw NumericalFailure("position_norm: outer quadrature did not converge");
    return std::sqrt(n2);
}

std::vector<DecaySample> decay_probe(const WavePacket& u, const SpacetimePoint& direction,
                                     const std::vector<double>& radii, const EvalOptions& opt) {
    const double len = std::sqrt(direction.t * direction.t + direction.x.squaredNorm());
    if (!(len > 0.0)) throw InvalidArgument("decay_probe: direction must be nonzero");
    std::vector<DecaySample> out(radii.size());
    parallel_for(radii.size(), [&](std::size_t i) {
        const double r = radii[i];
        if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument("decay_probe: radii must be nonnegative");
        const SpacetimePoint d{direction.t * r / len, Vec3(direction.x * (r / len))};
        DecaySample s;
        s.radius = r;
        s.point = u.center + d;
        s.value = evaluate(u, s.point, opt).norm();
        const double tt = std::abs(d.t), xx = d.x.norm();
        s.shape = (tt + xx) > 0.0 ? std::pow(1.0 + std::max(0.0, tt * tt - xx * xx), 0.25) / std::pow(tt + xx, 2)
                                  : std::numeric_limits<double>::infinity();
        out[i] = s;
    });
    return out;
}

}  // namespace cfslab
