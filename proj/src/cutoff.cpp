#include "cfslab/cutoff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <gsl/gsl_sf_bessel.h>

#include "cfslab/errors.hpp"

namespace cfslab {

namespace {

constexpr double pi = std::numbers::pi;

void check_eps(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("cutoff: epsilon must be positive and finite");
}

// ---- tabulated transform of the standard bump ------------------------------

constexpr double kPhiStep = 0.05;
constexpr double kPhiMax = 320.0;

struct RadialRule {
    std::vector<double> r, w;
};

// Composite 20-point Gauss-Legendre on [0, 1/2].
const RadialRule& bump_rule() {
    static const RadialRule rule = [] {
        using G = boost::math::quadrature::gauss<double, 20>;
        RadialRule q;
        const int panels = 32;
        const double h = 0.5 / panels;
        for (int p = 0; p < panels; ++p) {
            const double c = (p + 0.5) * h;
            for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
                const double x = G::abscissa()[i], w = G::weights()[i];
                q.r.push_back(c + 0.5 * h * x);
                q.w.push_back(0.5 * h * w);
                q.r.push_back(c - 0.5 * h * x);
                q.w.push_back(0.5 * h * w);
            }
        }
        return q;
    }();
    return rule;
}

double bump_radial(double r) {
    const double s = 1.0 - 4.0 * r * r;
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

struct PhiTable {
    std::unique_ptr<boost::math::interpolators::cardinal_quintic_b_spline<double>> spline;
    double h0 = 0.0;
};

const PhiTable& phi_table() {
    static const PhiTable table = [] {
        const auto& q = bump_rule();
        std::vector<double> weight(q.r.size());
        double m3 = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < q.r.size(); ++i) {
            const double b = bump_radial(q.r[i]);
            weight[i] = q.w[i] * std::pow(q.r[i], 3) * b;
            m3 += weight[i];
            sq += q.w[i] * std::pow(q.r[i], 3) * b * b;
        }
        const int n = static_cast<int>(std::lround(kPhiMax / kPhiStep)) + 1;
        std::vector<double> v(n);
        for (int j = 0; j < n; ++j) {
            const double qq = j * kPhiStep;
            double s = 0.0;
            for (std::size_t i = 0; i < q.r.size(); ++i) {
                const double x = qq * q.r[i];
                const double b = x < 1e-6 ? 0.5 - x * x / 16.0 : gsl_sf_bessel_J1(x) / x;
                s += weight[i] * b;
            }
            v[j] = 2.0 * s / m3;
        }
        PhiTable t;
        t.spline = std::make_unique<boost::math::interpolators::cardinal_quintic_b_spline<double>>(
            v, 0.0, kPhiStep);
        // int h1^2 / (int h1)^2 with int f = 2 pi^2 int r^3 f
        t.h0 = (2.0 * pi * pi * sq) / std::pow(2.0 * pi * pi * m3, 2);
        return t;
    }();
    return table;
}

}  // namespace

std::string to_string(CutoffKind k) {
    switch (k) {
        case CutoffKind::sharp: return "sharp";
        case CutoffKind::gaussian: return "gaussian";
        case CutoffKind::mollifier: return "mollifier";
        case CutoffKind::custom: return "custom";
    }
    return "custom";
}

double mollifier_phi(double q) {
    q = std::abs(q);
    if (q >= kPhiMax) return 0.0;
    return (*phi_table().spline)(q);
}

double mollifier_h0() { return phi_table().h0; }

double standard_bump(double x0, double rspatial) { return bump_radial(std::sqrt(x0 * x0 + rspatial * rspatial)); }

// ---- CutoffProfile ---------------------------------------------------------

CutoffProfile CutoffProfile::sharp(double eps) {
    check_eps(eps);
    CutoffProfile c;
    c.kind_ = CutoffKind::sharp;
    c.eps_ = eps;
    c.support_ = 1.0 / eps;
    c.breaks_ = {1.0 / eps};
    c.label_ = "sharp";
    c.eval_ = [K = 1.0 / eps](double k) { return k <= K ? 1.0 : 0.0; };
    return c;
}

CutoffProfile CutoffProfile::gaussian(double eps, double width, double amplitude) {
    check_eps(eps);
    if (!(width > 0.0) || !std::isfinite(width)) throw InvalidArgument("gaussian cutoff: width must be positive");
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
        throw InvalidArgument("gaussian cutoff: amplitude must be positive");
    CutoffProfile c;
    c.kind_ = CutoffKind::gaussian;
    c.eps_ = eps;
    c.width_ = width;
    c.amp_ = amplitude;
    c.label_ = "gaussian";
    c.eval_ = [eps, width](double k) {
        const double s = eps * k / width;
        return std::exp(-0.5 * s * s);
    };
    return c;
}

CutoffProfile CutoffProfile::mollifier(double eps, double m) {
    check_eps(eps);
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("mollifier cutoff: mass must be positive");
    phi_table();
    CutoffProfile c;
    c.kind_ = CutoffKind::mollifier;
    c.eps_ = eps;
    c.m_ = m;
    c.label_ = "mollifier";
    const double qm = kPhiMax / eps;
    c.support_ = qm > m ? std::sqrt((qm * qm - m * m) / 2.0) : 0.0;
    c.eval_ = [eps, m](double k) {
        const double p = mollifier_phi(eps * std::sqrt(2.0 * k * k + m * m));
        return p * p;
    };
    return c;
}

CutoffProfile CutoffProfile::custom(std::function<double(double)> g, std::string label, double support,
                                    std::vector<double> breaks, double eps) {
    check_eps(eps);
    if (!g) throw InvalidArgument("custom cutoff: empty profile");
    if (!(support > 0.0)) throw InvalidArgument("custom cutoff: support must be positive");
    CutoffProfile c;
    c.kind_ = CutoffKind::custom;
    c.eps_ = eps;
    c.support_ = support;
    c.breaks_ = std::move(breaks);
    c.label_ = std::move(label);
    c.eval_ = std::move(g);
    return c;
}

CutoffProfile CutoffProfile::constant(double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("constant cutoff: value must be nonnegative");
    CutoffProfile c;
    c.kind_ = CutoffKind::custom;
    c.label_ = "constant";
    c.decays_ = false;
    c.amp_ = v;
    c.eval_ = [](double) { return 1.0; };
    return c;
}

CutoffProfile CutoffProfile::scaled(double s) const {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("cutoff: scale factor must be nonnegative");
    CutoffProfile c = *this;
    c.amp_ *= s;
    return c;
}

double CutoffProfile::scale() const {
    switch (kind_) {
        case CutoffKind::gaussian: return width_ / eps_;
        default: return 1.0 / eps_;
    }
}

double CutoffProfile::envelope_radius(int power) const {
    if (!decays_) throw InvalidArgument("cutoff '" + label_ + "' does not decay");
    if (kind_ == CutoffKind::sharp) return support_;
    if (kind_ == CutoffKind::gaussian) {
        // k^2 exp(-p (eps k)^2 / (2 w^2)) below 1e-16 of its peak
        const double a = power * eps_ * eps_ / (2.0 * width_ * width_);
        const double peak = 1.0 / (a * std::exp(1.0));
        double k = std::sqrt(1.0 / a);
        while (k * k * std::exp(-a * k * k) > 1e-16 * peak) k *= 1.05;
        return k;
    }
    auto env = [&](double k) { return k * k * std::pow(std::abs((*this)(k)), power); };
    double r;
    try {
        r = truncation_radius(env, scale());
    } catch (const NumericalFailure&) {
        if (std::isfinite(support_)) return support_;
        throw;
    }
    return std::min(r, support_);
}

CutoffProfile cutoff_on_shell(const std::function<double(double, double)>& G4, double m, double support,
                              std::vector<double> breaks) {
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("cutoff_on_shell: mass must be positive");
    return CutoffProfile::custom([G4, m](double k) { return G4(omega(k, m), k); }, "on-shell", support,
                                 std::move(breaks));
}

double sharp4d_shell_radius(double eps, double m) {
    check_eps(eps);
    const double s = 1.0 / (eps * eps) - m * m;
    return s > 0.0 ? std::sqrt(s / 2.0) : 0.0;
}

CutoffNorms cutoff_l1_norms(const CutoffProfile& g, double m, const QuadOptions& opt) {
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("cutoff_l1_norms: mass must be positive");
    const double R = g.envelope_radius(2);
    CutoffNorms out;
    if (R <= 0.0) return out;
    auto nodes = panel_nodes(0.0, R, g.scale() / 4.0, g.breakpoints());
    auto f = [&](double k) {
        const double v = g(k);
        const double a = 4.0 * pi * k * k * v * v;
        CVec<2> r;
        r << a, a / omega(k, m);
        return r;
    };
    QuadOptions o = opt;
    o.rel_tol = std::min(o.rel_tol, 1e-13);
    CVec<2> res = integrate_adaptive<2>(f, nodes, o, &out.quad);
    if (!out.quad.converged)
        throw NumericalFailure("cutoff_l1_norms: quadrature did not converge (" + std::to_string(out.quad.intervals) +
                               " intervals, error " + std::to_string(out.quad.error) + ")");
    out.normA = res(0).real();
    out.normB = res(1).real();
    return out;
}

SharpClosedForms sharp_closed_forms(double eps, double m) {
    check_eps(eps);
    const double me = m * eps;
    SharpClosedForms s;
    s.normA = 4.0 * pi * m * m * m / (3.0 * me * me * me);
    s.m_normB = 2.0 * pi * m * m * m * (std::sqrt(std::pow(me, -4) + std::pow(me, -2)) - std::asinh(1.0 / me));
    return s;
}

// ---- mollifier sample ------------------------------------------------------

namespace {

void validate_bump(const std::function<double(double, double)>& base) {
    // Probe a radial/temporal grid covering [0,1]^2.
    bool nonzero = false;
    const int n = 80;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            const double x0 = static_cast<double>(i) / n, r = static_cast<double>(j) / n;
            const double v = base(x0, r), vm = base(-x0, r);
            if (!std::isfinite(v) || v < 0.0 || vm < 0.0)
                throw InvalidArgument("build_mollifier: base bump must be finite and nonnegative");
            if (x0 * x0 + r * r >= 0.25 && (v != 0.0 || vm != 0.0))
                throw InvalidArgument("build_mollifier: base bump not supported in the ball of radius 1/2");
            if (std::abs(v - vm) > 1e-14 * std::max(1.0, std::abs(v)))
                throw InvalidArgument("build_mollifier: base bump not symmetric under time reflection");
            if (v > 0.0) nonzero = true;
        }
    }
    if (!nonzero) throw InvalidArgument("build_mollifier: base bump vanishes identically");
}

}  // namespace

MollifierSample build_mollifier(const std::function<double(double, double)>& base, double eps, int points_per_axis) {
    check_eps(eps);
    if (points_per_axis < 4 || points_per_axis % 4 != 0 || points_per_axis > 64)
        throw InvalidArgument("build_mollifier: points_per_axis must be a multiple of 4 in [4, 64]");
    validate_bump(base);

    MollifierSample s;
    s.eps = eps;
    s.points_per_axis = points_per_axis;
    s.n = points_per_axis + 1;
    s.spacing = 2.0 * eps / points_per_axis;
    const int n = s.n, c = n / 2, hh = points_per_axis / 4;  // h1 lives on |index| <= hh
    const int nb = 2 * hh + 1;
    const double d = s.spacing, d4 = d * d * d * d;

    // h1_eps(y) = base(y / eps), sampled on the small cube.
    std::vector<double> h1(static_cast<std::size_t>(nb) * nb * nb * nb);
    auto bidx = [nb, hh](int a, int b, int cc, int e) {
        return ((static_cast<std::size_t>(a + hh) * nb + (b + hh)) * nb + (cc + hh)) * nb + (e + hh);
    };
    struct Pt {
        int a, b, c, e;
        double v;
    };
    std::vector<Pt> support;
    double mass = 0.0;
    for (int a = -hh; a <= hh; ++a)
        for (int b = -hh; b <= hh; ++b)
            for (int cc = -hh; cc <= hh; ++cc)
                for (int e = -hh; e <= hh; ++e) {
                    const double r = d * std::sqrt(double(b * b + cc * cc + e * e));
                    const double v = base(d * a / eps, r / eps);
                    h1[bidx(a, b, cc, e)] = v;
                    mass += v * d4;
                    if (v > 0.0) support.push_back({a, b, cc, e, v});
                }
    if (!(mass > 0.0)) throw InvalidArgument("build_mollifier: grid too coarse to resolve the bump");

    auto h1at = [&](int a, int b, int cc, int e) -> double {
        if (std::abs(a) > hh || std::abs(b) > hh || std::abs(cc) > hh || std::abs(e) > hh) return 0.0;
        return h1[bidx(a, b, cc, e)];
    };
    auto direct = [&](int a, int b, int cc, int e) {
        double acc = 0.0;
        for (const auto& p : support) acc += p.v * h1at(a - p.a, b - p.b, cc - p.c, e - p.e);
        return acc * d4 / (mass * mass);
    };

    s.values.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
    auto idx = [n, c](int a, int b, int cc, int e) {
        return ((static_cast<std::size_t>(a + c) * n + (b + c)) * n + (cc + c)) * n + (e + c);
    };
    const int H = 2 * hh;
    // Canonical representatives: a >= 0 and 0 <= b <= cc <= e; the rest follows from the 96 symmetries.
    for (int a = 0; a <= H; ++a)
        for (int b = 0; b <= H; ++b)
            for (int cc = b; cc <= H; ++cc)
                for (int e = cc; e <= H; ++e) {
                    if (a * a + b * b + cc * cc + e * e >= H * H) continue;
                    const double v = direct(a, b, cc, e);
                    std::array<int, 3> sp{b, cc, e};
                    std::sort(sp.begin(), sp.end());
                    do {
                        for (int sa : {-1, 1})
                            for (int s1 : {-1, 1})
                                for (int s2 : {-1, 1})
                                    for (int s3 : {-1, 1})
                                        s.values[idx(sa * a, s1 * sp[0], s2 * sp[1], s3 * sp[2])] = v;
                    } while (std::next_permutation(sp.begin(), sp.end()));
                }

    // Statistics.
    s.integral = 0.0;
    s.max_value = 0.0;
    s.min_value = 0.0;
    for (int a = -c; a <= c; ++a)
        for (int b = -c; b <= c; ++b)
            for (int cc = -c; cc <= c; ++cc)
                for (int e = -c; e <= c; ++e) {
                    const double v = s.values[idx(a, b, cc, e)];
                    s.integral += v * d4;
                    s.max_value = std::max(s.max_value, v);
                    s.min_value = std::min(s.min_value, v);
                    if (v > 0.0)
                        s.support_radius =
                            std::max(s.support_radius, d * std::sqrt(double(a * a + b * b + cc * cc + e * e)));
                }
    // Independent recomputation at non-canonical points.
    const std::array<std::array<int, 4>, 6> probes{{{-3, 5, -1, 2}, {2, -7, 4, 0}, {-1, 1, -1, 6},
                                                    {4, 0, -4, -3}, {-6, 2, 3, -5}, {0, -2, 7, 1}}};
    for (const auto& p : probes) {
        int a = p[0] * hh / 8, b = p[1] * hh / 8, cc = p[2] * hh / 8, e = p[3] * hh / 8;
        s.symmetry_defect = std::max(s.symmetry_defect, std::abs(direct(a, b, cc, e) - s.values[idx(a, b, cc, e)]));
    }
    return s;
}

MollifierSpectrum mollifier_spectrum(const MollifierSample& s, int nfreq, double dq) {
    if (nfreq < 1) throw InvalidArgument("mollifier_spectrum: nfreq must be positive");
    const int n = s.n, c = n / 2;
    const double step = dq / s.eps;
    // Separable DTFT, one axis at a time (last axis first).
    std::vector<cplx> cur(s.values.begin(), s.values.end());
    std::array<int, 4> dims{n, n, n, n};
    for (int axis = 3; axis >= 0; --axis) {
        std::array<int, 4> nd = dims;
        nd[axis] = nfreq;
        std::vector<cplx> next(static_cast<std::size_t>(nd[0]) * nd[1] * nd[2] * nd[3]);
        std::vector<cplx> ph(static_cast<std::size_t>(nfreq) * n);
        for (int f = 0; f < nfreq; ++f)
            for (int i = 0; i < n; ++i) ph[f * n + i] = std::polar(1.0, f * step * s.spacing * (i - c));
        auto lin = [](const std::array<int, 4>& dm, const std::array<int, 4>& ix) {
            return ((static_cast<std::size_t>(ix[0]) * dm[1] + ix[1]) * dm[2] + ix[2]) * dm[3] + ix[3];
        };
        std::array<int, 4> ix{};
        for (ix[0] = 0; ix[0] < nd[0]; ++ix[0])
            for (ix[1] = 0; ix[1] < nd[1]; ++ix[1])
                for (ix[2] = 0; ix[2] < nd[2]; ++ix[2])
                    for (ix[3] = 0; ix[3] < nd[3]; ++ix[3]) {
                        const int f = ix[axis];
                        std::array<int, 4> src = ix;
                        cplx acc = 0.0;
                        for (int i = 0; i < n; ++i) {
                            src[axis] = i;
                            acc += cur[lin(dims, src)] * ph[f * n + i];
                        }
                        next[lin(nd, ix)] = acc;
                    }
        cur.swap(next);
        dims = nd;
    }
    const double d4 = std::pow(s.spacing, 4);
    MollifierSpectrum out;
    out.g0 = (cur[0] * d4).real();
    out.min_real_rel = 1.0;
    for (const auto& v : cur) {
        out.min_real_rel = std::min(out.min_real_rel, (v * d4).real() / out.g0);
        out.max_imag_rel = std::max(out.max_imag_rel, std::abs((v * d4).imag()) / out.g0);
    }
    for (int a = 0; a < nfreq; ++a) {
        out.q.push_back(2.0 * a * dq);
        const std::size_t i = ((static_cast<std::size_t>(a) * nfreq + a) * nfreq + a) * nfreq + a;
        out.diag_values.push_back((cur[i] * d4).real() / out.g0);
    }
    return out;
}

}  // namespace cfslab
