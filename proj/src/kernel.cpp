#include "cfslab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cfslab/errors.hpp"
#include "cfslab/parallel.hpp"

namespace cfslab {

namespace {

constexpr double pi = std::numbers::pi;
const double kNorm = 1.0 / (2.0 * std::pow(2.0 * pi, 4));

double kernel_upper(const CutoffProfile& g, int power) {
    if (!g.decays()) throw InvalidArgument("kernel: the cutoff must decay");
    auto env = [&](double k) { return k * k * k * std::pow(g(k), power); };
    const double sup = g.support_radius();
    double r;
    try {
        r = truncation_radius(env, std::isfinite(sup) ? std::min(g.scale(), sup) : g.scale());
    } catch (const NumericalFailure&) {
        if (!std::isfinite(sup)) throw;
        r = sup;
    }
    return std::min(r, sup);
}

void check_mass(double m) {
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidArgument("kernel: mass must be positive and finite");
}

}  // namespace

KernelMatrix kernel(const SpacetimePoint& xi, const CutoffProfile& g, Energy sign, KernelPower power, double m,
                    const QuadOptions& opt) {
    check_mass(m);
    if (!std::isfinite(xi.t) || !xi.x.allFinite()) throw InvalidArgument("kernel: non-finite separation");
    const int p = static_cast<int>(power);
    const int s = sign_of(sign);
    RadialProblem P;
    P.mass = m;
    P.scale = g.scale();
    P.breaks = g.breakpoints();
    P.upper = kernel_upper(g, p);
    P.weights = [&g, p, m](double k) -> std::array<cplx, 4> {
        const double gp = std::pow(g(k), p);
        return {gp, gp / omega(k, m), 0.0, 0.0};
    };
    const double r = xi.x.norm();
    KernelMatrix K;
    K.xi = xi;
    K.sign = sign;
    K.power = power;
    const CVec<4> a = radial_moments(P, s, xi.t, r, opt);
    RadialProblem Q = P;
    Q.weights = [&g, p, m](double k) -> std::array<cplx, 4> {
        return {std::pow(g(k), p) / omega(k, m), 0.0, 0.0, 0.0};
    };
    const cplx C0 = radial_moments(Q, s, xi.t, r, opt)(0);
    const cplx A0 = a(0);
    const Vec3 n = r > 0.0 ? Vec3(xi.x / r) : Vec3::Zero();
    SpinMatrix M = double(s) * A0 * gamma(0) + m * C0 * SpinMatrix::Identity();
    for (int j = 0; j < 3; ++j) M -= cplx(0.0, 1.0) * n(j) * a(1) * gamma(j + 1);
    K.value = kNorm * M;
    return K;
}

SpinMatrix causal_kernel(const SpacetimePoint& xi, const CutoffProfile& g, KernelPower power, double m,
                         const QuadOptions& opt) {
    return kernel(xi, g, Energy::negative, power, m, opt).value - kernel(xi, g, Energy::positive, power, m, opt).value;
}

DiagonalSpectrum diagonal_spectrum(const CutoffProfile& g, double m, const QuadOptions& opt) {
    check_mass(m);
    DiagonalSpectrum d;
    d.norms = cutoff_l1_norms(g, m, opt);
    d.lambda_plus = kNorm * (m * d.norms.normB + d.norms.normA);
    d.lambda_minus = kNorm * (m * d.norms.normB - d.norms.normA);
    return d;
}

SpinMatrix diagonal_closed_form(const DiagonalSpectrum& d, Energy sign) {
    const double mB = (d.lambda_plus + d.lambda_minus) / 2.0;  // kNorm * m ||g^2/omega||
    const double A = (d.lambda_plus - d.lambda_minus) / 2.0;   // kNorm * ||g^2||
    return mB * SpinMatrix::Identity() + double(sign_of(sign)) * A * gamma(0);
}

DiagonalSpectrum sharp_leading_order(double eps, double m) {
    check_mass(m);
    if (!(eps > 0.0)) throw InvalidArgument("sharp_leading_order: eps must be positive");
    const double c = 1.0 / (2.0 * std::pow(2.0 * pi, 3));
    DiagonalSpectrum d;
    d.lambda_plus = c * (m / (eps * eps) + 2.0 / (3.0 * eps * eps * eps));
    d.lambda_minus = c * (m / (eps * eps) - 2.0 / (3.0 * eps * eps * eps));
    return d;
}

// ---- lattice surrogate ------------------------------------------------------------

double lattice_half_extent(const LatticeSpec& lat, const CutoffProfile& g) {
    if (lat.half_extent > 0.0) return lat.half_extent;
    if (std::isfinite(g.support_radius())) return g.support_radius();
    return g.envelope_radius(2);
}

std::vector<WavePacket> lattice_modes(const LatticeSpec& lat, const CutoffProfile& g, Energy sign, double m) {
    if (lat.n < 1 || lat.n > 512) throw InvalidArgument("lattice: cells per axis must be in [1, 512]");
    const double K = lattice_half_extent(lat, g);
    const double d = 2.0 * K / lat.n;
    std::vector<WavePacket> out;
    out.reserve(static_cast<std::size_t>(lat.n) * lat.n * lat.n * 2);
    for (int i = 0; i < lat.n; ++i)
        for (int j = 0; j < lat.n; ++j)
            for (int l = 0; l < lat.n; ++l) {
                const Vec3 k(-K + d * (i + 0.5), -K + d * (j + 0.5), -K + d * (l + 0.5));
                for (Spin s : {Spin::up, Spin::down}) out.push_back(mode_packet(sign, s, k, d / 2.0, m));
            }
    return out;
}

LatticeKernel kernel_from_lattice_sum(const SpacetimePoint& x, const SpacetimePoint& y, const LatticeSpec& lat,
                                      const CutoffProfile& g, Energy sign, double m) {
    check_mass(m);
    if (lat.n < 1 || lat.n > 512) throw InvalidArgument("lattice: cells per axis must be in [1, 512]");
    const double K = lattice_half_extent(lat, g);
    const double d = 2.0 * K / lat.n;
    EvalOptions opt;
    opt.cell_average = lat.cell_average;
    std::vector<SpinMatrix> slabs(static_cast<std::size_t>(lat.n), SpinMatrix::Zero());
    parallel_for(slabs.size(), [&](std::size_t i) {
        SpinMatrix acc = SpinMatrix::Zero();
        for (int j = 0; j < lat.n; ++j)
            for (int l = 0; l < lat.n; ++l) {
                const Vec3 k(-K + d * (static_cast<double>(i) + 0.5), -K + d * (j + 0.5), -K + d * (l + 0.5));
                for (Spin s : {Spin::up, Spin::down}) {
                    const WavePacket u = mode_packet(sign, s, k, d / 2.0, m);
                    const Bispinor a = evaluate_regularized(u, x, g, opt);
                    if (a.squaredNorm() == 0.0) continue;
                    const Bispinor b = evaluate_regularized(u, y, g, opt);
                    acc += a * (b.adjoint() * gamma(0));
                }
            }
        slabs[i] = acc;
    });
    LatticeKernel out;
    for (const auto& s : slabs) out.value += s;
    out.value *= double(sign_of(sign)) / (2.0 * pi);
    out.modes = 2 * lat.n * lat.n * lat.n;
    out.spacing = d;
    out.half_extent = K;
    const SpacetimePoint xi = x - y;
    out.coarse = d > g.scale() / 2.0 || d * std::max(xi.x.norm(), std::abs(xi.t)) > pi / 2.0;
    return out;
}

// ---- diagonal perturbations ---------------------------------------------------------

double operator_norm(const Eigen::MatrixXcd& A) {
    if (A.size() == 0) return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A);
    return svd.singularValues()(0);
}

PerturbedDiagonal perturbed_diagonal(const DiagonalSpectrum& d, const std::vector<PerturbedState>& states) {
    PerturbedDiagonal out;
    out.lambda_plus = d.lambda_plus;
    out.lambda_minus = d.lambda_minus;
    out.unperturbed = diagonal_closed_form(d, Energy::negative);
    for (const auto& st : states) {
        const double c = (st.sign == Energy::positive ? -1.0 : 1.0) / (2.0 * pi);
        out.delta += c * st.value * (st.value.adjoint() * gamma(0));
    }
    out.matrix = out.unperturbed + out.delta;
    Eigen::ComplexEigenSolver<SpinMatrix> es(out.matrix);
    std::array<cplx, 4> ev;
    for (int i = 0; i < 4; ++i) ev[i] = es.eigenvalues()(i);
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (int i = 0; i < 4; ++i) {
        out.eigenvalues(i) = ev[i];
        out.distances(i) = std::min(std::abs(ev[i] - d.lambda_plus), std::abs(ev[i] - d.lambda_minus));
    }
    out.delta_norm = operator_norm(out.delta);
    return out;
}

}  // namespace cfslab
