#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cfslab/cutoff.hpp"
#include "cfslab/dirac.hpp"
#include "cfslab/quadrature.hpp"

namespace cfslab {

enum class ProfileKind {
    gaussian,     // amplitude * exp(-|k-p|^2 / (2 width^2))
    k3_gaussian,  // amplitude * (omega+m) k3 * exp(-|k|^2 / (2 width^2))
    radial,       // amplitude * f(|k|)
    mode          // normalised momentum cell around k_n, evaluated in the plane-wave limit
};

std::string to_string(ProfileKind k);

// u(x) = (2pi)^{-3/2} int d^3k lambda(k) chi(k) exp(-i(s omega t - k.x)) with
// lambda(k) = profile(k) * prod filters(|k|) * exp(i(s omega t0 - k.x0)).
struct WavePacket {
    Energy sign = Energy::negative;
    Spin spin = Spin::up;
    ProfileKind kind = ProfileKind::gaussian;
    double mass = 1.0;
    double width = 1.0;
    Vec3 momentum = Vec3::Zero();  // gaussian centre p, or the cell momentum of a mode
    SpacetimePoint center;         // phase centre x0
    cplx amplitude = 1.0;

    std::function<cplx(double)> radial_profile;
    double radial_support = std::numeric_limits<double>::infinity();
    std::vector<double> radial_breaks;
    double radial_scale = 1.0;

    double cell_volume = 0.0;  // mode only
    double cell_half = 0.0;    // half edge of the cubic cell

    std::vector<CutoffProfile> filters;

    // Momentum distribution lambda(k), filters and phase included.
    cplx lambda(const Vec3& k) const;
    bool isotropic_about_origin() const { return kind != ProfileKind::gaussian || momentum.squaredNorm() == 0.0; }
};

// ---- factories --------------------------------------------------------------

// lambda = (2pi)^{3/2} A exp(-k^2/(4 sigma^2)), A = (2 sqrt(pi) sigma)^{-3}; negative energy.
WavePacket special_a(Spin s, double sigma, const SpacetimePoint& x0, double m = 1.0);
// lambda = (2pi)^{3/2} B exp(-k^2/(4 sigma^2)) (omega+m) k3, B = 2^{-4} pi^{-3/2} sigma^{-5}.
WavePacket special_b(Spin s, double sigma, const SpacetimePoint& x0, double m = 1.0);
double special_a_constant(double sigma);
double special_b_constant(double sigma);
// Second Gaussian moment of k3 against exp(-k^2/(4 sigma^2)): 2^4 pi^{3/2} sigma^5.
double k3_gaussian_moment(double sigma);

WavePacket gaussian_packet(Energy e, Spin s, double width, const Vec3& p, const SpacetimePoint& x0,
                           cplx amplitude = 1.0, double m = 1.0);
// lambda = (sqrt(2pi) sigma)^{-3} exp(-(k-p)^2/(2 sigma^2)), negative energy, spin up, no phase centre.
WavePacket delta_packet(const Vec3& p, double sigma, double m = 1.0);
WavePacket radial_packet(Energy e, Spin s, std::function<cplx(double)> f, double scale,
                         const SpacetimePoint& x0, double m = 1.0,
                         double support = std::numeric_limits<double>::infinity(),
                         std::vector<double> breaks = {});
WavePacket mode_packet(Energy e, Spin s, const Vec3& kn, double cell_half, double m = 1.0, cplx amplitude = 1.0);

// Normalised fundamental spinor chi / |chi|.
Bispinor unit_fundamental_spinor(const Vec3& k, Energy e, Spin s, double m);

// ---- evaluation -------------------------------------------------------------

struct EvalOptions {
    QuadOptions quad{};
    int hermite_min = 16;
    int hermite_max = 128;
    double hermite_rel = 1e-10;
    bool cell_average = false;  // modes: regularise with the cell mean of g^2
};

Bispinor evaluate(const WavePacket& u, const SpacetimePoint& x, const EvalOptions& opt = {});
Bispinor evaluate_regularized(const WavePacket& u, const SpacetimePoint& x, const CutoffProfile& g,
                              const EvalOptions& opt = {});
Bispinor evaluate_with(const WavePacket& u, const SpacetimePoint& x, const CutoffProfile* g,
                       const EvalOptions& opt = {});

WavePacket regularize_profile(const WavePacket& u, const CutoffProfile& g);

// Mean of g^2 over the cube |k - kn|_inf <= half.
double cell_mean_square(const CutoffProfile& g, const Vec3& kn, double half);

// ---- Hilbert space structure ------------------------------------------------

// (u|v) = int conj(lambda_u chi_u) . (lambda_v chi_v) d^3k.
cplx inner_product(const WavePacket& u, const WavePacket& v, const EvalOptions& opt = {});
double packet_l2_norm(const WavePacket& u, const EvalOptions& opt = {});
// ||lambda||_{L2} without the spinor.
double profile_l2_norm(const WavePacket& u, const EvalOptions& opt = {});

WavePacket translate(const WavePacket& u, const SpacetimePoint& a);

// Finite span of wave packets; member i is sum_k coeffs(k,i) basis[k].
class SolutionFamily {
public:
    SolutionFamily() = default;
    explicit SolutionFamily(std::vector<WavePacket> packets);
    SolutionFamily(std::vector<WavePacket> basis, Eigen::MatrixXcd coeffs);

    std::size_t size() const { return static_cast<std::size_t>(coeffs_.cols()); }
    const std::vector<WavePacket>& basis() const { return basis_; }
    const Eigen::MatrixXcd& coeffs() const { return coeffs_; }

    // Inner products of the basis packets (computed once and cached).
    const Eigen::MatrixXcd& basis_gram(const EvalOptions& opt = {}) const;
    Eigen::MatrixXcd gram(const EvalOptions& opt = {}) const;

    // 4 x size() matrix of member values (regularised when g is given).
    Eigen::MatrixXcd values(const SpacetimePoint& x, const CutoffProfile* g = nullptr, const EvalOptions& opt = {}) const;
    Eigen::MatrixXcd basis_values(const SpacetimePoint& x, const CutoffProfile* g = nullptr,
                                  const EvalOptions& opt = {}) const;

    SolutionFamily with_coeffs(Eigen::MatrixXcd c) const;
    SolutionFamily translated(const SpacetimePoint& a) const;
    SolutionFamily subfamily(const std::vector<int>& cols) const;
    // Concatenate members; the basis is the union (no deduplication).
    SolutionFamily joined(const SolutionFamily& other) const;

private:
    std::vector<WavePacket> basis_;
    Eigen::MatrixXcd coeffs_;
    mutable std::optional<Eigen::MatrixXcd> gram_cache_;
};

// Cholesky-based Gram-Schmidt in momentum space; DegenerateFamily when cond(Gram) > 1e12.
SolutionFamily orthonormalize_family(const SolutionFamily& raw, const EvalOptions& opt = {});

// ---- derivatives ------------------------------------------------------------

struct JacobianEstimate {
    double sampled = 0.0;         // max over the sample points of the summed gradient norms
    double analytic_bound = 0.0;  // 2^3 sum_mu sqrt2 (2pi)^{-3/2} ||k_mu lambda||_L1
    int samples = 0;
};

// Sample points: the centre, the 8 axis points at distance eps, the 16 diagonal points at distance eps.
std::vector<SpacetimePoint> ball_samples(const SpacetimePoint& x, double eps);

// Gradient (d_t, d_1, d_2, d_3) of each spinor component, fourth-order central differences.
std::array<Bispinor, 4> gradient(const WavePacket& u, const SpacetimePoint& x, const CutoffProfile* g = nullptr,
                                 const EvalOptions& opt = {}, double h = 1e-3);
// Sum over components of |grad Re u_c| + |grad Im u_c|.
double jacobian_density(const std::array<Bispinor, 4>& grad);

JacobianEstimate jacobian_sup(const WavePacket& u, const SpacetimePoint& x, double eps, const EvalOptions& opt = {});
// Same for member i of a family.
double family_jacobian_sup(const SolutionFamily& f, int i, const SpacetimePoint& x, double eps,
                           const EvalOptions& opt = {});
// ||k_mu lambda||_L1 for mu = 0..3 (k_0 = omega).
std::array<double, 4> momentum_l1_norms(const WavePacket& u, const EvalOptions& opt = {});

// ---- pointwise mollification bounds -----------------------------------------

struct MollificationBound {
    double lhs = 0.0;        // |R u(x) - u(x)|
    double rhs = 0.0;        // eps ||J u||_{x,inf}
    double sup_value = 0.0;  // |R u(x)|
    double sup_bound = 0.0;  // pi eps^{5/2} ||h_eps||_inf ||u||
};
MollificationBound mollification_pointwise_bounds(const WavePacket& u, const SpacetimePoint& x,
                                                  const CutoffProfile& g, const EvalOptions& opt = {});

// ---- position space -----------------------------------------------------------

// ||u(t, .)||_{L2(R^3)} by radial quadrature in position space (isotropic packets about the origin).
double position_norm(const WavePacket& u, double t, const EvalOptions& opt = {});

struct DecaySample {
    double radius;
    SpacetimePoint point;
    double value;  // |u|
    double shape;  // (1 + (t^2 - |x|^2)_+)^{1/4} / (|t| + |x|)^2
};
// Samples |u(x0 + r * direction)|.
std::vector<DecaySample> decay_probe(const WavePacket& u, const SpacetimePoint& direction,
                                     const std::vector<double>& radii, const EvalOptions& opt = {});

}  // namespace cfslab
