#pragma once

#include <vector>

#include "cfslab/cutoff.hpp"
#include "cfslab/kernel.hpp"
#include "cfslab/packets.hpp"

namespace cfslab {

struct CorrelationMatrix {
    Eigen::MatrixXcd M;       // M_ij = -conj(R u_i(x)) R u_j(x)
    Eigen::MatrixXcd values;  // 4 x n regularised values R u_i(x)
    SpacetimePoint x;
};

CorrelationMatrix correlation_from_values(const Eigen::MatrixXcd& R, const SpacetimePoint& x = {});
CorrelationMatrix correlation_matrix(const SolutionFamily& f, const SpacetimePoint& x, const CutoffProfile& g,
                                     const EvalOptions& opt = {});

struct SpinSpaceReport {
    int rank = 0;
    int n_plus = 0;
    int n_minus = 0;
    bool regular = false;
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXcd range_basis;  // coefficient vectors spanning the range
    double hermiticity_defect = 0.0;
    double threshold = 0.0;
};

SpinSpaceReport spin_space_report(const Eigen::MatrixXcd& M, double tau = 1e-8);

// Orthonormal basis of the complement of the range of M.
Eigen::MatrixXcd range_complement(const Eigen::MatrixXcd& M, double tau = 1e-8);

struct IsometryReport {
    double max_deviation = 0.0;  // matrix path against pointwise spin products
    int image_dimension = 0;     // rank of x -> R u(x) on the family
    bool surjective = false;
};
IsometryReport isometry_check(const SolutionFamily& f, const SpacetimePoint& x, const CutoffProfile& g,
                              const EvalOptions& opt = {});

// sum_i conj(R u_i) gamma^mu R u_i
double current_density(const Eigen::MatrixXcd& R, int mu);
// -tr F^mu with F^mu_ij = -conj(R u_i) gamma^mu R u_j
double current_trace(const Eigen::MatrixXcd& R, int mu);

struct TranslationReport {
    double spectral_deviation = 0.0;
    double norm_left = 0.0;   // ||F(x+a)||
    double norm_right = 0.0;  // ||F(x)|| for the translated family
};
TranslationReport translation_covariance_check(const SolutionFamily& f, const SpacetimePoint& x,
                                               const SpacetimePoint& a, const CutoffProfile& g,
                                               const EvalOptions& opt = {});

// ---- lattice sea and its kernel eigenbasis -------------------------------------

struct LatticeSea {
    SolutionFamily family;  // orthonormal negative-energy modes
    LatticeSpec spec;
};
LatticeSea make_lattice_sea(const LatticeSpec& lat, const CutoffProfile& g, double m);

struct Eigenbasis {
    Eigen::MatrixXcd coeffs;        // columns c_mu = -(2pi)^{-1} R^dagger gamma^0 e_mu
    Eigen::Vector4d eigenvalues;    // Rayleigh quotients of F on c_mu
    Eigen::Vector4d expected;       // 2 pi lambda^- (mu = 0, 1), 2 pi lambda^+ (mu = 2, 3)
    Eigen::Vector4d residual;       // ||F c - 2 pi lambda_lattice c|| / ||F c||
    Eigen::Vector4d lattice_lambda; // diagonal of the lattice kernel at (x, x)
    SpinMatrix lattice_kernel = SpinMatrix::Zero();
};
Eigenbasis eigenbasis_at_point(const LatticeSea& sea, const SpacetimePoint& x, const CutoffProfile& g,
                               const DiagonalSpectrum& d, const EvalOptions& opt = {});

// Coefficients of U_a v in the mode basis (U_a u = u(. + a)).
Eigen::MatrixXcd translate_coefficients(const SolutionFamily& modes, const Eigen::MatrixXcd& c, const SpacetimePoint& a);

// ---- injectivity -----------------------------------------------------------------

struct InjectivityReport {
    Eigen::MatrixXd distances;  // ||F(x_i) - F(x_j)||_2
    double min_distance = 0.0;
    int argmin_i = -1, argmin_j = -1;
    double max_norm = 0.0;     // max_i ||F(x_i)||_2
    double threshold = 0.0;    // separation threshold 1e-10 * max_norm
    bool separated = false;
};
InjectivityReport injectivity_probe(const SolutionFamily& f, const std::vector<SpacetimePoint>& points,
                                    const CutoffProfile& g, const EvalOptions& opt = {});

// Both spins of one negative-energy momentum cell: F(x) does not depend on x.
SolutionFamily single_mode_family(const Vec3& k, double cell_half, double m);

}  // namespace cfslab
