#pragma once

#include <array>
#include <optional>
#include <vector>

#include "cfslab/correlation.hpp"
#include "cfslab/kernel.hpp"
#include "cfslab/packets.hpp"

namespace cfslab {

// ---- determinant orthogonalisation ------------------------------------------------

// Minors of the (i-1) x i overlap blocks G_i(j,k) = (phi_j|phi_k).
struct GramMinors {
    Eigen::VectorXcd diag;  // det G_{i,i^}; the first entry is 1 by convention
    Eigen::MatrixXcd off;   // off(i,k) = det G_{i,k^} for k < i, zero elsewhere
};

// Column i holds the coefficients of phi'_i = (det G_{i,i^})^{-1} sum_{k<=i} (-1)^{i+k} det G_{i,k^} phi_k.
Eigen::MatrixXcd gram_determinant_coefficients(const Eigen::MatrixXcd& G, GramMinors* minors = nullptr);
// Classical recursive Gram-Schmidt driven by the Gram matrix; columns normalised.
Eigen::MatrixXcd gram_schmidt_coefficients(const Eigen::MatrixXcd& G);

SolutionFamily gram_determinant_orthogonalize(const SolutionFamily& phi, const EvalOptions& opt = {},
                                              GramMinors* minors = nullptr);
SolutionFamily normalized(const SolutionFamily& f, const EvalOptions& opt = {});

// ---- approximating sets -------------------------------------------------------------

struct ApproximatingSet {
    SolutionFamily psi;     // orthonormal, same basis as target
    SolutionFamily target;  // orthonormal hole basis u_i
    double epsilon_tol = 0.0;

    Eigen::MatrixXcd overlap;        // M(j,i) = (u_j|psi_i)
    double max_distance = 0.0;       // max_i ||u_i - psi_i||
    double overlap_defect = 0.0;     // max |(u_i|psi_j) - delta_ij|
    double overlap_inverse_norm = 0.0;
    double eps_prime = 0.0;          // max |(u_i|phi_j) - delta_ij| of the raw perturbations
    GramMinors minors;

    bool within_tolerance() const { return max_distance < epsilon_tol && overlap_defect <= epsilon_tol; }
};

// Perturbs every packet of the hole basis (width scaled by 1+delta, centre shifted by delta/m along x1),
// then orthogonalises with the determinant formula and normalises.
ApproximatingSet make_approximating_set(const SolutionFamily& target, double delta, double epsilon_tol,
                                        const EvalOptions& opt = {});

struct Projection {
    SolutionFamily psi_phi;          // Psi[phi_c] = phi_c - sum_i lambda_i psi_i, one member per column
    Eigen::MatrixXcd lambda;         // n x columns
    Eigen::VectorXd orthogonality;   // max_j |(u_j|Psi[phi])|, Gram recomputed with a finer rule
    Eigen::VectorXd phi_norm;
    Eigen::VectorXd lambda_norm;
    double overlap_inverse_norm = 0.0;
    bool bound_applicable = false;   // ||M^{-1}||_2 < 2
};

Projection project_out(const SolutionFamily& phi, const ApproximatingSet& aset, const EvalOptions& opt = {});

// ---- microscopic behaviour ------------------------------------------------------------

struct MicroBehaviour {
    double value = 0.0;     // density + gradient
    double density = 0.0;   // |psi(x)| in C^{4n}
    double gradient = 0.0;  // eps sum_i ||J psi_i||_{x,inf}
    bool macroscopic = false;  // value < 1e9 m^{3/2}
};

MicroBehaviour micro_behaviour(const SolutionFamily& psi, const SpacetimePoint& x, double eps, double m,
                               const EvalOptions& opt = {});

// ---- hole regularity -------------------------------------------------------------------

struct AnalyticHoleBound {
    double lambda = 0.0;  // sigma / m
    double a = 0.0;       // bound on A^(a)
    double b = 0.0;       // bound on A^(b)
    bool holds = false;   // both below 1/4
};

// sigma = lambda m special solutions, general lambda.
AnalyticHoleBound hole_bound_general(double lambda, double eps, double m, double micro);
// sigma = 1e8 m, eps0 = 1e16 eps.
AnalyticHoleBound hole_bound_extreme(double eps, double m, double micro);

struct HoleRegularityReport {
    Eigen::MatrixXcd values;        // columns R Psi[u_alpha](x0), alpha = 0..3
    SpinSpaceReport spin;
    std::array<double, 4> direct{}; // |R Psi[u_alpha](x0)/C_alpha - e_alpha|
    Eigen::MatrixXcd lambda;        // 0 x 4 for the empty hole
    MicroBehaviour micro;
    AnalyticHoleBound desk;
    AnalyticHoleBound extreme;
};

// Four special solutions at x0 (width sigma) with the approximating set projected out.
HoleRegularityReport hole_regularity_experiment(const ApproximatingSet* aset, const SpacetimePoint& x0,
                                                const CutoffProfile& g, double sigma, double m,
                                                const EvalOptions& opt = {});

// Special solutions in the order alpha = 0..3 together with C_alpha and the target unit spinor.
struct SpecialSolution {
    WavePacket packet;
    double C = 1.0;
    int mu = 0;
};
std::array<SpecialSolution, 4> special_solutions(double sigma, const SpacetimePoint& x0, double m);

struct DegeneracyReport {
    double f_norm = 0.0;   // ||F(x0)||_2 on the full family
    double f0_norm = 0.0;  // after projecting onto the complement
    int removed = 0;
    int remaining = 0;
};

// Projects onto the orthogonal complement of range F(x0), F = -R^dagger gamma^0 R.
DegeneracyReport hole_degeneracy(const Eigen::MatrixXcd& R, double tau = 1e-8);
// Same with the hole spanned by explicit coefficient vectors.
DegeneracyReport hole_degeneracy(const Eigen::MatrixXcd& R, const Eigen::MatrixXcd& hole);

// ---- eigenvalue perturbation ----------------------------------------------------------------

struct PerturbationCase {
    PerturbedDiagonal diag;
    double micro = 0.0;       // E(e, eps, x)
    double density_sum = 0.0; // sum_i |R e_i(x)|^2
    double lifted_norm = 0.0; // 2 pi ||Delta P||_2
    double max_distance = 0.0;
    bool bauer_fike = false;  // max_distance <= ||Delta P||_2
    bool lifted = false;      // 2 pi max_distance <= 2 E^2
};

// States are orthonormalised within each energy sign, then multiplied by scale.
PerturbationCase eigenvalue_perturbation_experiment(const std::vector<WavePacket>& states, const SpacetimePoint& x,
                                                    const CutoffProfile& g, const DiagonalSpectrum& d,
                                                    double scale = 1.0, const EvalOptions& opt = {});

// Smallest singular value of the columns of V.
double min_singular_value(const Eigen::MatrixXcd& V);

}  // namespace cfslab
