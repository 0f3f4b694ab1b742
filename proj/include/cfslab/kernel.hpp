#pragma once

#include <vector>

#include "cfslab/cutoff.hpp"
#include "cfslab/dirac.hpp"
#include "cfslab/packets.hpp"
#include "cfslab/quadrature.hpp"

namespace cfslab {

enum class KernelPower { single = 1, double_ = 2 };

struct KernelMatrix {
    SpinMatrix value = SpinMatrix::Zero();
    SpacetimePoint xi;
    Energy sign = Energy::negative;
    KernelPower power = KernelPower::double_;
    QuadReport quad;
};

// +-int d^3k/(2pi)^4 g(k)^power p+-(k) gamma^0 exp(-i(+-omega xi^0 - k.xi)), from four radial integrals.
KernelMatrix kernel(const SpacetimePoint& xi, const CutoffProfile& g, Energy sign, KernelPower power, double m,
                    const QuadOptions& opt = {});
// P_- minus P_+.
SpinMatrix causal_kernel(const SpacetimePoint& xi, const CutoffProfile& g, KernelPower power, double m,
                         const QuadOptions& opt = {});

struct DiagonalSpectrum {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    CutoffNorms norms;
};
// lambda+- = (2(2pi)^4)^{-1} (m ||g^2/omega|| +- ||g^2||).
DiagonalSpectrum diagonal_spectrum(const CutoffProfile& g, double m, const QuadOptions& opt = {});
// (2(2pi)^4)^{-1} (m ||g^2/omega|| I +- ||g^2|| gamma^0).
SpinMatrix diagonal_closed_form(const DiagonalSpectrum& d, Energy sign);

// Leading orders for the sharp cutoff: (2(2pi)^3)^{-1} (m/eps^2 +- 2/(3 eps^3)).
DiagonalSpectrum sharp_leading_order(double eps, double m);

struct LatticeSpec {
    int n = 32;              // cells per axis
    double half_extent = 0;  // lattice covers [-K, K]^3; 0 selects the cutoff support (or its envelope)
    bool cell_average = true;
};

struct LatticeKernel {
    SpinMatrix value = SpinMatrix::Zero();
    int modes = 0;
    double spacing = 0.0;
    double half_extent = 0.0;
    bool coarse = false;  // spacing wider than the cutoff scale
};

// Cubic momentum cells covering the lattice; one mode per cell and spin.
std::vector<WavePacket> lattice_modes(const LatticeSpec& lat, const CutoffProfile& g, Energy sign, double m);
double lattice_half_extent(const LatticeSpec& lat, const CutoffProfile& g);

// +-(2pi)^{-1} sum_n R u_n(x) conj(R u_n(y)) over the lattice modes.
LatticeKernel kernel_from_lattice_sum(const SpacetimePoint& x, const SpacetimePoint& y, const LatticeSpec& lat,
                                      const CutoffProfile& g, Energy sign, double m);

struct PerturbedState {
    Bispinor value;  // R e_i(x)
    Energy sign;
};

struct PerturbedDiagonal {
    SpinMatrix unperturbed = SpinMatrix::Zero();
    SpinMatrix delta = SpinMatrix::Zero();
    SpinMatrix matrix = SpinMatrix::Zero();
    Eigen::Vector4cd eigenvalues;
    Eigen::Vector4d distances;  // min(|mu - lambda+|, |mu - lambda-|)
    double delta_norm = 0.0;    // ||Delta P||_2
    double lambda_plus = 0.0, lambda_minus = 0.0;
};

// P_{-,eps^2}(x,x) + Delta P with Delta P = -(2pi)^{-1} sum_+ v conj(v) + (2pi)^{-1} sum_- v conj(v).
PerturbedDiagonal perturbed_diagonal(const DiagonalSpectrum& d, const std::vector<PerturbedState>& states);

double operator_norm(const Eigen::MatrixXcd& A);

}  // namespace cfslab
