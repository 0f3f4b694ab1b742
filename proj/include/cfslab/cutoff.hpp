#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "cfslab/dirac.hpp"
#include "cfslab/quadrature.hpp"

namespace cfslab {

enum class CutoffKind { sharp, gaussian, mollifier, custom };

std::string to_string(CutoffKind k);

// Radial three-momentum cutoff g_eps(|k|) >= 0.  Immutable; cheap to copy.
class CutoffProfile {
public:
    static CutoffProfile sharp(double eps);
    // g(k) = amplitude * exp(-(eps k)^2 / (2 width^2))
    static CutoffProfile gaussian(double eps, double width = 1.0, double amplitude = 1.0);
    // On-shell restriction of the transform of the normalised bump convolution square.
    static CutoffProfile mollifier(double eps, double m);
    static CutoffProfile custom(std::function<double(double)> g, std::string label,
                                double support = std::numeric_limits<double>::infinity(),
                                std::vector<double> breaks = {}, double eps = 1.0);
    static CutoffProfile constant(double c);

    double operator()(double kabs) const { return amp_ * eval_(kabs); }
    double operator()(const Vec3& k) const { return (*this)(k.norm()); }

    CutoffKind kind() const { return kind_; }
    double epsilon() const { return eps_; }
    double mass() const { return m_; }
    double width() const { return width_; }
    double amplitude() const { return amp_; }
    const std::string& label() const { return label_; }

    // Radius outside of which g vanishes identically (infinity if none).
    double support_radius() const { return support_; }
    const std::vector<double>& breakpoints() const { return breaks_; }
    bool decays() const { return decays_; }

    // Radius beyond which k^2 g(k)^power stays below 1e-16 of its peak.
    double envelope_radius(int power) const;
    // Typical momentum scale used for panel widths.
    double scale() const;

    CutoffProfile scaled(double c) const;

private:
    CutoffKind kind_ = CutoffKind::custom;
    double eps_ = 1.0;
    double m_ = 0.0;
    double width_ = 1.0;
    double amp_ = 1.0;
    double support_ = std::numeric_limits<double>::infinity();
    bool decays_ = true;
    std::vector<double> breaks_;
    std::string label_;
    std::function<double(double)> eval_;
};

// k -> G(omega(k), |k|) for a four-dimensional profile G(k0, |k|).
CutoffProfile cutoff_on_shell(const std::function<double(double, double)>& G4, double m,
                              double support = std::numeric_limits<double>::infinity(),
                              std::vector<double> breaks = {});

// Support radius on the mass shell of the 4D indicator of B(0, 1/eps).
double sharp4d_shell_radius(double eps, double m);

struct CutoffNorms {
    double normA = 0.0;  // || g^2 ||_L1
    double normB = 0.0;  // || g^2 / omega ||_L1
    QuadReport quad;
};

CutoffNorms cutoff_l1_norms(const CutoffProfile& g, double m, const QuadOptions& opt = {});

// Closed forms for the indicator of |k| <= 1/eps.
struct SharpClosedForms {
    double normA;
    double m_normB;
};
SharpClosedForms sharp_closed_forms(double eps, double m);

// ---- mollifier construction -------------------------------------------------

// Standard bump exp(-1/(1-4r^2)) on the 4D ball of radius 1/2 (Euclidean r).
double standard_bump(double x0, double rspatial);

// phi(q) = hat h1(q) / hat h1(0), Euclidean-radial 4D transform of the standard bump.
double mollifier_phi(double q);
// h(0) for h = h1*h1 / ||h1||_1^2 (eps = 1); sup norm of h_eps is h(0)/eps^4.
double mollifier_h0();

struct MollifierSample {
    double eps = 1.0;
    double spacing = 0.0;
    int points_per_axis = 0;  // grid intervals across [-eps, eps]
    int n = 0;                // grid nodes per axis
    std::vector<double> values;  // dense n^4, index ((i0*n+i1)*n+i2)*n+i3
    double integral = 0.0;          // Riemann sum
    double support_radius = 0.0;    // largest |x| with h > 0
    double max_value = 0.0;
    double min_value = 0.0;
    double symmetry_defect = 0.0;   // max |h(x0,x) - h(-x0,Rx)| over the sampled reflections

    double at(int i0, int i1, int i2, int i3) const {
        return values[((static_cast<std::size_t>(i0) * n + i1) * n + i2) * n + i3];
    }
    double coord(int i) const { return spacing * (i - n / 2); }
};

// base(x0, |x|): nonnegative, supported in the 4D ball of radius 1/2.
MollifierSample build_mollifier(const std::function<double(double, double)>& base, double eps,
                                int points_per_axis = 32);

struct MollifierSpectrum {
    std::vector<double> q;           // sampled |k| eps along the diagonal of the 8^4 set
    double min_real_rel = 0.0;       // min Re G / G(0) over the 8^4 set
    double max_imag_rel = 0.0;       // max |Im G| / G(0)
    double g0 = 0.0;
    std::vector<double> diag_values;  // Re G / G(0) at (a,a,a,a)
};
MollifierSpectrum mollifier_spectrum(const MollifierSample& s, int nfreq = 8, double dq = 1.5);

}  // namespace cfslab
