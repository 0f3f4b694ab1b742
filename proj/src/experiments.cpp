#include "cfslab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>

#include "cfslab/correlation.hpp"
#include "cfslab/errors.hpp"
#include "cfslab/holes.hpp"
#include "cfslab/kernel.hpp"

namespace cfslab {

namespace {

constexpr double pi = std::numbers::pi;

Json cjson(cplx z) { return Json::array({z.real(), z.imag()}); }

Json vec_json(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json cmat_json(const Eigen::MatrixXcd& M) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        Json r = Json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(cjson(M(i, j)));
        rows.push_back(std::move(r));
    }
    return rows;
}

CutoffProfile need_cutoff(const ExperimentConfig& c) {
    if (c.cutoff_spec.is_null()) throw InvalidArgument(c.experiment + ": config needs a cutoff");
    return parse_cutoff(c.cutoff_spec, c.mass);
}

SolutionFamily need_family(const ExperimentConfig& c) {
    if (c.family_spec.is_null()) throw InvalidArgument(c.experiment + ": config needs a family");
    return parse_family(c.family_spec, c.mass, c.eval);
}

SpacetimePoint param_point(const Json& p, const char* key, const SpacetimePoint& fallback) {
    return p.contains(key) ? parse_point(p.at(key), std::string("params.") + key) : fallback;
}

std::vector<double> param_doubles(const Json& p, const char* key, std::vector<double> fallback) {
    return p.contains(key) ? parse_doubles(p.at(key), std::string("params.") + key) : fallback;
}

bool param_bool(const Json& p, const char* key, bool fallback) {
    if (!p.contains(key)) return fallback;
    if (!p.at(key).is_boolean()) throw InvalidArgument(std::string("params.") + key + ": expected a boolean");
    return p.at(key).get<bool>();
}

void base_provenance(Report& r, const ExperimentConfig& c, const CutoffProfile* g) {
    r.provenance["mass"] = c.mass;
    if (g) {
        r.provenance["cutoff"] = describe_cutoff(*g);
        r.provenance["epsilon"] = g->epsilon();
        r.provenance["m_epsilon"] = c.mass * g->epsilon();
    }
    r.provenance["quadrature"] = quad_json(c.eval);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---- kernel-diag -------------------------------------------------------------------

Report kernel_diag(const ExperimentConfig& c) {
    require_keys(c.params, {"expected"}, "params");
    Report r;
    const CutoffProfile g = need_cutoff(c);
    base_provenance(r, c, &g);
    const double m = c.mass;

    const DiagonalSpectrum d = diagonal_spectrum(g, m, c.eval.quad);
    const KernelMatrix K = kernel(SpacetimePoint{}, g, Energy::negative, KernelPower::double_, m, c.eval.quad);
    const SpinMatrix closed = diagonal_closed_form(d, Energy::negative);
    const double err = (K.value - closed).cwiseAbs().maxCoeff() / closed.cwiseAbs().maxCoeff();
    const double imag = K.value.imag().cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<SpinMatrix> es(0.5 * (K.value + K.value.adjoint()));

    r.results["normA"] = d.norms.normA;
    r.results["normB"] = d.norms.normB;
    r.results["lambda_plus"] = d.lambda_plus;
    r.results["lambda_minus"] = d.lambda_minus;
    r.results["kernel_diagonal"] = Json::array();
    for (int i = 0; i < 4; ++i) r.results["kernel_diagonal"].push_back(cjson(K.value(i, i)));
    r.results["kernel_eigenvalues"] = vec_json(es.eigenvalues());
    r.results["closed_form_relative_error"] = err;

    const std::string spec = "its spectrum consists of two elements";
    r.check("quadrature kernel matches closed-form diagonal", spec, err, "<=", 1e-6);
    r.check("diagonal kernel imaginary parts", "doubly-regularized kernel of the fermionic projector", imag, "<", 1e-12);
    r.check("lambda_minus negative", "the last inequality is strict", d.lambda_minus, "<", 0.0);
    r.check("lambda_plus positive", "the last inequality is strict", d.lambda_plus, ">", 0.0);
    r.check("lambda_plus exceeds |lambda_minus|", spec, d.lambda_plus, ">", std::abs(d.lambda_minus));
    for (int i = 0; i < 2; ++i) {
        r.check("kernel eigenvalue " + std::to_string(i) + " equals lambda_minus", spec,
                rel(es.eigenvalues()(i), d.lambda_minus), "<=", 1e-6);
        r.check("kernel eigenvalue " + std::to_string(i + 2) + " equals lambda_plus", spec,
                rel(es.eigenvalues()(i + 2), d.lambda_plus), "<=", 1e-6);
    }

    if (g.kind() == CutoffKind::sharp) {
        const double eps = g.epsilon();
        const SharpClosedForms cf = sharp_closed_forms(eps, m);
        const DiagonalSpectrum lo = sharp_leading_order(eps, m);
        r.results["sharp"] = {{"normA_closed", cf.normA},
                              {"m_normB_closed", cf.m_normB},
                              {"lambda_plus_leading", lo.lambda_plus},
                              {"lambda_minus_leading", lo.lambda_minus}};
        const std::string anchor = "can be calculated explicitly by means";
        r.check("normA against closed form", anchor, rel(d.norms.normA, cf.normA), "<=", 1e-8);
        r.check("m normB against closed form", anchor, rel(m * d.norms.normB, cf.m_normB), "<=", 1e-8);
        if (m * eps <= 0.01 + 1e-15) {
            const std::string lead = "the leading-order terms of the above quantities";
            r.check("leading-order lambda_plus", lead, rel(lo.lambda_plus, d.lambda_plus), "<", 0.05);
            r.check("leading-order lambda_minus", lead, rel(lo.lambda_minus, d.lambda_minus), "<", 0.05);
        }
    }
    if (c.params.contains("expected")) {
        const Json& e = c.params.at("expected");
        require_keys(e, {"lambda_plus", "lambda_minus", "tolerance"}, "params.expected");
        const double tol = get_positive(e, "tolerance", 1e-4, "params.expected");
        if (e.contains("lambda_plus"))
            r.check("lambda_plus against expected value", spec,
                    std::abs(d.lambda_plus - get_number(e, "lambda_plus", 0, "params.expected")), "<=", tol);
        if (e.contains("lambda_minus"))
            r.check("lambda_minus against expected value", spec,
                    std::abs(d.lambda_minus - get_number(e, "lambda_minus", 0, "params.expected")), "<=", tol);
    }
    return r;
}

// ---- kernel-grid -----------------------------------------------------------------------

Report kernel_grid(const ExperimentConfig& c) {
    require_keys(c.params, {"power", "sign", "xi", "ray", "check_symmetry"}, "params");
    Report r;
    const CutoffProfile g = need_cutoff(c);
    base_provenance(r, c, &g);
    const std::string pw = c.params.value("power", std::string("double"));
    if (pw != "double" && pw != "single") throw InvalidArgument("params.power: single or double");
    const KernelPower power = pw == "double" ? KernelPower::double_ : KernelPower::single;
    const std::string sg = c.params.value("sign", std::string("-"));
    if (sg != "-" && sg != "+") throw InvalidArgument("params.sign: \"+\" or \"-\"");
    const Energy sign = sg == "-" ? Energy::negative : Energy::positive;
    const bool sym = param_bool(c.params, "check_symmetry", true);

    std::vector<SpacetimePoint> xs;
    std::vector<double> radii;
    if (c.params.contains("xi")) {
        xs = parse_points(c.params.at("xi"), "params.xi");
    } else if (c.params.contains("ray")) {
        const Json& ray = c.params.at("ray");
        require_keys(ray, {"direction", "radii"}, "params.ray");
        const SpacetimePoint dir = parse_point(ray.at("direction"), "params.ray.direction");
        const double len = std::sqrt(dir.t * dir.t + dir.x.squaredNorm());
        if (!(len > 0.0)) throw InvalidArgument("params.ray.direction: must be nonzero");
        radii = parse_doubles(ray.at("radii"), "params.ray.radii");
        for (double rr : radii) xs.push_back({dir.t * rr / len, Vec3(dir.x * (rr / len))});
    } else {
        throw InvalidArgument("kernel-grid: params needs \"xi\" or \"ray\"");
    }
    r.provenance["power"] = pw;
    r.provenance["sign"] = sg;

    CsvTable t{"kernel", {"xi_t", "xi_1", "xi_2", "xi_3"}, {}};
    const char* names[5] = {"I", "g0", "g1", "g2", "g3"};
    for (const char* n : names) {
        t.header.push_back(std::string("re_") + n);
        t.header.push_back(std::string("im_") + n);
    }
    t.header.push_back("frobenius");
    // Basis elements and their inverses under the trace pairing tr(A B^{-1})/4.
    std::array<SpinMatrix, 5> inv;
    inv[0] = SpinMatrix::Identity();
    inv[1] = gamma(0);
    for (int j = 1; j <= 3; ++j) inv[static_cast<std::size_t>(j + 1)] = -gamma(j);

    double max_sym = 0.0;
    std::vector<double> norms;
    for (const auto& xi : xs) {
        const KernelMatrix K = kernel(xi, g, sign, power, c.mass, c.eval.quad);
        std::vector<double> row{xi.t, xi.x(0), xi.x(1), xi.x(2)};
        for (const auto& B : inv) {
            const cplx coef = (K.value * B).trace() / 4.0;
            row.push_back(coef.real());
            row.push_back(coef.imag());
        }
        const double fro = K.value.norm();
        row.push_back(fro);
        norms.push_back(fro);
        t.rows.push_back(std::move(row));
        if (sym) {
            const KernelMatrix Km = kernel(-xi, g, sign, power, c.mass, c.eval.quad);
            const SpinMatrix rhs = gamma(0) * K.value.adjoint() * gamma(0);
            max_sym = std::max(max_sym, (Km.value - rhs).cwiseAbs().maxCoeff() / std::max(K.value.cwiseAbs().maxCoeff(), 1e-300));
        }
    }
    r.results["points"] = xs.size();
    r.results["frobenius"] = norms;
    if (!radii.empty()) {
        bool mono = true;
        for (std::size_t i = 1; i < norms.size(); ++i) mono = mono && norms[i] < norms[i - 1];
        r.results["monotone_along_ray"] = mono;
    }
    if (sym) {
        r.results["conjugation_symmetry_defect"] = max_sym;
        r.check("kernel(-xi) = gamma0 kernel(xi)^dagger gamma0", "The kernel of the regularized fermionic projector",
                max_sym, "<=", 1e-8);
    }
    r.tables.push_back(std::move(t));
    return r;
}

// ---- correlation -----------------------------------------------------------------------

Report correlation(const ExperimentConfig& c) {
    require_keys(c.params, {"tau", "translations", "expect_rank", "expect_signature"}, "params");
    Report r;
    const CutoffProfile g = need_cutoff(c);
    base_provenance(r, c, &g);
    if (c.points.empty()) throw InvalidArgument("correlation: config needs points");
    const SolutionFamily f = need_family(c);
    const double tau = get_positive(c.params, "tau", 1e-8, "params");
    const int want_rank = get_int(c.params, "expect_rank", -1, 0, 4, "params");
    std::vector<int> want_sig;
    if (c.params.contains("expect_signature")) {
        const auto s = parse_doubles(c.params.at("expect_signature"), "params.expect_signature");
        if (s.size() != 2) throw InvalidArgument("params.expect_signature: [n_plus, n_minus]");
        want_sig = {static_cast<int>(s[0]), static_cast<int>(s[1])};
    }
    r.provenance["family_size"] = f.size();
    r.provenance["tau"] = tau;

    const std::string anchor_f = "at most two positive and two negative eigenvalues";
    Json pts = Json::array();
    CsvTable t{"points", {"t", "x1", "x2", "x3", "rank", "n_plus", "n_minus", "current0"}, {}};
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const auto& x = c.points[i];
        const CorrelationMatrix M = correlation_matrix(f, x, g, c.eval);
        const SpinSpaceReport s = spin_space_report(M.M, tau);
        const IsometryReport iso = isometry_check(f, x, g, c.eval);
        Json p;
        p["x"] = point_json(x);
        p["eigenvalues"] = vec_json(s.eigenvalues);
        p["rank"] = s.rank;
        p["signature"] = {s.n_plus, s.n_minus};
        p["regular"] = s.regular;
        p["hermiticity_defect"] = s.hermiticity_defect;
        p["isometry_deviation"] = iso.max_deviation;
        p["image_dimension"] = iso.image_dimension;
        Json cur = Json::array();
        for (int mu = 0; mu < 4; ++mu) cur.push_back(current_density(M.values, mu));
        p["currents"] = cur;
        pts.push_back(p);
        t.rows.push_back({x.t, x.x(0), x.x(1), x.x(2), double(s.rank), double(s.n_plus), double(s.n_minus),
                          current_density(M.values, 0)});

        const std::string tag = " at point " + std::to_string(i);
        r.check("Hermitian" + tag, "there exists a unique operator", s.hermiticity_defect, "<=", 1e-12);
        r.check("rank at most 4" + tag, anchor_f, s.rank, "<=", 4);
        r.check("at most two positive eigenvalues" + tag, anchor_f, s.n_plus, "<=", 2);
        r.check("at most two negative eigenvalues" + tag, anchor_f, s.n_minus, "<=", 2);
        r.check("isometry: two evaluation paths agree" + tag, "is a linear isometry", iso.max_deviation, "<", 1e-12);
        r.check("surjective iff rank 4" + tag, "if and only if this function is surjective",
                double(iso.surjective == (s.rank == 4)), "==", 1.0);
        if (want_rank >= 0) r.check("expected rank" + tag, "the dimension is maximal", s.rank, "==", want_rank);
        if (!want_sig.empty()) {
            r.check("expected n_plus" + tag, "non-degenerate indefinite inner product", s.n_plus, "==", want_sig[0]);
            r.check("expected n_minus" + tag, "non-degenerate indefinite inner product", s.n_minus, "==", want_sig[1]);
        }
    }
    r.results["points"] = pts;
    if (c.params.contains("translations")) {
        const auto as = parse_points(c.params.at("translations"), "params.translations");
        Json tr = Json::array();
        for (std::size_t i = 0; i < as.size(); ++i) {
            const TranslationReport rep = translation_covariance_check(f, c.points[0], as[i], g, c.eval);
            tr.push_back({{"a", point_json(as[i])},
                          {"spectral_deviation", rep.spectral_deviation},
                          {"norm_left", rep.norm_left},
                          {"norm_right", rep.norm_right}});
            const std::string anchor = "the local correlation function associated with";
            r.check("translated spectra agree, a #" + std::to_string(i), anchor, rep.spectral_deviation, "<", 1e-10);
        }
        r.results["translations"] = tr;
    }
    r.tables.push_back(std::move(t));
    return r;
}

// ---- regularity ---------------------------------------------------------------------------

Report regularity(const ExperimentConfig& c) {
    require_keys(c.params, {"epsilons", "sigma", "x0", "lattice_n"}, "params");
    Report r;
    base_provenance(r, c, nullptr);
    const double m = c.mass;
    const double sigma = get_positive(c.params, "sigma", m, "params");
    const SpacetimePoint x0 = param_point(c.params, "x0", SpacetimePoint{});
    Json kind = c.cutoff_spec.is_null() ? Json{{"kind", "sharp"}, {"epsilon", 0.1}} : c.cutoff_spec;
    const std::vector<double> eps = param_doubles(c.params, "epsilons", {kind.value("epsilon", 0.1)});
    r.provenance["sigma"] = sigma;
    r.provenance["x0"] = point_json(x0);
    r.provenance["cutoff_kind"] = kind.value("kind", std::string("sharp"));

    // point values of the four special solutions
    const auto sp = special_solutions(sigma, x0, m);
    Json vals = Json::array();
    for (std::size_t a = 0; a < 4; ++a) {
        const Bispinor v = evaluate(sp[a].packet, x0, c.eval);
        const double dev = (v - sp[a].C * unit_spinor(sp[a].mu)).cwiseAbs().maxCoeff();
        Json e;
        e["alpha"] = a;
        e["target"] = std::string(sp[a].C < 0 ? "-e" : "e") + std::to_string(sp[a].mu);
        e["value"] = Json::array();
        for (int k = 0; k < 4; ++k) e["value"].push_back(cjson(v(k)));
        e["max_component_deviation"] = dev;
        vals.push_back(e);
        r.check("special solution " + std::to_string(a) + " value at x0", "are linearly independent vectors of", dev,
                "<=", 1e-8);
    }
    r.results["special_values"] = vals;

    std::vector<WavePacket> pk;
    for (const auto& s : sp) pk.push_back(s.packet);
    const SolutionFamily fam(pk);
    Json per = Json::array();
    for (double e : eps) {
        if (!(e > 0.0)) throw InvalidArgument("params.epsilons: must be positive");
        Json ks = kind;
        ks["epsilon"] = e;
        const CutoffProfile g = parse_cutoff(ks, m);
        const CorrelationMatrix M = correlation_matrix(fam, x0, g, c.eval);
        const SpinSpaceReport s = spin_space_report(M.M);
        per.push_back({{"epsilon", e},
                       {"m_epsilon", m * e},
                       {"eigenvalues", vec_json(s.eigenvalues)},
                       {"rank", s.rank},
                       {"signature", {s.n_plus, s.n_minus}}});
        const std::string tag = " at m eps = " + format_g(m * e, 6);
        const std::string anchor = "are linearly independent vectors of";
        r.check("rank 4" + tag, anchor, s.rank, "==", 4);
        r.check("two positive eigenvalues" + tag, "non-degenerate indefinite inner product", s.n_plus, "==", 2);
        r.check("two negative eigenvalues" + tag, "non-degenerate indefinite inner product", s.n_minus, "==", 2);
    }
    r.results["vacuum"] = per;

    if (c.params.contains("lattice_n")) {
        Json ks = kind;
        ks["epsilon"] = eps.front();
        const CutoffProfile g = parse_cutoff(ks, m);
        LatticeSpec ls;
        ls.n = get_int(c.params, "lattice_n", 8, 2, 64, "params");
        const LatticeSea sea = make_lattice_sea(ls, g, m);
        const DiagonalSpectrum d = diagonal_spectrum(g, m, c.eval.quad);
        const Eigenbasis eb = eigenbasis_at_point(sea, x0, g, d, c.eval);
        r.results["eigenbasis"] = {{"modes", sea.family.size()},
                                   {"eigenvalues", vec_json(eb.eigenvalues)},
                                   {"expected", vec_json(eb.expected)},
                                   {"lattice_expected", vec_json(2.0 * pi * eb.lattice_lambda)},
                                   {"residual", vec_json(eb.residual)}};
        const std::string anchor = "a linear basis for";
        for (int mu = 0; mu < 4; ++mu) {
            const std::string tag = " mu = " + std::to_string(mu);
            r.check("eigenvector residual" + tag, anchor, eb.residual(mu), "<", 1e-10);
            if (mu < 2) r.check("eigenvalue negative" + tag, anchor, eb.eigenvalues(mu), "<", 0.0);
            else r.check("eigenvalue positive" + tag, anchor, eb.eigenvalues(mu), ">", 0.0);
        }
    }
    return r;
}

// ---- holes --------------------------------------------------------------------------------------

Report holes(const ExperimentConfig& c) {
    require_keys(c.params, {"x0", "sigma", "delta", "epsilon_tol", "hole", "random_phi", "lattice_n"}, "params");
    Report r;
    const CutoffProfile g = need_cutoff(c);
    base_provenance(r, c, &g);
    const double m = c.mass;
    const SpacetimePoint x0 = param_point(c.params, "x0", SpacetimePoint{});
    const double sigma = get_positive(c.params, "sigma", m, "params");
    const double delta = get_positive(c.params, "delta", 1e-3, "params");
    const double tol = get_positive(c.params, "epsilon_tol", 1e-2, "params");
    const int nphi = get_int(c.params, "random_phi", 4, 0, 64, "params");
    if (!c.params.contains("hole")) throw InvalidArgument("holes: params needs a \"hole\" packet list");
    std::vector<WavePacket> hp;
    for (const auto& e : c.params.at("hole")) hp.push_back(parse_packet(e, m));
    if (hp.empty()) throw InvalidArgument("params.hole: empty");
    const SolutionFamily target = orthonormalize_family(SolutionFamily(hp), c.eval);
    r.provenance["x0"] = point_json(x0);
    r.provenance["sigma"] = sigma;
    r.provenance["delta"] = delta;

    const ApproximatingSet as = make_approximating_set(target, delta, tol, c.eval);
    const int n = static_cast<int>(target.size());
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    Json aj;
    aj["size"] = n;
    aj["eps_prime"] = as.eps_prime;
    aj["max_distance"] = as.max_distance;
    aj["overlap_defect"] = as.overlap_defect;
    aj["overlap_inverse_norm"] = as.overlap_inverse_norm;
    Json dj = Json::array();
    for (Eigen::Index i = 0; i < as.minors.diag.size(); ++i) dj.push_back(std::abs(as.minors.diag(i)));
    aj["minor_diag_abs"] = dj;
    aj["minor_off_abs_max"] = as.minors.off.size() ? as.minors.off.cwiseAbs().maxCoeff() : 0.0;
    r.results["approximating_set"] = aj;

    const std::string a_anchor = "there exists an orthonormal set";
    r.check("||u_i - psi_i|| below tolerance", a_anchor, as.max_distance, "<", tol);
    r.check("|(u_i|psi_j) - delta_ij| below tolerance", a_anchor, as.overlap_defect, "<=", tol);
    r.check("overlap matrix nonsingular (1/||M^-1||)", "which is a contradiction", 1.0 / as.overlap_inverse_norm, ">", 0.0);
    if (fact * as.eps_prime < 1.0) {
        const std::string lb = "Exploiting Leibniz formula for the determinant";
        for (Eigen::Index i = 0; i < as.minors.diag.size(); ++i)
            r.check("|det G_{i,i^}| lower bound, i = " + std::to_string(i + 1), lb, std::abs(as.minors.diag(i)), ">=",
                    1.0 - fact * as.eps_prime);
        r.check("|det G_{i,k^}| upper bound", lb, aj["minor_off_abs_max"].get<double>(), "<=", fact * as.eps_prime);
    }

    // random phi: gaussian packets around the hole
    Rng rng(c.seed);
    if (nphi > 0) {
        std::vector<WavePacket> phis;
        for (int k = 0; k < nphi; ++k) {
            const WavePacket& base = hp[static_cast<std::size_t>(rng.index(static_cast<int>(hp.size())))];
            const Vec3 p(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4));
            const SpacetimePoint xc(0.0, base.center.x + Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)));
            phis.push_back(gaussian_packet(Energy::negative, rng.index(2) ? Spin::up : Spin::down, rng.uniform(0.25, 0.6),
                                           p, xc, rng.uniform(0.5, 1.5), m));
        }
        const Projection pr = project_out(SolutionFamily(phis), as, c.eval);
        Json pj = Json::array();
        for (int k = 0; k < nphi; ++k) {
            Json lam = Json::array();
            for (int i = 0; i < n; ++i) lam.push_back(cjson(pr.lambda(i, k)));
            pj.push_back({{"lambda", lam},
                          {"lambda_norm", pr.lambda_norm(k)},
                          {"phi_norm", pr.phi_norm(k)},
                          {"orthogonality", pr.orthogonality(k)}});
            const std::string tag = " (phi #" + std::to_string(k) + ")";
            r.check("max_j |(u_j|Psi[phi])|" + tag, "has one and only one solution", pr.orthogonality(k), "<", 1e-10);
            if (pr.bound_applicable)
                r.check("|lambda| <= 2 ||phi||" + tag, "for every function", pr.lambda_norm(k), "<=", 2.0 * pr.phi_norm(k));
        }
        r.results["projections"] = pj;
        r.results["lambda_bound"] = pr.bound_applicable ? "applicable" : "not applicable";
    }

    const HoleRegularityReport hr = hole_regularity_experiment(&as, x0, g, sigma, m, c.eval);
    Json hj;
    hj["values"] = cmat_json(hr.values);
    hj["eigenvalues"] = vec_json(hr.spin.eigenvalues);
    hj["rank"] = hr.spin.rank;
    hj["signature"] = {hr.spin.n_plus, hr.spin.n_minus};
    hj["direct_A"] = hr.direct;
    Json lam = Json::array();
    for (Eigen::Index a = 0; a < hr.lambda.cols(); ++a) {
        Json col = Json::array();
        for (Eigen::Index i = 0; i < hr.lambda.rows(); ++i) col.push_back(cjson(hr.lambda(i, a)));
        lam.push_back(col);
    }
    hj["lambda"] = lam;
    hj["micro"] = {{"value", hr.micro.value},
                   {"density", hr.micro.density},
                   {"gradient", hr.micro.gradient},
                   {"macroscopic", hr.micro.macroscopic}};
    auto bound_json = [](const AnalyticHoleBound& b) {
        return Json{{"sigma_over_m", b.lambda},
                    {"A_a_bound", b.a},
                    {"A_b_bound", b.b},
                    {"verdict", b.holds ? "holds" : "fails"}};
    };
    hj["analytic_desk"] = bound_json(hr.desk);
    hj["analytic_extreme"] = bound_json(hr.extreme);
    hj["numerical_verdict"] = hr.spin.rank == 4 ? "regular" : "not regular";
    r.results["hole_regularity"] = hj;
    r.check("projected special solutions keep rank 4", "Then the following vectors are linearly independent",
            hr.spin.rank, "==", 4);
    r.check("hole is macroscopic (E < 1e9 m^{3/2})", "admits an approximating smooth set", hr.micro.value, "<",
            1e9 * std::pow(m, 1.5));

    if (c.params.contains("lattice_n")) {
        LatticeSpec ls;
        ls.n = get_int(c.params, "lattice_n", 6, 2, 32, "params");
        const LatticeSea sea = make_lattice_sea(ls, g, m);
        EvalOptions o = c.eval;
        o.cell_average = ls.cell_average;
        const Eigen::MatrixXcd R = sea.family.values(x0, &g, o);
        const DegeneracyReport dg = hole_degeneracy(R);
        const DiagonalSpectrum d = diagonal_spectrum(g, m, c.eval.quad);
        const Eigenbasis eb = eigenbasis_at_point(sea, x0, g, d, c.eval);
        const DegeneracyReport de = hole_degeneracy(R, eb.coeffs);
        r.results["degeneracy"] = {{"modes", R.cols()},
                                   {"F_norm", dg.f_norm},
                                   {"F0_norm_range_complement", dg.f0_norm},
                                   {"removed", dg.removed},
                                   {"F0_norm_eigenbasis_hole", de.f0_norm}};
        const std::string anchor = "creates a critical defect";
        r.check("||F0(x0)|| after removing range F(x0)", anchor, dg.f0_norm, "<", 1e-10);
        r.check("||F0(x0)|| after removing span e_{x0,mu}", anchor, de.f0_norm, "<", 1e-10);
    }
    return r;
}

// ---- perturbation ------------------------------------------------------------------------------

std::vector<WavePacket> random_states(Rng& rng, const SpacetimePoint& x, double m) {
    std::vector<WavePacket> st;
    const int np = rng.index(3);      // 0..2 particles
    const int na = 1 + rng.index(2);  // 1..2 antiparticles
    for (int k = 0; k < np + na; ++k) {
        const Energy e = k < np ? Energy::positive : Energy::negative;
        const Vec3 p(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4));
        const SpacetimePoint c(x.t, x.x + Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)));
        st.push_back(gaussian_packet(e, rng.index(2) ? Spin::up : Spin::down, rng.uniform(0.2, 0.3), p, c, 1.0, m));
    }
    return st;
}

Report perturbation(const ExperimentConfig& c) {
    require_keys(c.params, {"cases", "x", "sweep"}, "params");
    Report r;
    const CutoffProfile g = need_cutoff(c);
    base_provenance(r, c, &g);
    const double m = c.mass;
    const int cases = get_int(c.params, "cases", 20, 0, 1000, "params");
    const SpacetimePoint x = param_point(c.params, "x", SpacetimePoint{});
    r.provenance["x"] = point_json(x);
    const DiagonalSpectrum d = diagonal_spectrum(g, m, c.eval.quad);
    r.results["lambda_plus"] = d.lambda_plus;
    r.results["lambda_minus"] = d.lambda_minus;

    const PerturbationCase empty = eigenvalue_perturbation_experiment({}, x, g, d, 1.0, c.eval);
    r.check("no states: eigenvalues unmoved", "fulfill the constraint", empty.max_distance, "<=", 1e-15);

    Rng rng(c.seed);
    CsvTable t{"cases",
               {"case", "states", "max_distance", "delta_norm", "micro", "two_pi_max_distance", "two_micro_sq",
                "density_sum"},
               {}};
    for (int k = 0; k < cases; ++k) {
        const auto st = random_states(rng, x, m);
        const PerturbationCase pc = eigenvalue_perturbation_experiment(st, x, g, d, 1.0, c.eval);
        t.rows.push_back({double(k), double(st.size()), pc.max_distance, pc.diag.delta_norm, pc.micro,
                          2.0 * pi * pc.max_distance, 2.0 * pc.micro * pc.micro, pc.density_sum});
        const std::string tag = " (case " + std::to_string(k) + ")";
        r.check("eigenvalue shift <= ||Delta P||_2" + tag, "Bauer-Fike Theorem", pc.max_distance, "<=",
                pc.diag.delta_norm * (1.0 + 1e-12));
        r.check("2 pi shift <= 2 E^2" + tag, "four non-vanishing real eigenvalues", 2.0 * pi * pc.max_distance, "<=",
                2.0 * pc.micro * pc.micro);
        r.check("2 pi ||Delta P|| <= sum |R e_i|^2" + tag, "four non-vanishing real eigenvalues", pc.lifted_norm,
                "<=", pc.density_sum * (1.0 + 1e-12));
        r.check("sum |R e_i|^2 <= 2 E^2" + tag, "four non-vanishing real eigenvalues", pc.density_sum, "<=",
                2.0 * pc.micro * pc.micro);
    }
    r.results["cases"] = cases;
    r.tables.push_back(std::move(t));

    if (param_bool(c.params, "sweep", true)) {
        const auto st = random_states(rng, x, m);
        Json sw = Json::array();
        double shift1 = 0.0, bound1 = 0.0;
        for (double s : {1.0, 2.0, 4.0}) {
            const PerturbationCase pc = eigenvalue_perturbation_experiment(st, x, g, d, s, c.eval);
            const double bound = 2.0 * pc.micro * pc.micro;
            if (s == 1.0) {
                shift1 = pc.max_distance;
                bound1 = bound;
            }
            sw.push_back({{"scale", s}, {"max_distance", pc.max_distance}, {"two_micro_sq", bound}});
            if (s == 2.0) {
                r.check("bound quadruples when the amplitude doubles", "four non-vanishing real eigenvalues",
                        rel(bound / bound1, 4.0), "<=", 1e-12);
                r.check("shift grows about quadratically", "four non-vanishing real eigenvalues",
                        std::abs(pc.max_distance / shift1 - 4.0), "<", 0.5);
            }
        }
        r.results["amplitude_sweep"] = sw;
    }
    return r;
}

// ---- injectivity ---------------------------------------------------------------------------------

Report injectivity(const ExperimentConfig& c) {
    require_keys(c.params, {"degenerate"}, "params");
    Report r;
    const CutoffProfile g = need_cutoff(c);
    base_provenance(r, c, &g);
    const double m = c.mass;
    std::vector<SpacetimePoint> pts = c.points;
    if (pts.empty())
        for (int i = 0; i < 5; ++i) pts.push_back({0.0, i / m, 0.0, 0.0});
    const SolutionFamily f = need_family(c);
    const InjectivityReport ir = injectivity_probe(f, pts, g, c.eval);
    Json pj = Json::array();
    for (const auto& p : pts) pj.push_back(point_json(p));
    Json dist = Json::array();
    for (Eigen::Index i = 0; i < ir.distances.rows(); ++i) dist.push_back(vec_json(ir.distances.row(i).transpose()));
    r.results["points"] = pj;
    r.results["distances"] = dist;
    r.results["min_distance"] = ir.min_distance;
    r.results["argmin"] = {ir.argmin_i, ir.argmin_j};
    r.results["threshold"] = ir.threshold;
    r.results["margin"] = ir.min_distance - ir.threshold;
    r.check("distinct points give distinct F(x)", "is injective", ir.min_distance, ">", ir.threshold);

    if (c.params.contains("degenerate")) {
        const Json& dg = c.params.at("degenerate");
        require_keys(dg, {"momentum", "half"}, "params.degenerate");
        const Vec3 k = dg.contains("momentum") ? parse_vec3(dg.at("momentum"), "params.degenerate.momentum") : Vec3::Zero();
        const double half = get_positive(dg, "half", 0.1, "params.degenerate");
        const InjectivityReport dr = injectivity_probe(single_mode_family(k, half, m), pts, g, c.eval);
        r.results["degenerate"] = {{"min_distance", dr.min_distance},
                                   {"threshold", dr.threshold},
                                   {"separated", dr.separated}};
        r.check("single-mode family does not separate points", "is injective", dr.min_distance, "<=", dr.threshold);
    }
    return r;
}

// ---- decay --------------------------------------------------------------------------------------

Report decay(const ExperimentConfig& c) {
    require_keys(c.params, {"packet", "direction", "radii", "timelike"}, "params");
    Report r;
    base_provenance(r, c, nullptr);
    const double m = c.mass;
    if (!c.params.contains("packet")) throw InvalidArgument("decay: params needs a \"packet\"");
    const WavePacket u = parse_packet(c.params.at("packet"), m);
    const SpacetimePoint dir = param_point(c.params, "direction", SpacetimePoint(0.0, 1.0, 0.0, 0.0));
    const std::vector<double> radii = param_doubles(c.params, "radii", {0.0, 5.0, 10.0, 20.0, 40.0});

    CsvTable t{"ray", {"radius", "t", "x1", "x2", "x3", "abs_u", "shape", "ratio"}, {}};
    const auto s = decay_probe(u, dir, radii, c.eval);
    for (const auto& e : s)
        t.rows.push_back({e.radius, e.point.t, e.point.x(0), e.point.x(1), e.point.x(2), e.value, e.shape,
                          std::isfinite(e.shape) ? e.value / e.shape : 0.0});
    const std::string anchor = "then $\\lim_{n\\to \\infty}|u(x_n)|=0$";
    r.check("last value below first value", anchor, s.back().value, "<", s.front().value);
    if (s.size() >= 3) {
        const std::size_t n = s.size();
        r.check("tail strictly decreasing (1)", anchor, s[n - 1].value, "<", s[n - 2].value);
        r.check("tail strictly decreasing (2)", anchor, s[n - 2].value, "<", s[n - 3].value);
    }
    r.tables.push_back(std::move(t));

    if (c.params.contains("timelike")) {
        const Json& tl = c.params.at("timelike");
        require_keys(tl, {"direction", "radii"}, "params.timelike");
        const SpacetimePoint td = parse_point(tl.at("direction"), "params.timelike.direction");
        if (!(std::abs(td.t) > td.x.norm())) throw InvalidArgument("params.timelike.direction: must be timelike");
        const auto tr = parse_doubles(tl.at("radii"), "params.timelike.radii");
        const auto ts = decay_probe(u, td, tr, c.eval);
        CsvTable tt{"timelike", t.header, {}};
        // C fitted on the first half of the samples, then tested on the second half
        const std::size_t half = std::max<std::size_t>(1, ts.size() / 2);
        double C = 0.0;
        for (std::size_t i = 0; i < half; ++i)
            if (std::isfinite(ts[i].shape)) C = std::max(C, ts[i].value / ts[i].shape);
        double worst = 0.0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto& e = ts[i];
            const double ratio = std::isfinite(e.shape) ? e.value / e.shape : 0.0;
            tt.rows.push_back({e.radius, e.point.t, e.point.x(0), e.point.x(1), e.point.x(2), e.value, e.shape, ratio});
            if (i >= half) worst = std::max(worst, ratio);
        }
        r.results["timelike_fitted_C"] = C;
        r.results["timelike_tail_ratio_max"] = worst;
        r.results["timelike_ratio_growth"] = C > 0.0 ? worst / C : 0.0;
        r.check("|u| <= C shape on the far half of the timelike ray", "The same argument applies", worst, "<=", 2.0 * C);
        r.tables.push_back(std::move(tt));
    }
    return r;
}

// ---- representation-sum -----------------------------------------------------------------------

Report representation_sum(const ExperimentConfig& c) {
    require_keys(c.params, {"sizes", "x", "y", "cell_average", "max_final_error"}, "params");
    Report r;
    const CutoffProfile g = need_cutoff(c);
    base_provenance(r, c, &g);
    const double m = c.mass;
    const SpacetimePoint x = param_point(c.params, "x", SpacetimePoint{});
    const SpacetimePoint y = param_point(c.params, "y", SpacetimePoint{});
    const auto sizes = param_doubles(c.params, "sizes", {16, 32, 64});
    const double target = get_positive(c.params, "max_final_error", 1e-2, "params");
    const KernelMatrix K = kernel(x - y, g, Energy::negative, KernelPower::double_, m, c.eval.quad);
    const double scale = K.value.cwiseAbs().maxCoeff();

    CsvTable t{"refinement", {"n", "modes", "spacing", "relative_error"}, {}};
    std::vector<double> errs;
    Json lj = Json::array();
    for (double sz : sizes) {
        if (sz < 2 || sz > 256 || sz != std::floor(sz)) throw InvalidArgument("params.sizes: integers in [2, 256]");
        LatticeSpec ls;
        ls.n = static_cast<int>(sz);
        ls.cell_average = param_bool(c.params, "cell_average", true);
        const LatticeKernel L = kernel_from_lattice_sum(x, y, ls, g, Energy::negative, m);
        const double e = (L.value - K.value).cwiseAbs().maxCoeff() / scale;
        errs.push_back(e);
        t.rows.push_back({sz, double(L.modes), L.spacing, e});
        lj.push_back({{"n", ls.n}, {"modes", L.modes}, {"spacing", L.spacing}, {"coarse", L.coarse}, {"relative_error", e}});
    }
    r.results["lattices"] = lj;
    const std::string anchor = "be a Hilbert basis of";
    for (std::size_t i = 1; i < errs.size(); ++i)
        r.check("error decreases under refinement (" + format_g(sizes[i - 1], 4) + " -> " + format_g(sizes[i], 4) + ")",
                anchor, errs[i], "<", errs[i - 1]);
    r.check("final relative error", anchor, errs.back(), "<", target);
    r.tables.push_back(std::move(t));
    return r;
}

using Runner = std::function<Report(const ExperimentConfig&)>;

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> m = {
        {"kernel-diag", kernel_diag},   {"kernel-grid", kernel_grid},   {"correlation", correlation},
        {"regularity", regularity},     {"holes", holes},               {"perturbation", perturbation},
        {"injectivity", injectivity},   {"decay", decay},               {"representation-sum", representation_sum}};
    return m;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : state_(seed) {}

double Rng::uniform() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::index(int n) { return std::min(n - 1, static_cast<int>(uniform() * n)); }

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : runners()) v.push_back(k);
        return v;
    }();
    return names;
}

Report run_experiment(const std::string& name, const ExperimentConfig& cfg) {
    const auto it = runners().find(name);
    if (it == runners().end()) throw InvalidArgument("unknown experiment \"" + name + "\"");
    if (!cfg.experiment.empty() && cfg.experiment != name)
        throw InvalidArgument("config is for experiment \"" + cfg.experiment + "\", not \"" + name + "\"");
    ExperimentConfig c = cfg;
    c.experiment = name;
    Report r = it->second(c);
    r.experiment = name;
    r.seed = c.seed;
    r.config = c.raw;
    return r;
}

}  // namespace cfslab
