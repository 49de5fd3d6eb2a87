#ifndef TODA_ELLIPTIC_HPP
#define TODA_ELLIPTIC_HPP

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "toda/polyring.hpp"

namespace toda
{

using cplx = std::complex<double>;

struct LatticeTau
{
    cplx tau;
};

const cplx &rho_point(); // e^{pi i/3}

// SL(2,Z) element acting by tau -> (a tau + b)/(c tau + d)
struct Modular
{
    long a = 1, b = 0, c = 0, d = 1;
};

struct Reduced
{
    cplx tau;   // representative in the standard fundamental domain
    Modular g;  // tau_reduced = g . tau_input
    cplx lambda; // c tau + d, so that Lambda_tau = lambda * Lambda_reduced
};

Reduced reduce_tau(cplx tau);

// Eisenstein series; tau should be reduced for fast convergence
cplx eisenstein_E2(cplx tau);
cplx eisenstein_E4(cplx tau);
cplx eisenstein_E6(cplx tau);

cplx j_invariant(cplx tau);

enum class WKind
{
    P,
    P_DERIV,
    ZETA
};

// symbolic Laurent coefficients of wp in Q[g2,g3] (invariant_vars table)
std::vector<WeightedPoly> laurent_b_symbolic(int order);

class EllipticContext
{
public:
    static constexpr double default_tol = 1e-12;
    static constexpr double pole_guard = 1e-6;

    cplx tau() const { return tau_; }
    cplx g2() const { return g2_; }
    cplx g3() const { return g3_; }
    const std::array<cplx, 3> &e() const { return e_; }
    double tol() const { return tol_; }
    int order() const { return static_cast<int>(b_.size()) - 1; }
    const std::vector<cplx> &b() const { return b_; }
    const std::vector<WeightedPoly> &b_symbolic() const { return b_sym_; }
    // quasi-periods of zeta for the lattice Z + Z tau
    cplx eta1() const { return eta1_; }
    cplx eta2() const { return eta2_; }

    cplx wp(cplx z) const;
    cplx wp_prime(cplx z) const;
    // values wp^{(0)} .. wp^{(nmax)} at z
    std::vector<cplx> wp_derivs(cplx z, int nmax) const;
    cplx zeta(cplx z) const;
    cplx eval(cplx z, WKind kind, int n = 0) const;

    // distance from z to the nearest lattice point
    double lattice_distance(cplx z) const;

    nlohmann::ordered_json to_json() const;

    friend EllipticContext compute_invariants(const LatticeTau &lattice, double tol, int order);

private:
    struct Local
    {
        cplx z;   // reduced point in the reduced lattice
        long m = 0, n = 0; // z/lambda = z + m + n tau_r
    };
    Local localize(cplx z, int pole_order) const;
    cplx wp_reduced(cplx z) const;
    cplx wp_prime_reduced(cplx z) const;
    cplx zeta_reduced(cplx z) const;

    cplx tau_;
    Reduced red_;
    cplx q_;
    cplx g2_, g3_;
    cplx g2r_, g3r_;       // invariants of the reduced lattice
    cplx c1r_;             // 1/12 - 2 sum sigma_1(n) q^n on the reduced lattice
    cplx eta1r_, eta2r_;
    cplx eta1_, eta2_;
    std::array<cplx, 3> e_;
    std::vector<cplx> b_;
    std::vector<WeightedPoly> b_sym_;
    double tol_ = default_tol;
};

EllipticContext compute_invariants(const LatticeTau &lattice, double tol = EllipticContext::default_tol,
                                   int order = 16);

cplx eval_weierstrass(const EllipticContext &ctx, cplx z, WKind kind, int n = 0);

enum class ModularForm
{
    F343,   // 343 g2^3 - 6561 g3^2
    DELTA,  // g2^3 - 27 g3^2
    G2,
    G3
};

ModularForm parse_form(const std::string &name);
std::string form_name(ModularForm f);
int form_weight(ModularForm f);

// value and tau-derivative of a form
std::pair<cplx, cplx> form_value(ModularForm f, cplx tau);
// |f| / (|g2|^{k/4} + |g3|^{k/6})
double form_residual(ModularForm f, cplx tau);

cplx find_form_zero(ModularForm form, cplx seed, double tol = 1e-12);

// accepts "re,im", "i", "rho"
cplx parse_tau(const std::string &s);

} // namespace toda

#endif
