#ifndef TODA_APPARENCY_HPP
#define TODA_APPARENCY_HPP

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <gmpxx.h>

#include "toda/elliptic.hpp"
#include "toda/jet.hpp"
#include "toda/polyring.hpp"

namespace toda
{

struct PunctureSpec
{
    cplx p = 0.0;
    int n1 = 0;
    int n2 = 0;
};

struct PunctureData
{
    PunctureSpec spec;
    mpq_class gamma1, gamma2;
    mpq_class alpha, beta;
    std::array<mpq_class, 3> rho;
};

struct ProblemSpec
{
    LatticeTau lattice;
    std::vector<PunctureData> punctures;
    long N1 = 0, N2 = 0;
    bool critical = false;
    cplx epsilon = 1.0;

    int m() const { return static_cast<int>(punctures.size()) - 1; }
    // sum of gamma_{1,k}
    mpq_class gamma1_total() const;
    // largest n1+n2+2 over the punctures
    int max_order() const;
};

ProblemSpec derive_problem(const LatticeTau &lattice, const std::vector<PunctureSpec> &punctures);
ProblemSpec single_puncture(cplx tau, int n1, int n2);
// throws CriticalCaseError when N1 == N2 (mod 3)
void require_noncritical(const ProblemSpec &p);

// (A_0..A_m, B_0..B_m, B, D_0..D_m, D)
struct ParamVec
{
    std::vector<cplx> A, Bk, Dk;
    cplx B = 0.0, D = 0.0;

    ParamVec() = default;
    explicit ParamVec(int m) : A(m + 1, 0.0), Bk(m + 1, 0.0), Dk(m + 1, 0.0) {}
    static ParamVec one_puncture(cplx B, cplx D0, cplx D);

    int m() const { return static_cast<int>(A.size()) - 1; }
    std::size_t size() const { return 3 * A.size() + 2; }
    std::vector<cplx> flatten() const;
    static ParamVec unflatten(const std::vector<cplx> &x);
};

inline std::size_t index_A(int k, int) { return static_cast<std::size_t>(k); }
inline std::size_t index_Bk(int k, int m) { return static_cast<std::size_t>(m + 1 + k); }
inline std::size_t index_B(int m) { return static_cast<std::size_t>(2 * (m + 1)); }
inline std::size_t index_Dk(int k, int m) { return static_cast<std::size_t>(2 * (m + 1) + 1 + k); }
inline std::size_t index_D(int m) { return static_cast<std::size_t>(3 * (m + 1) + 1); }

struct ApparencySystemM0
{
    int n1 = 0, n2 = 0;
    WeightedPoly P01, P02, P03;
};

ApparencySystemM0 build_m0_system(int n1, int n2);

struct EvenPoly
{
    int n1 = 0, n2 = 0;
    int Ne = 0;
    int k = 1;                    // which exponent seeds the series at infinity
    WeightedPoly P;               // monic in B, x-plane grading
    std::vector<WeightedPoly> C;  // C_0 .. C_{Ne-1}
    WeightedPoly rhs;             // right side at j = Ne
};

int even_count_Ne(int n1, int n2);
EvenPoly build_even_poly(int n1, int n2);

// coefficients of P_{Ne} in B, lowest first, evaluated at (g2, g3)
std::vector<cplx> even_poly_coefficients(const EvenPoly &ep, cplx g2, cplx g3);

long bezout_bound(const ProblemSpec &problem);

// Numeric apparency residuals for general puncture configurations. Holds the
// lattice constants zeta_{kl}, wp^{(n)}_{kl} and the Laurent table once.
class ResidualMap
{
public:
    ResidualMap(const ProblemSpec &problem, const EllipticContext &ctx);

    std::size_t size() const { return 3 * problem_.punctures.size() + 2; }
    const ProblemSpec &problem() const { return problem_; }

    // (sum B_k, sum A_k, {P_{k,1}, P_{k,2}, P_{k,3}}_k)
    std::vector<cplx> operator()(const ParamVec &p) const;
    std::vector<cplx> evaluate(const ParamVec &p, Eigen::MatrixXcd *jacobian) const;

    // Laurent coefficients at p_k of Q = -W2 (as u^{i-2}) and R = W3 (as u^{i-3}), i = 0..order
    void laurent(const ParamVec &p, int k, int order, std::vector<cplx> &q, std::vector<cplx> &r) const;

private:
    template <class T> std::vector<T> run(const std::vector<T> &x) const;
    template <class T> void coefficients(const std::vector<T> &x, int k, int order, std::vector<T> &q,
                                         std::vector<T> &r) const;

    ProblemSpec problem_;
    std::vector<cplx> b_;
    // per ordered pair (k, l): zeta_{kl}, and wp^{(n)}_{kl} for n = 0..order
    std::vector<std::vector<cplx>> zeta_;
    std::vector<std::vector<std::vector<cplx>>> wpd_;
};

std::vector<cplx> residual_general(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params);

} // namespace toda

#endif
