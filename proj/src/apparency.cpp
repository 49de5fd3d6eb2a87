#include "toda/apparency.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "toda/error.hpp"

namespace toda
{

namespace
{

constexpr double pi = 3.14159265358979323846;

double torus_distance(cplx z, cplx tau)
{
    double y = z.imag() / tau.imag();
    double x = z.real() - y * tau.real();
    double best = std::numeric_limits<double>::infinity();
    double fy = std::floor(y), fx = std::floor(x);
    for (int i = -1; i <= 2; ++i)
        for (int j = -1; j <= 2; ++j)
            best = std::min(best, std::abs(z - (fx + i) - (fy + j) * tau));
    return best;
}

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

} // namespace

mpq_class ProblemSpec::gamma1_total() const
{
    mpq_class s = 0;
    for (const auto &p : punctures)
        s += p.gamma1;
    return s;
}

int ProblemSpec::max_order() const
{
    int o = 0;
    for (const auto &p : punctures)
        o = std::max(o, p.spec.n1 + p.spec.n2 + 2);
    return o;
}

ProblemSpec derive_problem(const LatticeTau &lattice, const std::vector<PunctureSpec> &punctures)
{
    if (!(lattice.tau.imag() > 0.0))
        throw StructuralError("tau must lie in the upper half-plane");
    if (punctures.empty())
        throw StructuralError("at least one puncture is required");
    ProblemSpec ps;
    ps.lattice = lattice;
    long total = 0;
    for (std::size_t k = 0; k < punctures.size(); ++k)
    {
        const auto &s = punctures[k];
        if (s.n1 < 0 || s.n2 < 0)
            throw StructuralError("puncture multiplicities must be nonnegative");
        for (std::size_t l = 0; l < k; ++l)
            if (torus_distance(s.p - punctures[l].p, lattice.tau) < 1e-8)
            {
                std::ostringstream os;
                os << "punctures " << l << " and " << k << " coincide on the torus";
                throw StructuralError(os.str());
            }
        PunctureData d;
        d.spec = s;
        d.gamma1 = mpq_class(2 * s.n1 + s.n2, 3);
        d.gamma2 = mpq_class(s.n1 + 2 * s.n2, 3);
        d.gamma1.canonicalize();
        d.gamma2.canonicalize();
        const mpq_class &g1 = d.gamma1, &g2 = d.gamma2;
        d.alpha = g1 * (g1 + 1) + g2 * (g2 + 1) - g1 * g2;
        d.beta = -(2 * g1 * (g1 + 1) + g1 * g2 * (g1 - g2 - 1)) / 2;
        d.rho = {-g1, -g1 + (s.n1 + 1), -g1 + (s.n1 + s.n2 + 2)};
        ps.N1 += s.n1;
        ps.N2 += s.n2;
        total += s.n1 + s.n2;
        ps.punctures.push_back(d);
    }
    if (total < 1)
        throw StructuralError("at least one multiplicity must be positive");
    long diff = ((ps.N1 - ps.N2) % 3 + 3) % 3;
    ps.critical = (diff == 0);
    long e = ((2 * ps.N1 + ps.N2) % 3 + 3) % 3;
    if (e == 0)
        ps.epsilon = 1.0;
    else
        ps.epsilon = std::polar(1.0, -2.0 * pi * static_cast<double>(e) / 3.0);
    return ps;
}

ProblemSpec single_puncture(cplx tau, int n1, int n2) { return derive_problem({tau}, {PunctureSpec{0.0, n1, n2}}); }

void require_noncritical(const ProblemSpec &p)
{
    if (p.critical)
    {
        std::ostringstream os;
        os << "critical parameters: N1 = " << p.N1 << " and N2 = " << p.N2
           << " satisfy N1 == N2 (mod 3); the a priori bounds fail and no census is attempted";
        throw CriticalCaseError(os.str());
    }
}

ParamVec ParamVec::one_puncture(cplx B, cplx D0, cplx D)
{
    ParamVec p(0);
    p.B = B;
    p.Dk[0] = D0;
    p.D = D;
    return p;
}

std::vector<cplx> ParamVec::flatten() const
{
    std::vector<cplx> x;
    x.reserve(size());
    x.insert(x.end(), A.begin(), A.end());
    x.insert(x.end(), Bk.begin(), Bk.end());
    x.push_back(B);
    x.insert(x.end(), Dk.begin(), Dk.end());
    x.push_back(D);
    return x;
}

ParamVec ParamVec::unflatten(const std::vector<cplx> &x)
{
    if (x.size() < 5 || (x.size() - 2) % 3 != 0)
        throw StructuralError("parameter vector must have length 3m+5");
    int m = static_cast<int>((x.size() - 2) / 3) - 1;
    ParamVec p(m);
    for (int k = 0; k <= m; ++k)
    {
        p.A[k] = x[index_A(k, m)];
        p.Bk[k] = x[index_Bk(k, m)];
        p.Dk[k] = x[index_Dk(k, m)];
    }
    p.B = x[index_B(m)];
    p.D = x[index_D(m)];
    return p;
}

// ---------------------------------------------------------------------------
// m = 0 symbolic system

namespace
{

// c_j = a + t * c_{n1+1}
struct PairPoly
{
    WeightedPoly a, t;
};

} // namespace

ApparencySystemM0 build_m0_system(int n1, int n2)
{
    if (n1 < 0 || n2 < 0)
        throw StructuralError("multiplicities must be nonnegative");
    if (((n1 - n2) % 3 + 3) % 3 == 0)
        throw CriticalCaseError("critical parameters: n1 == n2 (mod 3)");

    const VarTable Z = zplane_vars();
    const int J1 = n1 + 1, J2 = n1 + n2 + 2;
    auto bsym = laurent_b_symbolic(J2 + 2);
    std::vector<WeightedPoly> b;
    for (auto &x : bsym)
        b.push_back(x.embed(Z));

    mpq_class g1(2 * n1 + n2, 3), g2(n1 + 2 * n2, 3);
    g1.canonicalize();
    g2.canonicalize();
    mpq_class alpha = g1 * (g1 + 1) + g2 * (g2 + 1) - g1 * g2;
    mpq_class beta = -(2 * g1 * (g1 + 1) + g1 * g2 * (g1 - g2 - 1)) / 2;
    mpq_class rho = -g1;

    const WeightedPoly zero(Z);
    const WeightedPoly B = WeightedPoly::variable(Z, "B");
    const WeightedPoly D0 = WeightedPoly::variable(Z, "D0");
    const WeightedPoly D = WeightedPoly::variable(Z, "D");

    std::vector<PairPoly> c(J2 + 1, PairPoly{zero, zero});
    c[0].a = WeightedPoly::constant(Z, 1);

    ApparencySystemM0 sys{n1, n2, zero, zero, zero};
    for (int j = 1; j <= J2; ++j)
    {
        PairPoly rhs{zero, zero};
        auto acc = [&](const WeightedPoly &coef, int idx) {
            if (idx < 0)
                return;
            const PairPoly &ci = c[idx];
            rhs.a += coef * ci.a;
            rhs.t += coef * ci.t;
        };
        acc(-D0, j - 1);
        acc(mpq_class(j - 2 + rho) * B, j - 2);
        acc(-D, j - 3);
        for (int i = 4; i <= j; ++i)
            acc(mpq_class((j + rho - i) * alpha - (i - 2) * beta) * b[i], j - i);
        for (int i = 4; i <= j - 1; ++i)
            acc(-D0 * b[i], j - 1 - i);

        mpq_class phi = mpq_class(j) * (j - n1 - 1) * (j - n1 - n2 - 2);
        if (j == J1)
        {
            sys.P01 = rhs.a;
            c[j] = PairPoly{zero, WeightedPoly::constant(Z, 1)};
        }
        else if (j == J2)
        {
            sys.P02 = rhs.t;
            sys.P03 = rhs.a;
        }
        else
        {
            mpq_class inv = 1 / phi;
            c[j] = PairPoly{rhs.a * inv, rhs.t * inv};
        }
    }
    return sys;
}

// ---------------------------------------------------------------------------
// even sector

int even_count_Ne(int n1, int n2)
{
    if (n1 < 0 || n2 < 0)
        throw StructuralError("multiplicities must be nonnegative");
    if (n1 % 2 == 1 && n2 % 2 == 1)
        throw EvenNonexistenceError("n1 and n2 are both odd: the system has no even solutions");
    for (int v : {n1 + 1, n2 + 1, n1 + n2 + 2})
        if (v % 2 == 0)
            return v / 2;
    throw StructuralError("unreachable");
}

EvenPoly build_even_poly(int n1, int n2)
{
    int Ne = even_count_Ne(n1, n2);
    if (((n1 - n2) % 3 + 3) % 3 == 0)
        throw CriticalCaseError("critical parameters: n1 == n2 (mod 3)");

    const VarTable X = xplane_vars();
    mpq_class g1(2 * n1 + n2, 3);
    g1.canonicalize();
    std::array<mpq_class, 3> rho = {-g1, -g1 + (n1 + 1), -g1 + (n1 + n2 + 2)};
    int k = (n1 % 2 == 0 && n2 % 2 == 1) ? 2 : 1;
    mpq_class h = rho[k - 1] / 2;

    EvenPoly ep;
    ep.n1 = n1;
    ep.n2 = n2;
    ep.Ne = Ne;
    ep.k = k;
    const WeightedPoly zero(X);
    const WeightedPoly B = WeightedPoly::variable(X, "B");
    const WeightedPoly G2 = WeightedPoly::variable(X, "g2");
    const WeightedPoly G3 = WeightedPoly::variable(X, "g3");
    std::vector<WeightedPoly> C(Ne + 1, zero);
    C[0] = WeightedPoly::constant(X, 1);
    for (int j = 1; j <= Ne; ++j)
    {
        mpq_class s = -j - h; // -j - rho_k/2
        WeightedPoly rhs = B * mpq_class(s + 1) * C[j - 1];
        if (j >= 2)
            rhs += G2 * mpq_class((s + 2) * (s + mpq_class(3, 2)) * (s + 1)) * C[j - 2];
        if (j >= 3)
            rhs += G3 * mpq_class((s + 3) * (s + 2) * (s + 1)) * C[j - 3];
        if (j == Ne)
        {
            ep.rhs = rhs;
            break;
        }
        mpq_class phi = -4;
        for (const auto &r : rho)
            phi *= (j + h - r / 2);
        if (phi == 0)
            throw StructuralError("unexpected resonance in the even-sector recursion");
        C[j] = rhs * mpq_class(1 / phi);
    }
    C.resize(Ne);
    ep.C = C;
    auto cs = ep.rhs.coefficients_in(X.index("B"));
    if (static_cast<int>(cs.size()) != Ne + 1 || cs[Ne].total_degree() != 0)
        throw StructuralError("even-sector polynomial has unexpected leading term");
    mpq_class lead = cs[Ne].terms().begin()->second;
    ep.P = ep.rhs * mpq_class(1 / lead);
    return ep;
}

std::vector<cplx> even_poly_coefficients(const EvenPoly &ep, cplx g2, cplx g3)
{
    const VarTable &X = ep.P.vars();
    auto cs = ep.P.coefficients_in(X.index("B"));
    std::vector<cplx> out;
    for (const auto &c : cs)
        out.push_back(c.eval(std::vector<cplx>{0.0, g2, g3}));
    return out;
}

long bezout_bound(const ProblemSpec &problem)
{
    require_noncritical(problem);
    mpz_class prod = 1;
    for (const auto &p : problem.punctures)
    {
        const auto &s = p.spec;
        prod *= mpz_class((s.n1 + 1) * (s.n2 + 1)) * (s.n1 + s.n2 + 2);
    }
    mpz_class den = 3;
    for (std::size_t i = 0; i < problem.punctures.size(); ++i)
        den *= 2;
    if (prod % den != 0)
        throw StructuralError("bound is not an integer");
    mpz_class q = prod / den;
    return q.get_si();
}

// ---------------------------------------------------------------------------
// numeric residuals

ResidualMap::ResidualMap(const ProblemSpec &problem, const EllipticContext &ctx) : problem_(problem)
{
    require_noncritical(problem_);
    if (std::abs(ctx.tau() - problem.lattice.tau) > 1e-14 * std::abs(problem.lattice.tau))
        throw StructuralError("elliptic context does not match the problem lattice");
    int order = problem_.max_order() + 2;
    auto bs = laurent_b_symbolic(order);
    for (auto &x : bs)
        b_.push_back(x.eval(std::vector<cplx>{ctx.g2(), ctx.g3()}));
    std::size_t n = problem_.punctures.size();
    zeta_.assign(n, std::vector<cplx>(n, 0.0));
    wpd_.assign(n, std::vector<std::vector<cplx>>(n));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
            if (k != l)
            {
                cplx d = problem_.punctures[k].spec.p - problem_.punctures[l].spec.p;
                zeta_[k][l] = ctx.zeta(d);
                wpd_[k][l] = ctx.wp_derivs(d, order);
            }
}

template <class T>
void ResidualMap::coefficients(const std::vector<T> &x, int k, int order, std::vector<T> &q, std::vector<T> &r) const
{
    const int m = problem_.m();
    const auto &pk = problem_.punctures[k];
    const double ak = pk.alpha.get_d(), bk = pk.beta.get_d();
    q.assign(order + 1, T(0.0));
    r.assign(order + 1, T(0.0));
    const T &Ak = x[index_A(k, m)];
    const T &Bk = x[index_Bk(k, m)];
    const T &Dk = x[index_Dk(k, m)];
    auto b = [&](int j) -> cplx { return (j >= 0 && j < static_cast<int>(b_.size())) ? b_[j] : cplx(0.0); };
    for (int i = 0; i <= order; ++i)
    {
        // Q = sum alpha wp + sum B zeta + B, coefficient of u^{i-2}
        T qi = T(ak * b(i));
        if (i >= 1 && i != 2)
            qi -= Bk * (b(i - 1) / static_cast<double>(i - 2));
        if (i == 2)
            qi += x[index_B(m)];
        // R = sum beta wp' + sum D wp + sum A zeta + D, coefficient of u^{i-3}
        T ri = T(bk * static_cast<double>(i - 2) * b(i));
        if (i >= 1)
            ri += Dk * b(i - 1);
        if (i >= 2 && i != 3)
            ri -= Ak * (b(i - 2) / static_cast<double>(i - 3));
        if (i == 3)
            ri += x[index_D(m)];
        for (int l = 0; l <= m; ++l)
        {
            if (l == k)
                continue;
            const auto &w = wpd_[k][l];
            const auto &pl = problem_.punctures[l];
            const double al = pl.alpha.get_d(), bl = pl.beta.get_d();
            if (i >= 2)
                qi += T(al * w[i - 2] / factorial(i - 2));
            if (i == 2)
                qi += x[index_Bk(l, m)] * zeta_[k][l];
            if (i >= 3)
            {
                qi -= x[index_Bk(l, m)] * (w[i - 3] / factorial(i - 2));
                ri += T(bl * w[i - 2] / factorial(i - 3));
                ri += x[index_Dk(l, m)] * (w[i - 3] / factorial(i - 3));
            }
            if (i == 3)
                ri += x[index_A(l, m)] * zeta_[k][l];
            if (i >= 4)
                ri -= x[index_A(l, m)] * (w[i - 4] / factorial(i - 3));
        }
        q[i] = qi;
        r[i] = ri;
    }
}

template <class T> std::vector<T> ResidualMap::run(const std::vector<T> &x) const
{
    const int m = problem_.m();
    std::vector<T> out;
    out.reserve(size());
    T sB(0.0), sA(0.0);
    for (int k = 0; k <= m; ++k)
    {
        sB += x[index_Bk(k, m)];
        sA += x[index_A(k, m)];
    }
    out.push_back(sB);
    out.push_back(sA);
    std::vector<T> q, r;
    for (int k = 0; k <= m; ++k)
    {
        const auto &pk = problem_.punctures[k];
        const int n1 = pk.spec.n1, n2 = pk.spec.n2;
        const int J1 = n1 + 1, J2 = n1 + n2 + 2;
        const double rho = pk.rho[0].get_d();
        coefficients(x, k, J2, q, r);
        // c_j = a_j + t_j c_{J1}
        std::vector<T> a(J2 + 1, T(0.0)), t(J2 + 1, T(0.0));
        a[0] = T(1.0);
        T P1, P2, P3;
        for (int j = 1; j <= J2; ++j)
        {
            T ra(0.0), rt(0.0);
            for (int i = 1; i <= j; ++i)
            {
                T coef = q[i] * cplx(j - i + rho) - r[i];
                ra += coef * a[j - i];
                if (j - i >= J1)
                    rt += coef * t[j - i];
            }
            if (j == J1)
            {
                P1 = ra;
                t[j] = T(1.0);
            }
            else if (j == J2)
            {
                P2 = rt;
                P3 = ra;
            }
            else
            {
                double phi = static_cast<double>(j) * (j - n1 - 1) * (j - n1 - n2 - 2);
                a[j] = ra / cplx(phi);
                t[j] = rt / cplx(phi);
            }
        }
        out.push_back(P1);
        out.push_back(P2);
        out.push_back(P3);
    }
    return out;
}

std::vector<cplx> ResidualMap::operator()(const ParamVec &p) const { return evaluate(p, nullptr); }

std::vector<cplx> ResidualMap::evaluate(const ParamVec &p, Eigen::MatrixXcd *jacobian) const
{
    if (p.m() != problem_.m())
        throw StructuralError("parameter vector does not match the number of punctures");
    std::vector<cplx> x = p.flatten();
    std::vector<cplx> out;
    if (!jacobian)
        out = run(x);
    else
    {
        std::vector<Jet> xj;
        for (std::size_t i = 0; i < x.size(); ++i)
            xj.push_back(Jet::variable(x[i], i, x.size()));
        auto rj = run(xj);
        jacobian->resize(rj.size(), x.size());
        jacobian->setZero();
        for (std::size_t i = 0; i < rj.size(); ++i)
        {
            out.push_back(rj[i].v);
            for (std::size_t j = 0; j < rj[i].d.size(); ++j)
                (*jacobian)(i, j) = rj[i].d[j];
        }
    }
    for (auto v : out)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw EvaluationFailure("non-finite apparency residual");
    return out;
}

void ResidualMap::laurent(const ParamVec &p, int k, int order, std::vector<cplx> &q, std::vector<cplx> &r) const
{
    if (order > problem_.max_order() + 2)
        throw StructuralError("requested Laurent order exceeds the stored table");
    coefficients(p.flatten(), k, order, q, r);
}

std::vector<cplx> residual_general(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params)
{
    return ResidualMap(problem, ctx)(params);
}

} // namespace toda
