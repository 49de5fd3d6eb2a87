#include "toda/elliptic.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "toda/error.hpp"
#include "toda/jsonutil.hpp"

namespace toda
{

namespace
{

constexpr double pi = 3.14159265358979323846;
const cplx two_pi_i(0.0, 2.0 * pi);
constexpr int max_terms = 2000;

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

cplx check(cplx z, const char *what)
{
    if (!finite(z))
        throw EvaluationFailure(std::string(what) + ": non-finite value");
    return z;
}

// sum_{n>=1} n^k q^n / (1 - q^n)
cplx divisor_series(cplx q, int k)
{
    cplx s = 0.0, qn = 1.0;
    for (int n = 1; n <= max_terms; ++n)
    {
        qn *= q;
        double nk = std::pow(static_cast<double>(n), k);
        cplx t = nk * qn / (1.0 - qn);
        s += t;
        if (std::abs(t) <= 1e-18 * std::max(1.0, std::abs(s)))
            return s;
    }
    throw EvaluationFailure("Eisenstein series did not converge");
}

// 1 - e^a without cancellation near a = 0
cplx one_minus_exp(cplx a)
{
    double c = std::cos(a.imag()), sh = std::sin(0.5 * a.imag());
    return -cplx(std::expm1(a.real()) * c - 2.0 * sh * sh, std::exp(a.real()) * std::sin(a.imag()));
}

cplx nome(cplx tau) { return std::exp(two_pi_i * tau); }

const double k2 = 4.0 * std::pow(pi, 4) / 3.0;
const double k3 = 8.0 * std::pow(pi, 6) / 27.0;

} // namespace

const cplx &rho_point()
{
    static const cplx r(0.5, std::sqrt(3.0) / 2.0);
    return r;
}

Reduced reduce_tau(cplx tau)
{
    if (!(tau.imag() > 0.0) || !finite(tau))
        throw StructuralError("tau must lie in the upper half-plane");
    Reduced r;
    r.tau = tau;
    Modular &g = r.g;
    for (int it = 0; it < 1000; ++it)
    {
        double n = std::round(r.tau.real());
        if (n != 0.0)
        {
            r.tau -= n;
            long ln = static_cast<long>(n);
            g = {g.a - ln * g.c, g.b - ln * g.d, g.c, g.d};
        }
        if (std::norm(r.tau) < 1.0 - 1e-15)
        {
            r.tau = -1.0 / r.tau;
            g = {-g.c, -g.d, g.a, g.b};
        }
        else
            break;
    }
    // keep the boundary Re tau = -1/2 on the right side
    if (r.tau.real() < -0.5 + 1e-14)
    {
        r.tau += 1.0;
        g = {g.a + g.c, g.b + g.d, g.c, g.d};
    }
    r.lambda = static_cast<double>(g.c) * tau + static_cast<double>(g.d);
    return r;
}

cplx eisenstein_E2(cplx tau) { return 1.0 - 24.0 * divisor_series(nome(tau), 1); }
cplx eisenstein_E4(cplx tau) { return 1.0 + 240.0 * divisor_series(nome(tau), 3); }
cplx eisenstein_E6(cplx tau) { return 1.0 - 504.0 * divisor_series(nome(tau), 5); }

cplx j_invariant(cplx tau)
{
    cplx t = reduce_tau(tau).tau;
    cplx e4 = eisenstein_E4(t), e6 = eisenstein_E6(t);
    cplx a = k2 * e4, b = k3 * e6;
    return 1728.0 * a * a * a / (a * a * a - 27.0 * b * b);
}

std::vector<WeightedPoly> laurent_b_symbolic(int order)
{
    VarTable vt = invariant_vars();
    std::vector<WeightedPoly> b(std::max(order, 0) + 1, WeightedPoly(vt));
    if (order >= 0)
        b[0] = WeightedPoly::constant(vt, 1);
    if (order >= 4)
        b[4] = WeightedPoly::variable(vt, "g2") * mpq_class(1, 20);
    if (order >= 6)
        b[6] = WeightedPoly::variable(vt, "g3") * mpq_class(1, 28);
    for (int k = 4; 2 * k <= order; ++k)
    {
        WeightedPoly s(vt);
        for (int m = 2; m <= k - 2; ++m)
            s += b[2 * m] * b[2 * k - 2 * m];
        b[2 * k] = s * mpq_class(3, (2 * k + 1) * (k - 3));
    }
    return b;
}

EllipticContext compute_invariants(const LatticeTau &lattice, double tol, int order)
{
    if (!(tol > 0.0))
        throw StructuralError("tol must be positive");
    EllipticContext c;
    c.tol_ = tol;
    c.tau_ = lattice.tau;
    c.red_ = reduce_tau(lattice.tau);
    cplx t = c.red_.tau;
    c.q_ = nome(t);
    cplx e2 = eisenstein_E2(t), e4 = eisenstein_E4(t), e6 = eisenstein_E6(t);
    c.g2r_ = k2 * e4;
    c.g3r_ = k3 * e6;
    c.c1r_ = e2 / 12.0;
    c.eta1r_ = 4.0 * pi * pi * c.c1r_;
    c.eta2r_ = c.eta1r_ * t - two_pi_i;

    const cplx lam = c.red_.lambda;
    const Modular &g = c.red_.g;
    c.g2_ = check(c.g2r_ / std::pow(lam, 4), "g2");
    c.g3_ = check(c.g3r_ / std::pow(lam, 6), "g3");
    // 1 = lambda (a - c tau_r), tau = lambda (d tau_r - b)
    c.eta1_ = (static_cast<double>(g.a) * c.eta1r_ - static_cast<double>(g.c) * c.eta2r_) / lam;
    c.eta2_ = (static_cast<double>(g.d) * c.eta2r_ - static_cast<double>(g.b) * c.eta1r_) / lam;

    c.b_sym_ = laurent_b_symbolic(std::max(order, 6));
    c.b_.resize(c.b_sym_.size());
    for (std::size_t j = 0; j < c.b_.size(); ++j)
        c.b_[j] = c.b_sym_[j].eval(std::vector<cplx>{c.g2_, c.g3_});

    c.e_ = {c.wp(0.5), c.wp(0.5 * c.tau_), c.wp(0.5 * (1.0 + c.tau_))};
    return c;
}

EllipticContext::Local EllipticContext::localize(cplx z, int pole_order) const
{
    if (!finite(z))
        throw EvaluationFailure("non-finite argument");
    const cplx t = red_.tau;
    Local L;
    cplx w = z / red_.lambda;
    double n = std::round(w.imag() / t.imag());
    w -= n * t;
    double m = std::round(w.real());
    w -= m;
    L.z = w;
    L.m = static_cast<long>(m);
    L.n = static_cast<long>(n);
    if (pole_order > 0)
    {
        double d = std::numeric_limits<double>::infinity();
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j)
                d = std::min(d, std::abs(w - static_cast<double>(i) - static_cast<double>(j) * t));
        d *= std::abs(red_.lambda);
        if (d < std::sqrt(tol_))
        {
            std::ostringstream os;
            os << "evaluation within " << d << " of a lattice point (pole of order " << pole_order << ")";
            throw NearPoleError(os.str(), pole_order, d);
        }
    }
    return L;
}

double EllipticContext::lattice_distance(cplx z) const
{
    const cplx t = red_.tau;
    cplx w = z / red_.lambda;
    w -= std::round(w.imag() / t.imag()) * t;
    w -= std::round(w.real());
    double d = std::numeric_limits<double>::infinity();
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            d = std::min(d, std::abs(w - static_cast<double>(i) - static_cast<double>(j) * t));
    return d * std::abs(red_.lambda);
}

cplx EllipticContext::wp_reduced(cplx z) const
{
    cplx arg = two_pi_i * z;
    cplx w = std::exp(arg);
    cplx om = one_minus_exp(arg);
    cplx s = w / (om * om);
    cplx qn = 1.0;
    for (int n = 1; n <= max_terms; ++n)
    {
        qn *= q_;
        cplx x = qn * w, y = qn / w;
        cplx t = x / ((1.0 - x) * (1.0 - x)) + y / ((1.0 - y) * (1.0 - y));
        s += t;
        if (std::abs(t) <= 1e-18 * std::max(1.0, std::abs(s)))
            return two_pi_i * two_pi_i * (c1r_ + s);
    }
    throw EvaluationFailure("wp series did not converge");
}

cplx EllipticContext::wp_prime_reduced(cplx z) const
{
    cplx arg = two_pi_i * z;
    cplx w = std::exp(arg);
    cplx om = one_minus_exp(arg);
    cplx s = w * (1.0 + w) / (om * om * om);
    cplx qn = 1.0;
    for (int n = 1; n <= max_terms; ++n)
    {
        qn *= q_;
        cplx x = qn * w, y = qn / w;
        cplx t = x * (1.0 + x) / std::pow(1.0 - x, 3) - y * (1.0 + y) / std::pow(1.0 - y, 3);
        s += t;
        if (std::abs(t) <= 1e-18 * std::max(1.0, std::abs(s)))
            return two_pi_i * two_pi_i * two_pi_i * s;
    }
    throw EvaluationFailure("wp' series did not converge");
}

cplx EllipticContext::zeta_reduced(cplx z) const
{
    cplx arg = two_pi_i * z;
    cplx w = std::exp(arg);
    cplx om = one_minus_exp(arg);
    cplx s = 1.0 / om - 0.5;
    cplx qn = 1.0;
    for (int n = 1; n <= max_terms; ++n)
    {
        qn *= q_;
        cplx x = qn * w, y = qn / w;
        cplx t = x / (1.0 - x) - y / (1.0 - y);
        s += t;
        if (std::abs(t) <= 1e-18 * std::max(1.0, std::abs(s)))
            return -two_pi_i * two_pi_i * c1r_ * z - two_pi_i * s;
    }
    throw EvaluationFailure("zeta series did not converge");
}

cplx EllipticContext::wp(cplx z) const
{
    Local L = localize(z, 2);
    return check(wp_reduced(L.z) / (red_.lambda * red_.lambda), "wp");
}

cplx EllipticContext::wp_prime(cplx z) const
{
    Local L = localize(z, 3);
    return check(wp_prime_reduced(L.z) / std::pow(red_.lambda, 3), "wp'");
}

std::vector<cplx> EllipticContext::wp_derivs(cplx z, int nmax) const
{
    std::vector<cplx> p(std::max(nmax, 1) + 1);
    p[0] = wp(z);
    p[1] = wp_prime(z);
    for (int n = 0; n + 2 <= nmax; ++n)
    {
        cplx s = 0.0;
        double binom = 1.0;
        for (int k = 0; k <= n; ++k)
        {
            s += binom * p[k] * p[n - k];
            binom = binom * (n - k) / (k + 1);
        }
        p[n + 2] = 6.0 * s - (n == 0 ? 0.5 * g2_ : cplx(0.0));
    }
    p.resize(nmax + 1);
    for (auto &v : p)
        check(v, "wp derivative");
    return p;
}

cplx EllipticContext::zeta(cplx z) const
{
    Local L = localize(z, 1);
    cplx v = zeta_reduced(L.z) + static_cast<double>(L.m) * eta1r_ + static_cast<double>(L.n) * eta2r_;
    return check(v / red_.lambda, "zeta");
}

cplx EllipticContext::eval(cplx z, WKind kind, int n) const
{
    switch (kind)
    {
    case WKind::P:
        return wp(z);
    case WKind::P_DERIV:
        if (n < 1)
            throw StructuralError("P_DERIV needs n >= 1");
        if (n == 1)
            return wp_prime(z);
        localize(z, n + 2);
        return wp_derivs(z, n)[n];
    case WKind::ZETA:
        return zeta(z);
    }
    throw StructuralError("unknown kind");
}

ojson EllipticContext::to_json() const
{
    ojson j;
    j["tau"] = cjson(tau_);
    j["g2"] = cjson(g2_);
    j["g3"] = cjson(g3_);
    j["e"] = ojson::array({cjson(e_[0]), cjson(e_[1]), cjson(e_[2])});
    j["order"] = order();
    return j;
}

cplx eval_weierstrass(const EllipticContext &ctx, cplx z, WKind kind, int n) { return ctx.eval(z, kind, n); }

ModularForm parse_form(const std::string &name)
{
    if (name == "343g2^3-6561g3^2" || name == "f343")
        return ModularForm::F343;
    if (name == "g2^3-27g3^2" || name == "delta")
        return ModularForm::DELTA;
    if (name == "g2")
        return ModularForm::G2;
    if (name == "g3")
        return ModularForm::G3;
    throw StructuralError("unknown modular form " + name);
}

std::string form_name(ModularForm f)
{
    switch (f)
    {
    case ModularForm::F343:
        return "343g2^3-6561g3^2";
    case ModularForm::DELTA:
        return "g2^3-27g3^2";
    case ModularForm::G2:
        return "g2";
    case ModularForm::G3:
        return "g3";
    }
    return "";
}

int form_weight(ModularForm f)
{
    switch (f)
    {
    case ModularForm::F343:
    case ModularForm::DELTA:
        return 12;
    case ModularForm::G2:
        return 4;
    case ModularForm::G3:
        return 6;
    }
    return 0;
}

std::pair<cplx, cplx> form_value(ModularForm f, cplx tau)
{
    if (!(tau.imag() > 0.0))
        throw NoZeroFound("left the upper half-plane");
    cplx E2 = eisenstein_E2(tau), E4 = eisenstein_E4(tau), E6 = eisenstein_E6(tau);
    cplx g2 = k2 * E4, g3 = k3 * E6;
    cplx dg2 = k2 * two_pi_i * (E2 * E4 - E6) / 3.0;
    cplx dg3 = k3 * two_pi_i * (E2 * E6 - E4 * E4) / 2.0;
    switch (f)
    {
    case ModularForm::F343:
        return {343.0 * g2 * g2 * g2 - 6561.0 * g3 * g3, 1029.0 * g2 * g2 * dg2 - 13122.0 * g3 * dg3};
    case ModularForm::DELTA:
        return {g2 * g2 * g2 - 27.0 * g3 * g3, 3.0 * g2 * g2 * dg2 - 54.0 * g3 * dg3};
    case ModularForm::G2:
        return {g2, dg2};
    case ModularForm::G3:
        return {g3, dg3};
    }
    throw StructuralError("unknown form");
}

double form_residual(ModularForm f, cplx tau)
{
    cplx t = reduce_tau(tau).tau;
    cplx g2 = k2 * eisenstein_E4(t), g3 = k3 * eisenstein_E6(t);
    double k = form_weight(f);
    double scale = std::pow(std::abs(g2), k / 4.0) + std::pow(std::abs(g3), k / 6.0);
    return std::abs(form_value(f, t).first) / scale;
}

cplx find_form_zero(ModularForm form, cplx seed, double tol)
{
    if (!(seed.imag() > 0.0))
        throw NoZeroFound("seed outside the upper half-plane");
    cplx t = reduce_tau(seed).tau;
    double res = form_residual(form, t);
    for (int it = 0; it < 200; ++it)
    {
        auto [f, df] = form_value(form, t);
        if (std::abs(df) == 0.0 || !finite(df))
            break;
        cplx step = -f / df;
        double lam = 1.0;
        bool moved = false;
        for (int h = 0; h < 40; ++h, lam *= 0.5)
        {
            cplx cand = t + lam * step;
            if (!(cand.imag() > 0.0))
                continue;
            cplx red = reduce_tau(cand).tau;
            double r = form_residual(form, red);
            if (r < res)
            {
                t = red;
                res = r;
                moved = true;
                break;
            }
        }
        if (t.imag() > 5.0)
            throw NoZeroFound("Newton iterates escaped to the cusp; the form has no zero in the upper half-plane");
        if (!moved || std::abs(step) < 1e-16 * std::abs(t))
            break;
    }
    if (!(res <= tol))
    {
        std::ostringstream os;
        os << "no zero of " << form_name(form) << " found from seed (residual " << res << ")";
        throw NoZeroFound(os.str());
    }
    return t;
}

cplx parse_tau(const std::string &s)
{
    cplx t;
    if (s == "i")
        t = cplx(0.0, 1.0);
    else if (s == "rho")
        t = rho_point();
    else
    {
        auto comma = s.find(',');
        if (comma == std::string::npos)
            throw StructuralError("tau must be \"re,im\", \"i\" or \"rho\": " + s);
        try
        {
            std::size_t p1 = 0, p2 = 0;
            std::string a = s.substr(0, comma), b = s.substr(comma + 1);
            double re = std::stod(a, &p1), im = std::stod(b, &p2);
            if (p1 != a.size() || p2 != b.size())
                throw std::invalid_argument(s);
            t = cplx(re, im);
        }
        catch (const std::logic_error &)
        {
            throw StructuralError("cannot parse tau: " + s);
        }
    }
    if (!(t.imag() > 0.0))
        throw StructuralError("tau must have positive imaginary part");
    return t;
}

} // namespace toda
