// One PASS/FAIL line per acceptance criterion; exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "toda/apparency.hpp"
#include "toda/elliptic.hpp"
#include "toda/error.hpp"
#include "toda/monodromy.hpp"
#include "toda/solver.hpp"

#include "oracles.hpp"

using namespace toda;

namespace
{

constexpr double pi = 3.14159265358979323846;
const VarTable Z = zplane_vars();
const VarTable X = xplane_vars();

struct Outcome
{
    bool ok = true;
    std::ostringstream detail;
    std::string failed;
    int failures = 0;

    void require(bool cond, const std::string &what)
    {
        if (!cond)
        {
            if (failures < 3)
                failed += (failures ? "; " : "") + what;
            ++failures;
            ok = false;
        }
    }
};

struct Accepted
{
    ProblemSpec problem;
    EllipticContext ctx;
    ParamVec params;
    bool even;
};

// roots accepted by criteria 2 and 3, checked again by criterion 7
std::vector<Accepted> accepted;
// census runs of criterion 4, reused by criterion 5
struct CensusRun
{
    int n1, n2;
    cplx tau;
    EllipticContext ctx;
    CensusReport report;
};
std::vector<CensusRun> census_runs;

bool noncritical(int n1, int n2) { return ((n1 - n2) % 3 + 3) % 3 != 0; }

// random tau away from i, rho and the zeros of 343 g2^3 - 6561 g3^2
std::vector<cplx> generic_taus(int n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> re(-0.5, 0.5), im(0.9, 1.6);
    std::vector<cplx> out;
    while (static_cast<int>(out.size()) < n)
    {
        cplx t(re(rng), im(rng));
        if (form_residual(ModularForm::G2, t) < 0.05 || form_residual(ModularForm::G3, t) < 0.05 ||
            form_residual(ModularForm::F343, t) < 0.05)
            continue;
        out.push_back(t);
    }
    return out;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

WeightedPoly V(const std::string &n) { return WeightedPoly::variable(Z, n); }
WeightedPoly C(long a, long b = 1) { return WeightedPoly::constant(Z, mpq_class(a, b)); }

void criterion1(Outcome &o)
{
    auto s1 = build_m0_system(0, 1);
    o.require(s1.P01 == -V("D0"), "(0,1) P01");
    o.require(s1.P02 == C(-1, 2) * V("D0") * V("D0") + C(2, 3) * V("B"), "(0,1) P02");
    o.require(s1.P03 == -V("D") - C(1, 6) * V("B") * V("D0"), "(0,1) P03");
    auto s2 = build_m0_system(0, 2);
    o.require(s2.P01 == -V("D0"), "(0,2) P01");
    o.require(s2.P02 == C(-1, 24) * V("D0") * V("D0") * V("D0") + C(7, 18) * V("B") * V("D0") - V("D"), "(0,2) P02");
    o.require(s2.P03 == C(-1, 36) * V("B") * V("D0") * V("D0") - C(1, 6) * V("D0") * V("D") +
                            C(2, 9) * V("B") * V("B") - C(2, 27) * V("g2"),
              "(0,2) P03");
    auto s4 = build_m0_system(0, 4);
    std::size_t d0 = Z.index("D0");
    o.require(s4.P01 == -V("D0"), "(0,4) P01");
    o.require(s4.P02.substitute(d0, 0) == C(5, 54) * V("B") * V("D"), "(0,4) P02 at D0 = 0");
    WeightedPoly inner = C(6) * V("B") * V("B") * V("B") + C(27) * V("D") * V("D") - C(56) * V("g2") * V("B") +
                         C(288) * V("g3");
    o.require(s4.P03.substitute(d0, 0) == inner * mpq_class(-1, 486), "(0,4) P03 at D0 = 0");
    o.detail << "(0,1), (0,2) and (0,4)|D0=0 match exactly";
}

void criterion2(Outcome &o)
{
    double worst = 0.0;
    for (cplx t : generic_taus(10, 101))
    {
        auto ps = single_puncture(t, 0, 1);
        auto ctx = compute_invariants({t});
        auto r = solve_m0(ps, ctx);
        o.require(r.total == 1 && r.even == 1, "(0,1) count at " + fmt(t.real()) + "," + fmt(t.imag()));
        for (const auto &c : r.clusters)
        {
            double sz = std::max({std::abs(c.center.B), std::abs(c.center.Dk[0]), std::abs(c.center.D)});
            o.require(sz <= 1e-10, "(0,1) root is not (0,0,0)");
            o.require(c.residual_norm <= 1e-10, "(0,1) residual");
            worst = std::max(worst, c.residual_norm);
            accepted.push_back({ps, ctx, c.center, c.is_even});
        }
    }
    double worst3 = 0.0;
    for (cplx t : generic_taus(5, 202))
    {
        auto ps = single_puncture(t, 0, 2);
        auto ctx = compute_invariants({t});
        auto r = solve_m0(ps, ctx);
        o.require(r.total == 2 && r.even == 2, "(0,2) generic count");
        for (const auto &c : r.clusters)
        {
            double e = std::abs(3.0 * c.center.B * c.center.B - ctx.g2());
            worst3 = std::max(worst3, e);
            o.require(e <= 1e-8, "|3B^2 - g2|");
            accepted.push_back({ps, ctx, c.center, c.is_even});
        }
    }
    {
        cplx t = rho_point();
        auto ps = single_puncture(t, 0, 2);
        auto ctx = compute_invariants({t});
        auto r = solve_m0(ps, ctx);
        o.require(r.total == 1 && r.even == 1, "(0,2) count at rho");
        for (const auto &c : r.clusters)
            accepted.push_back({ps, ctx, c.center, c.is_even});
    }
    o.detail << "(0,1): 10 tau, max residual " << fmt(worst) << "; (0,2): 5 tau x 2 roots, max |3B^2-g2| "
             << fmt(worst3) << "; 1 root at rho";
}

void criterion3(Outcome &o)
{
    cplx tau0 = find_form_zero(ModularForm::F343, {0.5, 1.2});
    double f0 = form_residual(ModularForm::F343, tau0);
    o.require(f0 <= 1e-10, "|form(tau0)|");
    struct Case
    {
        cplx tau;
        long total, even;
    };
    std::vector<Case> cases;
    for (cplx t : generic_taus(5, 303))
        cases.push_back({t, 5, 3});
    cases.push_back({cplx(0.0, 1.0), 3, 3});
    cases.push_back({tau0, 4, 2});
    double wB = 0.0, wD = 0.0;
    for (const auto &cs : cases)
    {
        auto ps = single_puncture(cs.tau, 0, 4);
        auto ctx = compute_invariants({cs.tau});
        auto r = solve_m0(ps, ctx);
        o.require(r.total == cs.total && r.even == cs.even,
                  "(0,4) counts (" + std::to_string(r.total) + "," + std::to_string(r.even) + ") at " +
                      fmt(cs.tau.real()) + "," + fmt(cs.tau.imag()));
        for (const auto &c : r.clusters)
        {
            if (!c.is_even)
            {
                double eb = std::abs(c.center.B);
                double ed = std::abs(27.0 * c.center.D * c.center.D + 288.0 * ctx.g3()) / (1.0 + std::abs(ctx.g3()));
                wB = std::max(wB, eb);
                wD = std::max(wD, ed);
                o.require(eb <= 1e-8, "non-even |B|");
                o.require(ed <= 1e-6, "non-even |27D^2 + 288 g3|");
            }
            accepted.push_back({ps, ctx, c.center, c.is_even});
        }
    }
    o.detail << "(5,3) x 5 generic, (3,3) at i, (4,2) at tau0 = " << tau0.real() << "+" << tau0.imag()
             << "i (form " << fmt(f0) << "); non-even max |B| " << fmt(wB) << ", max rel |27D^2+288g3| " << fmt(wD);
}

void criterion4(Outcome &o)
{
    const std::vector<std::pair<int, int>> pairs = {{0, 1}, {0, 2}, {0, 4}, {1, 2}, {1, 3}, {2, 3}, {2, 4}};
    std::ostringstream counts;
    unsigned seed = 404;
    for (auto [n1, n2] : pairs)
    {
        long closed = static_cast<long>((n1 + 1) * (n2 + 1) * (n1 + n2 + 2)) / 6;
        long lo = 1 << 30, hi = 0;
        for (cplx t : generic_taus(10, seed++))
        {
            auto ps = single_puncture(t, n1, n2);
            auto ctx = compute_invariants({t});
            o.require(bezout_bound(ps) == closed, "bound formula");
            auto r = solve_m0(ps, ctx);
            o.require(r.bound == closed, "reported bound");
            o.require(static_cast<long>(r.clusters.size()) <= closed, "clusters exceed the bound");
            lo = std::min(lo, r.total);
            hi = std::max(hi, r.total);
            census_runs.push_back({n1, n2, t, ctx, r});
        }
        counts << " (" << n1 << "," << n2 << "):" << lo << (lo == hi ? "" : "-" + std::to_string(hi)) << "/" << closed;
    }
    o.detail << "clusters/bound over 10 tau:" << counts.str();
}

std::vector<double> real_roots(const std::vector<std::pair<cplx, int>> &r, double scale, bool &ok)
{
    std::vector<double> out;
    for (const auto &[z, m] : r)
    {
        if (m != 1 || std::abs(z.imag()) > 1e-8 * scale)
            ok = false;
        out.push_back(z.real());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void criterion5(Outcome &o)
{
    int checked = 0;
    for (int n1 = 0; n1 <= 12; ++n1)
        for (int n2 = 0; n2 <= 12; ++n2)
        {
            if (!noncritical(n1, n2) || (n1 % 2 == 1 && n2 % 2 == 1))
                continue;
            EvenPoly ep = build_even_poly(n1, n2);
            std::size_t b = X.index("B");
            bool ok = ep.P.degree_in(b) == ep.Ne && check_homogeneous(ep.P, ep.Ne);
            auto cs = ep.P.coefficients_in(b);
            ok = ok && static_cast<int>(cs.size()) == ep.Ne + 1 && cs.back() == WeightedPoly::constant(X, 1);
            o.require(ok, "monic/homogeneous (" + std::to_string(n1) + "," + std::to_string(n2) + ")");
            ++checked;
        }

    double worst = 0.0;
    int compared = 0;
    for (const auto &run : census_runs)
    {
        auto ps = single_puncture(run.tau, run.n1, run.n2);
        if (run.n1 % 2 == 1 && run.n2 % 2 == 1)
        {
            o.require(run.report.even == 0, "even roots for an odd pair");
            continue;
        }
        auto ev = solve_even(ps, run.ctx);
        std::vector<cplx> labelled;
        for (const auto &c : run.report.clusters)
            if (c.is_even)
                labelled.push_back(c.center.B);
        o.require(static_cast<long>(labelled.size()) == ev.total,
                  "even count " + std::to_string(labelled.size()) + " vs " + std::to_string(ev.total) + " for (" +
                      std::to_string(run.n1) + "," + std::to_string(run.n2) + ")");
        for (cplx B : labelled)
        {
            double best = 1e300;
            for (const auto &c : ev.clusters)
                best = std::min(best, std::abs(c.center.B - B) / (1.0 + std::abs(B)));
            worst = std::max(worst, best);
            o.require(best <= 1e-6, "even B does not match a root of P");
            ++compared;
        }
        if (run.n1 == 1 && run.n2 == 2)
            o.require(ev.total == 1, "(1,2) even root is not unique");
    }

    auto ctx = compute_invariants({cplx(0.0, 1.0)});
    const double scale = std::sqrt(std::abs(ctx.g2()));
    int real_pairs = 0;
    for (int n1 = 1; n1 <= 12; n1 += 2)
        for (int n2 = n1 + 1; n2 <= 12; n2 += 2)
        {
            if (!noncritical(n1, n2))
                continue;
            EvenPoly ep = build_even_poly(n1, n2);
            bool ok = true;
            auto r = real_roots(roots_univariate(even_poly_coefficients(ep, ctx.g2(), ctx.g3())), scale, ok);
            o.require(ok && static_cast<int>(r.size()) == ep.Ne,
                      "distinct real roots (" + std::to_string(n1) + "," + std::to_string(n2) + ")");
            ++real_pairs;
        }
    for (auto [n1, n2] : std::vector<std::pair<int, int>>{{1, 2}, {3, 4}, {5, 6}})
    {
        EvenPoly ep = build_even_poly(n1, n2);
        std::vector<WeightedPoly> chain(ep.C.begin(), ep.C.end());
        chain.push_back(ep.P);
        std::vector<double> prev;
        bool ok = true;
        for (std::size_t j = 1; j < chain.size(); ++j)
        {
            std::vector<cplx> c;
            for (const auto &q : chain[j].coefficients_in(X.index("B")))
                c.push_back(q.eval(std::vector<cplx>{0.0, ctx.g2(), ctx.g3()}));
            auto r = real_roots(roots_univariate(c), scale, ok);
            ok = ok && r.size() == j;
            for (std::size_t i = 0; ok && i < prev.size(); ++i)
                ok = r[i] < prev[i] && prev[i] < r[i + 1];
            prev = r;
        }
        o.require(ok, "interlacing (" + std::to_string(n1) + "," + std::to_string(n2) + ")");
    }
    o.detail << checked << " pairs monic+homogeneous; " << compared << " even B matched (max " << fmt(worst)
             << "); real roots at i for " << real_pairs << " pairs with n1 odd < n2; interlacing (1,2),(3,4),(5,6)";
}

void criterion6(Outcome &o)
{
    int n = 0;
    auto ctx = compute_invariants({cplx(0.1, 1.2)});
    for (int n1 = 1; n1 <= 9; n1 += 2)
        for (int n2 = 1; n2 <= 9; n2 += 2)
        {
            if (!noncritical(n1, n2))
                continue;
            bool refused = false;
            try
            {
                solve_even(single_puncture(cplx(0.1, 1.2), n1, n2), ctx);
            }
            catch (const EvenNonexistenceError &)
            {
                refused = true;
            }
            catch (const Error &)
            {
            }
            o.require(refused, "(" + std::to_string(n1) + "," + std::to_string(n2) + ") not refused");
            ++n;
        }
    o.detail << n << " odd pairs refused with the nonexistence signal";
}

void criterion7(Outcome &o)
{
    double we = 0.0, wl = 0.0, wg = 0.0;
    int n = 0;
    for (const auto &a : accepted)
    {
        try
        {
            auto rep = monodromy_pair(a.problem, a.ctx, a.params);
            we = std::max(we, rep.eps_residual);
            wl = std::max(wl, rep.local_residual[0]);
            o.require(rep.eps_residual <= 1e-6, "eps residual " + fmt(rep.eps_residual));
            o.require(rep.local_residual[0] <= 1e-6, "local residual " + fmt(rep.local_residual[0]));
            unitarize(rep);
            o.require(rep.unitarizable, "unitarization");
            wg = std::max(wg, rep.eigen_residual);
            o.require(rep.eigen_residual <= 1e-6, "eigenvalues of N1");
            o.require(rep.normal_form_N1 <= 1e-6, "N1 normal form");
        }
        catch (const Error &e)
        {
            o.require(false, e.what());
        }
        ++n;
    }
    double worst_bad = 1e300;
    int nbad = 0;
    for (const auto &a : accepted)
    {
        if (a.problem.punctures[0].spec.n2 != 2 || nbad >= 3)
            continue;
        ParamVec x = a.params;
        x.B += 0.1;
        auto rep = monodromy_pair(a.problem, a.ctx, x);
        worst_bad = std::min(worst_bad, rep.local_residual[0]);
        o.require(rep.local_residual[0] >= 1e-2, "perturbed params pass the scalar test");
        ++nbad;
    }
    o.require(nbad > 0, "no perturbation checked");
    o.detail << n << " roots: max eps " << fmt(we) << ", max local " << fmt(wl) << ", max eig " << fmt(wg)
             << "; perturbed B+0.1: min local " << fmt(worst_bad);
}

void criterion8(Outcome &o)
{
    double pde = 0.0, even_ok = 0.0, even_bad = 1e300;
    auto check = [&](cplx tau, int n1, int n2, bool all) {
        auto ps = single_puncture(tau, n1, n2);
        auto ctx = compute_invariants({tau});
        auto r = solve_m0(ps, ctx);
        bool done_even = false;
        for (const auto &c : r.clusters)
        {
            if (c.is_even && done_even && !all)
                continue;
            auto rep = monodromy_pair(ps, ctx, c.center);
            unitarize(rep);
            auto rc = reconstruct_and_check(ps, ctx, c.center, rep, default_grid(tau), 1e-3, true);
            pde = std::max(pde, rc.pde_residual);
            o.require(rc.pde_U <= 1e-4 && rc.pde_V <= 1e-4, "PDE residual " + fmt(rc.pde_residual));
            o.require(rc.min_exp_U > 0.0 && rc.min_exp_V > 0.0, "positivity");
            if (c.is_even)
            {
                done_even = true;
                even_ok = std::max(even_ok, *rc.even_residual);
                o.require(*rc.even_residual <= 1e-6, "even root even_residual " + fmt(*rc.even_residual));
            }
            else
            {
                even_bad = std::min(even_bad, *rc.even_residual);
                o.require(*rc.even_residual >= 1e-2, "non-even root even_residual " + fmt(*rc.even_residual));
            }
        }
    };
    check(cplx(0.2, 1.3), 0, 1, true);
    check(cplx(0.23, 1.13), 0, 4, false);
    o.detail << "(0,1) root and (0,4) roots: max PDE " << fmt(pde) << ", even roots max " << fmt(even_ok)
             << ", non-even min " << fmt(even_bad);
}

void criterion9(Outcome &o)
{
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    auto rel = [&](cplx a, cplx b, double scale, const std::string &what) {
        double e = std::abs(a - b) / scale;
        worst = std::max(worst, e);
        o.require(e <= 1e-10, what);
    };
    for (cplx t : {cplx(0.0, 1.0), cplx(0.23, 1.13), cplx(-0.41, 0.77), cplx(0.5, 1.35), cplx(1.7, 0.4)})
    {
        auto c = compute_invariants({t});
        double s2 = std::abs(c.g2()), s3 = std::abs(c.g3());
        double sc = std::sqrt(s2) + std::cbrt(s3);
        for (int k = 0; k < 20; ++k)
        {
            cplx z(0.5 * u(rng), 0.5 * u(rng));
            if (c.lattice_distance(z) < 0.1)
                continue;
            cplx p = c.wp(z), dp = c.wp_prime(z);
            rel(dp * dp, 4.0 * p * p * p - c.g2() * p - c.g3(), std::pow(sc, 3) + std::pow(std::abs(p), 3), "cubic");
            // zeta' by the trapezoidal Cauchy integral on a small circle
            const int M = 48;
            const double r = 0.25 * c.lattice_distance(z);
            cplx d = 0.0;
            for (int s = 0; s < M; ++s)
            {
                cplx e = std::polar(1.0, 2.0 * pi * s / M);
                d += c.zeta(z + r * e) / (r * e * static_cast<double>(M));
            }
            rel(d, -p, std::abs(p) + sc, "zeta' = -wp");
            rel(c.wp(z + 1.0), p, std::abs(p) + sc, "period 1");
            rel(c.wp(z + t), p, std::abs(p) + sc, "period tau");
        }
        const auto &b = c.b();
        rel(b[4], c.g2() / 20.0, 1.0 + s2, "b4");
        rel(b[6], c.g3() / 28.0, 1.0 + s3, "b6");
        rel(c.e()[0] + c.e()[1] + c.e()[2], 0.0, sc, "e1+e2+e3");
        // against the lattice sum as an independent reference
        cplx ref = oracle::richardson2([t](int R) { return oracle::lattice_g2(t, R); }, 100);
        if (t.imag() >= 0.7)
        {
            double e = std::abs(c.g2() - ref) / std::abs(ref);
            o.require(e <= 1e-8, "g2 against the lattice sum");
        }
    }
    auto ci = compute_invariants({cplx(0.0, 1.0)});
    auto cr = compute_invariants({rho_point()});
    rel(cr.g2(), 0.0, std::pow(std::abs(cr.g3()), 2.0 / 3.0), "g2(rho)");
    rel(ci.g3(), 0.0, std::pow(std::abs(ci.g2()), 1.5), "g3(i)");
    o.detail << "max relative deviation " << fmt(worst);
}

void criterion10(Outcome &o)
{
    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int cfg[5][4] = {{0, 1, 0, 1}, {1, 0, 0, 2}, {0, 2, 1, 1}, {2, 0, 0, 1}, {0, 1, 1, 2}};
    double worst = 0.0;
    int n = 0;
    for (const auto &c : cfg)
    {
        cplx t(0.3 * u(rng), 1.0 + 0.3 * std::abs(u(rng)));
        auto ctx = compute_invariants({t});
        cplx p1 = cplx(0.35 + 0.2 * u(rng), 0.0) + (0.4 + 0.2 * u(rng)) * t;
        auto ps = derive_problem({t}, {{0.0, c[0], c[1]}, {p1, c[2], c[3]}});
        for (int it = 0; it < 4; ++it)
        {
            ParamVec p(1);
            for (int k = 0; k < 2; ++k)
            {
                p.A[k] = cplx(u(rng), u(rng));
                p.Bk[k] = cplx(u(rng), u(rng));
                p.Dk[k] = cplx(u(rng), u(rng));
            }
            p.B = cplx(u(rng), u(rng));
            p.D = cplx(u(rng), u(rng));
            auto r = residual_general(ps, ctx, p);
            auto ref = oracle::oracle_residuals(ps, ctx, p);
            o.require(r.size() == ref.size(), "residual length");
            for (std::size_t i = 0; i < std::min(r.size(), ref.size()); ++i)
            {
                double e = std::abs(r[i] - ref[i]) / std::max(1.0, std::abs(ref[i]));
                worst = std::max(worst, e);
                o.require(e <= 1e-8, "residual component " + std::to_string(i));
            }
            o.require(std::abs(r[0] - (p.Bk[0] + p.Bk[1])) == 0.0 && std::abs(r[1] - (p.A[0] + p.A[1])) == 0.0,
                      "linear constraints");
            ++n;
        }
    }
    o.detail << n << " random m = 1 points, max relative deviation " << fmt(worst);
}

} // namespace

int main()
{
    const std::vector<std::function<void(Outcome &)>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                                  criterion5, criterion6, criterion7, criterion8,
                                                                  criterion9, criterion10};
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try
        {
            criteria[i](o);
        }
        catch (const std::exception &e)
        {
            o.require(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        all = all && o.ok;
        std::string line = o.detail.str();
        if (!o.ok)
            line += " [failed (" + std::to_string(o.failures) + "): " + o.failed + "]";
        std::printf("criterion %2zu %s (%.1fs): %s\n", i + 1, o.ok ? "PASS" : "FAIL", secs, line.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
