#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <random>

#include "toda/error.hpp"
#include "toda/solver.hpp"

using namespace toda;

namespace
{

const VarTable X = xplane_vars();

bool noncritical(int n1, int n2) { return ((n1 - n2) % 3 + 3) % 3 != 0; }

std::vector<cplx> random_taus(int n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> re(-0.5, 0.5), im(0.9, 1.6);
    std::vector<cplx> out;
    for (int i = 0; i < n; ++i)
        out.push_back({re(rng), im(rng)});
    return out;
}

// monic polynomial with the given roots, lowest coefficient first
std::vector<cplx> from_roots(const std::vector<cplx> &r)
{
    std::vector<cplx> c{1.0};
    for (auto z : r)
    {
        std::vector<cplx> n(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i)
        {
            n[i + 1] += c[i];
            n[i] -= z * c[i];
        }
        c = n;
    }
    return c;
}

std::vector<double> real_roots_sorted(const std::vector<std::pair<cplx, int>> &r, double scale)
{
    std::vector<double> out;
    for (const auto &[z, m] : r)
    {
        REQUIRE(m == 1);
        REQUIRE(std::abs(z.imag()) <= 1e-8 * scale);
        out.push_back(z.real());
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("roots_univariate examples")
{
    auto ctx = compute_invariants({cplx(0.0, 1.0)});
    cplx g2 = ctx.g2();
    auto r = roots_univariate({-g2 / 3.0, 0.0, 1.0});
    REQUIRE(r.size() == 2);
    double s = std::sqrt(g2.real() / 3.0);
    CHECK(std::abs(r[0].first + s) <= 1e-10 * s);
    CHECK(std::abs(r[1].first - s) <= 1e-10 * s);
    CHECK(std::abs(r[0].first.imag()) <= 1e-12 * s);

    auto t = roots_univariate({0.0, 0.0, 0.0, 1.0});
    REQUIRE(t.size() == 1);
    CHECK(t[0].second == 3);
    CHECK(std::abs(t[0].first) <= 1e-12);

    CHECK_THROWS_AS(roots_univariate({1.0}), StructuralError);
    CHECK_THROWS_AS(roots_univariate({1.0, 0.0}), StructuralError);
}

TEST_CASE("roots_univariate against polynomials built from known roots")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial)
    {
        int n = 1 + trial % 9;
        std::vector<cplx> roots;
        for (int i = 0; i < n; ++i)
            roots.push_back({u(rng), u(rng)});
        auto found = roots_univariate(from_roots(roots));
        int total = 0;
        for (const auto &[z, m] : found)
            total += m;
        CHECK(total == n);
        for (auto z : roots)
        {
            double best = 1e300;
            for (const auto &[w, m] : found)
                best = std::min(best, std::abs(z - w));
            CHECK(best <= 1e-8);
        }
    }
    // a triple and a double root; a triple root is only resolved to about eps^{1/3}
    auto found = roots_univariate(from_roots({1.0, 1.0, 1.0, cplx(-2.0, 0.5), cplx(-2.0, 0.5), 3.0}), 1e-8);
    REQUIRE(found.size() == 3);
    int mult_sum = 0;
    for (const auto &[z, m] : found)
    {
        mult_sum += m;
        if (std::abs(z - 1.0) < 1e-3)
            CHECK(m == 3);
        else if (std::abs(z - cplx(-2.0, 0.5)) < 1e-3)
            CHECK(m == 2);
        else
            CHECK(m == 1);
    }
    CHECK(mult_sum == 6);
}

TEST_CASE("cubic even polynomial degenerates at the zero of 343 g2^3 - 6561 g3^2")
{
    EvenPoly ep = build_even_poly(0, 4);
    // discriminant of B^3 + p B + q is -4 p^3 - 27 q^2
    auto cs = ep.P.coefficients_in(X.index("B"));
    REQUIRE(cs.size() == 4);
    CHECK(cs[2].is_zero());
    WeightedPoly p = cs[1], q = cs[0];
    WeightedPoly disc = WeightedPoly::constant(X, -4) * p * p * p - WeightedPoly::constant(X, 27) * q * q;
    WeightedPoly g2 = WeightedPoly::variable(X, "g2"), g3 = WeightedPoly::variable(X, "g3");
    WeightedPoly form = WeightedPoly::constant(X, 343) * g2 * g2 * g2 - WeightedPoly::constant(X, 6561) * g3 * g3;
    CHECK(disc == WeightedPoly::constant(X, mpq_class(256, 27)) * form);

    cplx tau0 = find_form_zero(ModularForm::F343, cplx(0.5, 1.2));
    auto ctx = compute_invariants({tau0});
    auto rep = solve_even(single_puncture(tau0, 0, 4), ctx);
    REQUIRE(rep.total == 2);
    CHECK(std::max(rep.clusters[0].multiplicity, rep.clusters[1].multiplicity) == 2);
}

TEST_CASE("solve_m0: (0,1) has the single even root at the origin")
{
    for (cplx tau : random_taus(5, 3))
    {
        auto ps = single_puncture(tau, 0, 1);
        auto ctx = compute_invariants({tau});
        auto rep = solve_m0(ps, ctx);
        REQUIRE(rep.total == 1);
        CHECK(rep.even == 1);
        CHECK(rep.bound == 1);
        const auto &c = rep.clusters[0].center;
        CHECK(std::abs(c.B) <= 1e-10);
        CHECK(std::abs(c.Dk[0]) <= 1e-10);
        CHECK(std::abs(c.D) <= 1e-10);
        CHECK(rep.clusters[0].residual_norm <= 1e-10);
    }
}

TEST_CASE("solve_m0: (0,4) at tau = i and at a generic tau")
{
    {
        cplx tau(0.0, 1.0);
        auto rep = solve_m0(single_puncture(tau, 0, 4), compute_invariants({tau}));
        CHECK(rep.total == 3);
        CHECK(rep.even == 3);
    }
    cplx tau(0.23, 1.13);
    auto ctx = compute_invariants({tau});
    auto rep = solve_m0(single_puncture(tau, 0, 4), ctx);
    CHECK(rep.total == 5);
    CHECK(rep.even == 3);
    for (const auto &c : rep.clusters)
        if (!c.is_even)
        {
            CHECK(std::abs(c.center.B) <= 1e-8);
            cplx D = c.center.D;
            CHECK(std::abs(27.0 * D * D + 288.0 * ctx.g3()) <= 1e-6 * (1.0 + std::abs(ctx.g3())));
        }
}

TEST_CASE("solve_even examples")
{
    {
        cplx tau = rho_point();
        auto rep = solve_even(single_puncture(tau, 0, 2), compute_invariants({tau}));
        REQUIRE(rep.total == 1);
        CHECK(rep.clusters[0].multiplicity == 2);
        CHECK(std::abs(rep.clusters[0].center.B) <= 1e-6);
    }
    for (cplx tau : random_taus(3, 5))
    {
        auto rep = solve_even(single_puncture(tau, 1, 2), compute_invariants({tau}));
        CHECK(rep.total == 1);
        CHECK(rep.bound == 1);
    }
    cplx tau(0.1, 1.2);
    CHECK_THROWS_AS(solve_even(single_puncture(tau, 1, 1), compute_invariants({tau})), EvenNonexistenceError);
    CHECK_THROWS_AS(solve_even(single_puncture(tau, 0, 3), compute_invariants({tau})), CriticalCaseError);
    CHECK_THROWS_AS(solve_even(single_puncture(tau, 1, 3), compute_invariants({tau})), EvenNonexistenceError);
    CHECK_THROWS_AS(solve_m0(single_puncture(tau, 1, 4), compute_invariants({tau})), CriticalCaseError);
}

TEST_CASE("count bound, even subset and Newton certificate over random tau")
{
    const std::vector<std::pair<int, int>> pairs{{0, 1}, {0, 2}, {0, 4}, {1, 2}, {1, 3}, {2, 3}};
    auto taus = random_taus(20, 17);
    for (auto [n1, n2] : pairs)
        for (cplx tau : taus)
        {
            CAPTURE(n1);
            CAPTURE(n2);
            CAPTURE(tau);
            auto ps = single_puncture(tau, n1, n2);
            auto ctx = compute_invariants({tau});
            auto rep = solve_m0(ps, ctx);
            CHECK(rep.total <= (n1 + 1) * (n2 + 1) * (n1 + n2 + 2) / 6);
            CHECK(rep.total == static_cast<long>(rep.clusters.size()));
            for (const auto &c : rep.clusters)
            {
                CHECK(c.residual_norm <= 1e-10);
                CHECK((c.quadratic_tail || c.degenerate));
            }
            if (n1 % 2 == 1 && n2 % 2 == 1)
            {
                CHECK(rep.even == 0);
                continue;
            }
            auto ev = solve_even(ps, ctx);
            std::vector<cplx> a, b;
            for (const auto &c : rep.clusters)
                if (c.is_even)
                    a.push_back(c.center.B);
            for (const auto &c : ev.clusters)
                b.push_back(c.center.B);
            REQUIRE(a.size() == b.size());
            for (auto x : a)
            {
                double best = 1e300;
                for (auto y : b)
                    best = std::min(best, std::abs(x - y));
                CHECK(best <= 1e-6 * (1.0 + std::abs(x)));
            }
        }
}

TEST_CASE("determinism for a fixed seed and any worker count")
{
    cplx tau(-0.17, 1.21);
    auto ps = single_puncture(tau, 1, 3);
    auto ctx = compute_invariants({tau});
    SolverConfig a;
    a.seed = 42;
    a.workers = 1;
    SolverConfig b = a;
    b.workers = 4;
    auto ra = solve_m0(ps, ctx, a), rb = solve_m0(ps, ctx, b), rc = solve_m0(ps, ctx, a);
    REQUIRE(ra.total == rb.total);
    REQUIRE(ra.total == rc.total);
    auto same = [](cplx x, cplx y) { return std::memcmp(&x, &y, sizeof(cplx)) == 0; };
    for (std::size_t i = 0; i < ra.clusters.size(); ++i)
        for (const auto *r : {&rb, &rc})
        {
            CHECK(same(ra.clusters[i].center.B, r->clusters[i].center.B));
            CHECK(same(ra.clusters[i].center.Dk[0], r->clusters[i].center.Dk[0]));
            CHECK(same(ra.clusters[i].center.D, r->clusters[i].center.D));
            CHECK(ra.clusters[i].members == r->clusters[i].members);
        }
    CHECK(ra.starts_used == rb.starts_used);
}

TEST_CASE("interlacing of the intermediate even polynomials at tau = i")
{
    auto ctx = compute_invariants({cplx(0.0, 1.0)});
    const double scale = std::sqrt(std::abs(ctx.g2()));
    for (auto [n1, n2] : std::vector<std::pair<int, int>>{{1, 2}, {3, 4}, {5, 6}})
    {
        CAPTURE(n1);
        EvenPoly ep = build_even_poly(n1, n2);
        std::vector<WeightedPoly> chain(ep.C.begin(), ep.C.end());
        chain.push_back(ep.P);
        std::vector<double> prev;
        for (std::size_t j = 1; j < chain.size(); ++j)
        {
            auto cs = chain[j].coefficients_in(X.index("B"));
            std::vector<cplx> c;
            for (const auto &q : cs)
                c.push_back(q.eval(std::vector<cplx>{0.0, ctx.g2(), ctx.g3()}));
            REQUIRE(c.size() == j + 1);
            auto r = real_roots_sorted(roots_univariate(c), scale);
            REQUIRE(r.size() == j);
            // r_i^j < r_i^{j-1} < r_{i+1}^j
            for (std::size_t i = 0; i < prev.size(); ++i)
            {
                CHECK(r[i] < prev[i]);
                CHECK(prev[i] < r[i + 1]);
            }
            prev = r;
        }
        CHECK(prev.size() == static_cast<std::size_t>(ep.Ne));
    }
}

TEST_CASE("scan_tau through the degenerate points")
{
    cplx tau0 = find_form_zero(ModularForm::F343, cplx(0.5, 1.2));
    auto tmpl = single_puncture(cplx(0.0, 1.0), 0, 4);
    auto rows = scan_tau(tmpl, {tau0 - cplx(0.0, 0.05), tau0, tau0 + cplx(0.0, 0.05)});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].total == 5);
    CHECK(rows[1].total == 4);
    CHECK(rows[2].total == 5);
    CHECK(rows[0].even == 3);
    CHECK(rows[1].even == 2);
    CHECK(rows[2].even == 3);
    CHECK(rows[1].degenerate);
    CHECK_FALSE(rows[0].degenerate);

    cplx rho = rho_point();
    rows = scan_tau(single_puncture(rho, 0, 2), {rho - cplx(0.1, 0.0), rho, rho + cplx(0.1, 0.0)});
    CHECK(rows[0].total == 2);
    CHECK(rows[1].total == 1);
    CHECK(rows[2].total == 2);

    rows = scan_tau(single_puncture(rho, 0, 1), rectangle_grid(-0.4, 0.4, 3, 0.8, 1.6, 2));
    CHECK(rows.size() == 6);
    for (const auto &r : rows)
    {
        CHECK(r.total == 1);
        CHECK(r.even == 1);
        CHECK(r.error.empty());
    }
    // bad grid points and critical data are recorded per row
    rows = scan_tau(tmpl, {cplx(0.0, -1.0), cplx(0.1, 1.1)});
    CHECK_FALSE(rows[0].error.empty());
    CHECK(rows[1].error.empty());
    rows = scan_tau(single_puncture(rho, 1, 1), {cplx(0.1, 1.1)});
    CHECK_FALSE(rows[0].error.empty());

    std::string csv = scan_csv(rows);
    CHECK(csv.rfind("tau_re,tau_im,total,even,bound,degenerate,min_distance,error\n", 0) == 0);
}

TEST_CASE("probe of the degenerate system g2 = g3 = 0")
{
    auto sys = build_m0_system(0, 2);
    SolverConfig cfg;
    cfg.max_iter = 400;
    auto rep = solve_m0_polynomial(sys, 0.0, 0.0, cfg);
    REQUIRE(rep.total == 1);
    const auto &c = rep.clusters[0].center;
    CHECK(std::abs(c.B) <= 1e-6);
    CHECK(std::abs(c.Dk[0]) <= 1e-6);
    CHECK(std::abs(c.D) <= 1e-6);
}
