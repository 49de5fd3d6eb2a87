#include "toda/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/random/sobol.hpp>
#include <boost/random/uniform_01.hpp>
#include <random>

#include "toda/parallel.hpp"

namespace toda
{

namespace
{

constexpr double pi = 3.14159265358979323846;
constexpr double eps = std::numeric_limits<double>::epsilon();

double inf_norm(const std::array<cplx, 3> &v)
{
    return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

struct Horner
{
    cplx p, dp;
    double scale; // sum |c_i| |z|^i
};

Horner horner(const std::vector<cplx> &c, cplx z)
{
    Horner h{0.0, 0.0, 0.0};
    double az = std::abs(z);
    for (std::size_t i = c.size(); i-- > 0;)
    {
        h.dp = h.dp * z + h.p;
        h.p = h.p * z + c[i];
        h.scale = h.scale * az + std::abs(c[i]);
    }
    return h;
}

std::vector<std::pair<cplx, int>> cluster_roots(const std::vector<cplx> &z, double radius)
{
    std::vector<int> parent(z.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int i) {
        while (parent[i] != i)
            i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j)
            if (std::abs(z[i] - z[j]) < radius)
                parent[find(static_cast<int>(i))] = find(static_cast<int>(j));
    std::vector<std::pair<cplx, int>> out;
    std::vector<int> slot(z.size(), -1);
    for (std::size_t i = 0; i < z.size(); ++i)
    {
        int r = find(static_cast<int>(i));
        if (slot[r] < 0)
        {
            slot[r] = static_cast<int>(out.size());
            out.push_back({0.0, 0});
        }
        out[slot[r]].first += z[i];
        out[slot[r]].second += 1;
    }
    for (auto &p : out)
        p.first /= static_cast<double>(p.second);
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
        if (a.first.real() != b.first.real())
            return a.first.real() < b.first.real();
        return a.first.imag() < b.first.imag();
    });
    return out;
}

// scaled coordinates: B = l^2 b, D0 = l d0, D = l^3 d
struct Scaling
{
    std::array<double, 3> var;
    std::array<double, 3> eq;
};

double scaled_distance(const std::array<cplx, 3> &a, const std::array<cplx, 3> &b)
{
    double d = 0.0, n = 0.0;
    for (int i = 0; i < 3; ++i)
    {
        d = std::max(d, std::abs(a[i] - b[i]));
        n = std::max({n, std::abs(a[i]), std::abs(b[i])});
    }
    return d / (1.0 + n);
}

struct Candidate
{
    bool ok = false;
    std::array<cplx, 3> y{};  // scaled
    double residual = std::numeric_limits<double>::infinity();
    double sigma_ratio = 1.0;
    double step_ratio = 0.0;
    bool quadratic = false;
    bool projected = false;
};

// final step at round-off, or bounded by a multiple of the previous step squared
bool quadratic_tail(double prev, double last, double size)
{
    if (last <= 64.0 * eps * (1.0 + size))
        return true;
    return prev > 0.0 && last <= 1e3 * prev * prev;
}

class ScaledSystem
{
public:
    ScaledSystem(const System3 &f, Scaling s) : f_(f), s_(s) {}

    std::array<cplx, 3> operator()(const std::array<cplx, 3> &y, Eigen::Matrix3cd *J) const
    {
        std::array<cplx, 3> x;
        for (int i = 0; i < 3; ++i)
            x[i] = y[i] * s_.var[i];
        auto F = f_(x, J);
        for (int i = 0; i < 3; ++i)
            F[i] /= s_.eq[i];
        if (J)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    (*J)(i, j) *= s_.var[j] / s_.eq[i];
        return F;
    }

    std::array<cplx, 3> unscale(const std::array<cplx, 3> &y) const
    {
        return {y[0] * s_.var[0], y[1] * s_.var[1], y[2] * s_.var[2]};
    }

private:
    const System3 &f_;
    Scaling s_;
};

double sigma_ratio_of(const Eigen::Matrix3cd &J)
{
    Eigen::JacobiSVD<Eigen::Matrix3cd> svd(J);
    auto s = svd.singularValues();
    return s(0) > 0.0 ? s(2) / s(0) : 0.0;
}

bool finite3(const std::array<cplx, 3> &v)
{
    for (auto z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            return false;
    return true;
}

Candidate newton(const ScaledSystem &g, std::array<cplx, 3> y, int max_iter)
{
    Candidate c;
    Eigen::Matrix3cd J;
    std::array<cplx, 3> G;
    try
    {
        G = g(y, &J);
    }
    catch (const Error &)
    {
        return c;
    }
    double r = inf_norm(G);
    double prev = 0.0, last = 0.0;
    for (int it = 0; it < max_iter && r > 0.0; ++it)
    {
        Eigen::JacobiSVD<Eigen::Matrix3cd> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::Vector3cd rhs(G[0], G[1], G[2]);
        Eigen::Vector3cd dy = -svd.solve(rhs);
        double ny = std::max({std::abs(y[0]), std::abs(y[1]), std::abs(y[2])});
        double len = dy.cwiseAbs().maxCoeff();
        if (!std::isfinite(len))
            return c;
        double cap = 10.0 * (1.0 + ny);
        if (len > cap)
        {
            dy *= cap / len;
            len = cap;
        }
        double t = 1.0;
        std::array<cplx, 3> y1, G1;
        Eigen::Matrix3cd J1;
        bool moved = false;
        for (int k = 0; k < 12; ++k, t *= 0.5)
        {
            for (int i = 0; i < 3; ++i)
                y1[i] = y[i] + t * dy(i);
            try
            {
                G1 = g(y1, &J1);
            }
            catch (const Error &)
            {
                continue;
            }
            if (finite3(G1) && inf_norm(G1) < (1.0 - 1e-4 * t) * r)
            {
                moved = true;
                break;
            }
        }
        if (!moved)
            break;
        y = y1;
        G = G1;
        J = J1;
        r = inf_norm(G);
        prev = last;
        last = t * len;
        if (std::max({std::abs(y[0]), std::abs(y[1]), std::abs(y[2])}) > 1e8)
            return c;
        if (last <= 4.0 * eps * (1.0 + ny))
            break;
    }
    c.y = y;
    c.residual = r;
    c.sigma_ratio = sigma_ratio_of(J);
    c.step_ratio = prev > 0.0 ? last / (prev * prev) : 0.0;
    c.quadratic = quadratic_tail(prev, last, std::max({std::abs(y[0]), std::abs(y[1]), std::abs(y[2])}));
    c.ok = true;
    return c;
}

// Gauss-Newton in b alone on the slice d0 = d = 0
Candidate even_projection(const ScaledSystem &g, cplx b, int max_iter)
{
    Candidate c;
    std::array<cplx, 3> y{b, 0.0, 0.0};
    Eigen::Matrix3cd J;
    std::array<cplx, 3> G;
    double prev = 0.0, last = 0.0;
    try
    {
        G = g(y, &J);
        for (int it = 0; it < max_iter; ++it)
        {
            cplx num = 0.0;
            double den = 0.0;
            for (int i = 0; i < 3; ++i)
            {
                num += std::conj(J(i, 0)) * G[i];
                den += std::norm(J(i, 0));
            }
            if (den == 0.0)
                break;
            cplx db = -num / den;
            std::array<cplx, 3> y1{y[0] + db, 0.0, 0.0};
            Eigen::Matrix3cd J1;
            auto G1 = g(y1, &J1);
            if (!(inf_norm(G1) < inf_norm(G)))
                break;
            y = y1;
            G = G1;
            J = J1;
            prev = last;
            last = std::abs(db);
            if (std::abs(db) <= 4.0 * eps * (1.0 + std::abs(y[0])))
                break;
        }
    }
    catch (const Error &)
    {
        return c;
    }
    c.y = y;
    c.residual = inf_norm(G);
    c.sigma_ratio = sigma_ratio_of(J);
    c.step_ratio = prev > 0.0 ? last / (prev * prev) : 0.0;
    c.quadratic = quadratic_tail(prev, last, std::abs(y[0]));
    c.ok = true;
    c.projected = true;
    return c;
}

struct Working
{
    Candidate best;
    int members = 1;
    bool degenerate = false;
};

long long key_of(double v) { return std::llround(v * 1e9); }

} // namespace

std::vector<std::pair<cplx, int>> roots_univariate(const std::vector<cplx> &coeffs, double tol, int max_iter)
{
    std::vector<cplx> c = coeffs;
    if (c.size() < 2)
        throw StructuralError("polynomial must have degree at least 1");
    if (c.back() == cplx(0.0))
        throw StructuralError("leading coefficient must be nonzero");
    cplx lead = c.back();
    for (auto &x : c)
        x /= lead;
    const int n = static_cast<int>(c.size()) - 1;

    // Fujiwara bound for the initial circle
    double bound = 0.0;
    for (int k = 1; k <= n; ++k)
    {
        double v = std::pow(std::abs(c[n - k]), 1.0 / k);
        if (k == n)
            v = std::pow(std::abs(c[0]) / 2.0, 1.0 / k);
        bound = std::max(bound, v);
    }
    bound = 2.0 * bound;
    if (bound == 0.0)
        return {{0.0, n}};

    std::vector<cplx> z(n);
    for (int k = 0; k < n; ++k)
        z[k] = bound * std::polar(1.0, 2.0 * pi * k / n + 0.4);
    std::vector<bool> done(n, false);
    int it = 0;
    for (; it < max_iter; ++it)
    {
        bool all = true;
        for (int k = 0; k < n; ++k)
        {
            if (done[k])
                continue;
            Horner h = horner(c, z[k]);
            if (std::abs(h.p) <= 8.0 * eps * h.scale)
            {
                done[k] = true;
                continue;
            }
            all = false;
            cplx w = h.p / h.dp;
            cplx s = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != k)
                    s += 1.0 / (z[k] - z[j]);
            cplx dz = w / (1.0 - w * s);
            if (!std::isfinite(dz.real()) || !std::isfinite(dz.imag()))
                dz = w;
            z[k] -= dz;
        }
        if (all)
            break;
    }
    auto out = cluster_roots(z, std::sqrt(tol));
    if (it == max_iter)
        throw PartialRootsError("Aberth iteration did not converge", out);
    return out;
}

double natural_scale(cplx g2, cplx g3)
{
    double l = std::max(std::pow(std::abs(g2), 0.25), std::pow(std::abs(g3), 1.0 / 6.0));
    return l > 1e-150 ? l : 1.0;
}

double default_box_radius(cplx g2, cplx g3)
{
    return 10.0 * (1.0 + std::sqrt(std::abs(g2)) + std::cbrt(std::abs(g3)));
}

CensusReport solve_system3(const System3 &f, std::array<int, 3> eq_weights, cplx g2, cplx g3, long bound,
                           const SolverConfig &cfg)
{
    const double lam = natural_scale(g2, g3);
    Scaling sc;
    sc.var = {lam * lam, lam, lam * lam * lam};
    for (int i = 0; i < 3; ++i)
        sc.eq[i] = std::pow(lam, eq_weights[i]);
    ScaledSystem g(f, sc);

    CensusReport rep;
    rep.g2 = g2;
    rep.g3 = g3;
    rep.bound = bound;
    rep.cfg = cfg;
    const double R0 = cfg.box_radius > 0.0 ? cfg.box_radius : default_box_radius(g2, g3);
    const long per_round = cfg.starts > 0 ? cfg.starts : 200 * std::max(1L, bound);
    const int workers = cfg.workers > 0 ? cfg.workers : worker_count();
    const std::size_t batch = 64;

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::array<double, 6> shift;
    for (auto &s : shift)
        s = uni(rng);
    boost::random::sobol qrng(6);
    qrng.discard(6); // skip the origin point
    boost::random::uniform_01<double> u01;

    std::vector<Working> clusters;
    auto absorb = [&](const Candidate &cand) {
        double degen_tol = cfg.degenerate_tol;
        bool deg = cand.sigma_ratio < degen_tol;
        for (auto &w : clusters)
        {
            double tol = (deg || w.degenerate) ? std::sqrt(cfg.merge_tol) : cfg.merge_tol;
            if (scaled_distance(w.best.y, cand.y) < tol)
            {
                ++w.members;
                w.degenerate = w.degenerate || deg;
                if (cand.residual < w.best.residual || (cand.projected && !w.best.projected &&
                                                        cand.residual <= cfg.accept_tol))
                    w.best = cand;
                return false;
            }
        }
        clusters.push_back(Working{cand, 1, deg});
        return true;
    };

    long used = 0;
    int round = 0;
    for (; round <= cfg.max_doublings; ++round)
    {
        const double R = R0 * std::pow(2.0, round);
        const std::array<double, 3> radius = {R / sc.var[0], std::sqrt(R) / sc.var[1],
                                              std::pow(R, 1.5) / sc.var[2]};
        bool found_new = false;
        for (long done = 0; done < per_round && !rep.reached_bound;)
        {
            std::size_t nb = static_cast<std::size_t>(std::min<long>(batch, per_round - done));
            std::vector<std::array<cplx, 3>> starts(nb);
            for (auto &s : starts)
            {
                std::array<double, 6> u;
                for (int k = 0; k < 6; ++k)
                {
                    u[k] = u01(qrng) + shift[k];
                    u[k] -= std::floor(u[k]);
                }
                for (int k = 0; k < 3; ++k)
                    s[k] = radius[k] * cplx(2.0 * u[2 * k] - 1.0, 2.0 * u[2 * k + 1] - 1.0);
            }
            std::vector<Candidate> out(nb);
            parallel_for(nb, workers, [&](std::size_t i) {
                Candidate c = newton(g, starts[i], cfg.max_iter);
                if (!c.ok)
                    return;
                double nb0 = 1.0 + std::abs(c.y[0]);
                if (std::abs(c.y[1]) <= 1e-3 * nb0 && std::abs(c.y[2]) <= 1e-3 * nb0)
                {
                    Candidate p = even_projection(g, c.y[0], cfg.max_iter);
                    if (p.ok && p.residual <= cfg.accept_tol && p.residual <= std::max(c.residual, cfg.accept_tol))
                        c = p;
                }
                out[i] = c;
            });
            for (const auto &c : out)
                if (c.ok && c.residual <= cfg.accept_tol && absorb(c))
                    found_new = true;
            done += static_cast<long>(nb);
            used += static_cast<long>(nb);
            if (bound > 0 && static_cast<long>(clusters.size()) >= bound)
                rep.reached_bound = true;
        }
        rep.box_radius_used = R;
        if (rep.reached_bound || (round > 0 && !found_new))
            break;
    }
    rep.rounds = std::min(round, cfg.max_doublings) + 1;
    rep.starts_used = used;

    for (const auto &w : clusters)
    {
        RootCluster rc;
        auto x = g.unscale(w.best.y);
        rc.center = ParamVec::one_puncture(x[0], x[1], x[2]);
        rc.residual_norm = w.best.residual;
        rc.degenerate = w.degenerate || w.best.sigma_ratio < cfg.degenerate_tol;
        rc.sigma_ratio = w.best.sigma_ratio;
        rc.last_step_ratio = w.best.step_ratio;
        rc.quadratic_tail = w.best.quadratic;
        rc.members = w.members;
        rc.multiplicity = 1;
        double tolB = cfg.even_tol * (1.0 + std::abs(x[0]));
        rc.is_even = std::abs(x[1]) <= tolB && std::abs(x[2]) <= tolB;
        rep.clusters.push_back(rc);
    }
    std::sort(rep.clusters.begin(), rep.clusters.end(), [&](const RootCluster &a, const RootCluster &b) {
        std::array<cplx, 3> pa{a.center.B / sc.var[0], a.center.Dk[0] / sc.var[1], a.center.D / sc.var[2]};
        std::array<cplx, 3> pb{b.center.B / sc.var[0], b.center.Dk[0] / sc.var[1], b.center.D / sc.var[2]};
        for (int i = 0; i < 3; ++i)
        {
            long long ar = key_of(pa[i].real()), br = key_of(pb[i].real());
            if (ar != br)
                return ar < br;
            long long ai = key_of(pa[i].imag()), bi = key_of(pb[i].imag());
            if (ai != bi)
                return ai < bi;
        }
        return false;
    });
    rep.total = static_cast<long>(rep.clusters.size());
    rep.even = std::count_if(rep.clusters.begin(), rep.clusters.end(), [](const RootCluster &c) { return c.is_even; });
    if (rep.total == 0)
        throw InconclusiveError("no root found after " + std::to_string(used) + " starts");
    if (bound > 0 && !rep.reached_bound)
        rep.note = "found " + std::to_string(rep.total) + " of at most " + std::to_string(bound) + " after " +
                   std::to_string(used) + " starts";
    return rep;
}

namespace
{

// P01, P02, P03 with (g2, g3) substituted, as dense term lists in (B, D0, D)
System3 compile_m0(const ApparencySystemM0 &sys, cplx g2, cplx g3)
{
    struct Term
    {
        int e[3];
        cplx c;
    };
    const VarTable &Z = sys.P01.vars();
    const std::size_t iB = Z.index("B"), iD0 = Z.index("D0"), iD = Z.index("D"), ig2 = Z.index("g2"),
                      ig3 = Z.index("g3");
    auto compile = [&](const WeightedPoly &P) {
        std::vector<Term> ts;
        for (const auto &[e, q] : P.terms())
        {
            cplx c = q.get_d() * std::pow(g2, e[ig2]) * std::pow(g3, e[ig3]);
            if (c != cplx(0.0))
                ts.push_back(Term{{e[iB], e[iD0], e[iD]}, c});
        }
        return ts;
    };
    std::array<std::vector<Term>, 3> eqs{compile(sys.P01), compile(sys.P02), compile(sys.P03)};
    return [eqs](const std::array<cplx, 3> &x, Eigen::Matrix3cd *J) {
        std::array<cplx, 3> r{0.0, 0.0, 0.0};
        if (J)
            J->setZero();
        for (int k = 0; k < 3; ++k)
            for (const auto &t : eqs[k])
            {
                cplx pw[3], dpw[3];
                for (int v = 0; v < 3; ++v)
                {
                    int e = t.e[v];
                    pw[v] = e == 0 ? cplx(1.0) : std::pow(x[v], e);
                    dpw[v] = e == 0 ? cplx(0.0) : static_cast<double>(e) * (e == 1 ? cplx(1.0) : std::pow(x[v], e - 1));
                }
                r[k] += t.c * pw[0] * pw[1] * pw[2];
                if (J)
                {
                    (*J)(k, 0) += t.c * dpw[0] * pw[1] * pw[2];
                    (*J)(k, 1) += t.c * pw[0] * dpw[1] * pw[2];
                    (*J)(k, 2) += t.c * pw[0] * pw[1] * dpw[2];
                }
            }
        return r;
    };
}

std::array<int, 3> m0_weights(int n1, int n2) { return {n1 + 1, n2 + 1, n1 + n2 + 2}; }

} // namespace

CensusReport solve_m0(const ProblemSpec &problem, const EllipticContext &ctx, const SolverConfig &cfg)
{
    require_noncritical(problem);
    if (problem.m() != 0)
        throw StructuralError("solve_m0 needs exactly one puncture");
    const long bound = bezout_bound(problem);
    const auto &s = problem.punctures[0].spec;
    ApparencySystemM0 sys = build_m0_system(s.n1, s.n2);
    System3 f = compile_m0(sys, ctx.g2(), ctx.g3());
    auto w = m0_weights(s.n1, s.n2);
    CensusReport rep = solve_system3(f, w, ctx.g2(), ctx.g3(), bound, cfg);
    rep.route = "m0";
    rep.problem = problem;

    // cross-check every center against the recursion run numerically on the lattice
    ResidualMap rm(problem, ctx);
    const double lam = natural_scale(ctx.g2(), ctx.g3());
    for (auto &c : rep.clusters)
    {
        auto r = rm(c.center);
        for (int i = 0; i < 3; ++i)
            c.residual_norm = std::max(c.residual_norm, std::abs(r[2 + i]) / std::pow(lam, w[i]));
    }
    return rep;
}

CensusReport solve_m0_polynomial(const ApparencySystemM0 &sys, cplx g2, cplx g3, const SolverConfig &cfg)
{
    ProblemSpec ps;
    ps.punctures.resize(1);
    ps.punctures[0].spec = PunctureSpec{0.0, sys.n1, sys.n2};
    // the bound still counts isolated roots of a system with these degrees
    long bound = static_cast<long>(sys.n1 + 1) * (sys.n2 + 1) * (sys.n1 + sys.n2 + 2) / 6;
    CensusReport rep = solve_system3(compile_m0(sys, g2, g3), m0_weights(sys.n1, sys.n2), g2, g3, bound, cfg);
    rep.route = "probe";
    rep.problem = ps;
    return rep;
}

CensusReport solve_even(const ProblemSpec &problem, const EllipticContext &ctx, double tol)
{
    if (problem.m() != 0)
        throw StructuralError("solve_even needs exactly one puncture");
    const auto &s = problem.punctures[0].spec;
    // parity is decided before criticality so that (1,1) gets the parity answer
    if (s.n1 % 2 == 1 && s.n2 % 2 == 1)
        throw EvenNonexistenceError("no even solutions: n1 and n2 are both odd (m = 0)");
    require_noncritical(problem);
    EvenPoly ep = build_even_poly(s.n1, s.n2);
    auto c = even_poly_coefficients(ep, ctx.g2(), ctx.g3());
    // B = l^2 b puts the roots at unit scale
    const double l2 = std::pow(natural_scale(ctx.g2(), ctx.g3()), 2);
    std::vector<cplx> cb(c.size());
    double pw = 1.0;
    for (std::size_t i = 0; i < c.size(); ++i, pw *= l2)
        cb[i] = c[i] * pw;
    auto roots = roots_univariate(cb, tol);

    CensusReport rep;
    rep.route = "even";
    rep.problem = problem;
    rep.g2 = ctx.g2();
    rep.g3 = ctx.g3();
    rep.bound = ep.Ne;
    for (const auto &[b, mult] : roots)
    {
        RootCluster rc;
        rc.center = ParamVec::one_puncture(b * l2, 0.0, 0.0);
        rc.multiplicity = mult;
        Horner h = horner(cb, b);
        rc.residual_norm = h.scale > 0.0 ? std::abs(h.p) / h.scale : 0.0;
        rc.is_even = true;
        rc.degenerate = mult > 1;
        rc.members = mult;
        rep.clusters.push_back(rc);
    }
    rep.total = static_cast<long>(rep.clusters.size());
    rep.even = rep.total;
    rep.reached_bound = rep.total == rep.bound;
    return rep;
}

std::vector<cplx> rectangle_grid(double re0, double re1, int nre, double im0, double im1, int nim)
{
    if (nre < 1 || nim < 1)
        throw StructuralError("grid counts must be positive");
    std::vector<cplx> out;
    for (int j = 0; j < nim; ++j)
        for (int i = 0; i < nre; ++i)
        {
            double x = nre == 1 ? re0 : re0 + (re1 - re0) * i / (nre - 1);
            double y = nim == 1 ? im0 : im0 + (im1 - im0) * j / (nim - 1);
            if (y > 0.0)
                out.push_back({x, y});
        }
    return out;
}

std::vector<ScanRow> scan_tau(const ProblemSpec &problem_template, const std::vector<cplx> &grid,
                              const SolverConfig &cfg)
{
    std::vector<PunctureSpec> specs;
    for (const auto &p : problem_template.punctures)
        specs.push_back(p.spec);
    std::vector<ScanRow> rows(grid.size());
    SolverConfig inner = cfg;
    inner.workers = 1;
    const int workers = cfg.workers > 0 ? cfg.workers : worker_count();
    parallel_for(grid.size(), workers, [&](std::size_t i) {
        ScanRow &row = rows[i];
        row.tau = grid[i];
        row.min_distance = std::numeric_limits<double>::infinity();
        try
        {
            if (!(grid[i].imag() > 0.0))
                throw StructuralError("tau must lie in the upper half-plane");
            ProblemSpec ps = derive_problem({grid[i]}, specs);
            EllipticContext ctx = compute_invariants({grid[i]});
            row.bound = bezout_bound(ps);
            CensusReport rep = solve_m0(ps, ctx, inner);
            row.total = rep.total;
            row.even = rep.even;
            const double lam = natural_scale(ctx.g2(), ctx.g3());
            std::vector<std::array<cplx, 3>> ys;
            for (const auto &c : rep.clusters)
            {
                row.degenerate = row.degenerate || c.degenerate;
                ys.push_back({c.center.B / (lam * lam), c.center.Dk[0] / lam, c.center.D / (lam * lam * lam)});
            }
            for (std::size_t a = 0; a < ys.size(); ++a)
                for (std::size_t b = a + 1; b < ys.size(); ++b)
                    row.min_distance = std::min(row.min_distance, scaled_distance(ys[a], ys[b]));
            if (row.min_distance < std::sqrt(cfg.merge_tol))
                row.degenerate = true;
        }
        catch (const Error &e)
        {
            row.error = e.what();
        }
    });
    return rows;
}

std::string scan_csv(const std::vector<ScanRow> &rows)
{
    std::ostringstream os;
    os.precision(17);
    os << "tau_re,tau_im,total,even,bound,degenerate,min_distance,error\n";
    for (const auto &r : rows)
    {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), '"', '\'');
        os << r.tau.real() << ',' << r.tau.imag() << ',' << r.total << ',' << r.even << ',' << r.bound << ','
           << (r.degenerate ? 1 : 0) << ',';
        if (std::isfinite(r.min_distance))
            os << r.min_distance;
        os << ",\"" << err << "\"\n";
    }
    return os.str();
}

} // namespace toda
