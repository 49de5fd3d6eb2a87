#include "toda/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "toda/error.hpp"
#include "toda/parallel.hpp"

namespace toda
{

namespace
{

constexpr double pi = 3.14159265358979323846;
const cplx I(0.0, 1.0);

// DOP853 tableau (Hairer, Norsett and Wanner)
constexpr double c2 = 0.526001519587677318785587544488e-01;
constexpr double c3 = 0.789002279381515978178381316732e-01;
constexpr double c4 = 0.118350341907227396726757197510e+00;
constexpr double c5 = 0.281649658092772603273242802490e+00;
constexpr double c6 = 0.333333333333333333333333333333e+00;
constexpr double c7 = 0.25e+00;
constexpr double c8 = 0.307692307692307692307692307692e+00;
constexpr double c9 = 0.651282051282051282051282051282e+00;
constexpr double c10 = 0.6e+00;
constexpr double c11 = 0.857142857142857142857142857142e+00;

constexpr double a21 = 5.26001519587677318785587544488e-2;
constexpr double a31 = 1.97250569845378994544595329183e-2;
constexpr double a32 = 5.91751709536136983633785987549e-2;
constexpr double a41 = 2.95875854768068491816892993775e-2;
constexpr double a43 = 8.87627564304205475450678981324e-2;
constexpr double a51 = 2.41365134159266685502369798665e-1;
constexpr double a53 = -8.84549479328286085344864962717e-1;
constexpr double a54 = 9.24834003261792003115737966543e-1;
constexpr double a61 = 3.7037037037037037037037037037e-2;
constexpr double a64 = 1.70828608729473871279604482173e-1;
constexpr double a65 = 1.25467687566822425016691814123e-1;
constexpr double a71 = 3.7109375e-2;
constexpr double a74 = 1.70252211019544039314978060272e-1;
constexpr double a75 = 6.02165389804559606850219397283e-2;
constexpr double a76 = -1.7578125e-2;
constexpr double a81 = 3.70920001185047927108779319836e-2;
constexpr double a84 = 1.70383925712239993810214054705e-1;
constexpr double a85 = 1.07262030446373284651809199168e-1;
constexpr double a86 = -1.53194377486244017527936158236e-2;
constexpr double a87 = 8.27378916381402288758473766002e-3;
constexpr double a91 = 6.24110958716075717114429577812e-1;
constexpr double a94 = -3.36089262944694129406857109825e0;
constexpr double a95 = -8.68219346841726006818189891453e-1;
constexpr double a96 = 2.75920996994467083049415600797e1;
constexpr double a97 = 2.01540675504778934086186788979e1;
constexpr double a98 = -4.34898841810699588477366255144e1;
constexpr double a101 = 4.77662536438264365890433908527e-1;
constexpr double a104 = -2.48811461997166764192642586468e0;
constexpr double a105 = -5.90290826836842996371446475743e-1;
constexpr double a106 = 2.12300514481811942347288949897e1;
constexpr double a107 = 1.52792336328824235832596922938e1;
constexpr double a108 = -3.32882109689848629194453265587e1;
constexpr double a109 = -2.03312017085086261358222928593e-2;
constexpr double a111 = -9.3714243008598732571704021658e-1;
constexpr double a114 = 5.18637242884406370830023853209e0;
constexpr double a115 = 1.09143734899672957818500254654e0;
constexpr double a116 = -8.14978701074692612513997267357e0;
constexpr double a117 = -1.85200656599969598641566180701e1;
constexpr double a118 = 2.27394870993505042818970056734e1;
constexpr double a119 = 2.49360555267965238987089396762e0;
constexpr double a1110 = -3.0467644718982195003823669022e0;
constexpr double a121 = 2.27331014751653820792359768449e0;
constexpr double a124 = -1.05344954667372501984066689879e1;
constexpr double a125 = -2.00087205822486249909675718444e0;
constexpr double a126 = -1.79589318631187989172765950534e1;
constexpr double a127 = 2.79488845294199600508499808837e1;
constexpr double a128 = -2.85899827713502369474065508674e0;
constexpr double a129 = -8.87285693353062954433549289258e0;
constexpr double a1210 = 1.23605671757943030647266201528e1;
constexpr double a1211 = 6.43392746015763530355970484046e-1;

constexpr double b1 = 5.42937341165687622380535766363e-2;
constexpr double b6 = 4.45031289275240888144113950566e0;
constexpr double b7 = 1.89151789931450038304281599044e0;
constexpr double b8 = -5.8012039600105847814672114227e0;
constexpr double b9 = 3.1116436695781989440891606237e-1;
constexpr double b10 = -1.52160949662516078556178806805e-1;
constexpr double b11 = 2.01365400804030348374776537501e-1;
constexpr double b12 = 4.47106157277725905176885569043e-2;

constexpr double e31 = 0.244094488188976377952755905512e+00;
constexpr double e32 = 0.733846688281611857341361741547e+00;
constexpr double e33 = 0.220588235294117647058823529412e-01;

constexpr double e51 = 0.1312004499419488073250102996e-01;
constexpr double e56 = -0.1225156446376204440720569753e+01;
constexpr double e57 = -0.4957589496572501915214079952e+00;
constexpr double e58 = 0.1664377182454986536961530415e+01;
constexpr double e59 = -0.3503288487499736816886487290e+00;
constexpr double e510 = 0.3341791187130174790297318841e+00;
constexpr double e511 = 0.8192320648511571246570742613e-01;
constexpr double e512 = -0.2235530786388629525884427845e-01;

Mat3 companion(cplx W2, cplx W3)
{
    Mat3 A = Mat3::Zero();
    A(0, 1) = 1.0;
    A(1, 2) = 1.0;
    A(2, 0) = -W3;
    A(2, 1) = -W2;
    return A;
}

// One straight segment of the transport, t in [0, 1].
class Segment
{
public:
    Segment(const ProblemSpec &p, const EllipticContext &c, const ParamVec &x, cplx a, cplx b)
        : problem_(p), ctx_(c), params_(x), a_(a), dz_(b - a)
    {
    }

    Mat3 f(double t, const Mat3 &Y) const
    {
        auto [W2, W3] = ode_coefficients(problem_, ctx_, params_, a_ + t * dz_);
        return (companion(W2, W3) * Y) * dz_;
    }

    cplx at(double t) const { return a_ + t * dz_; }
    double length() const { return std::abs(dz_); }

private:
    const ProblemSpec &problem_;
    const EllipticContext &ctx_;
    const ParamVec &params_;
    cplx a_, dz_;
};

void integrate(const Segment &seg, const ProblemSpec &problem, const EllipticContext &ctx, Mat3 &Y, double rtol,
               double *det_drift, long &steps, long max_steps, double step_fraction)
{
    if (seg.length() == 0.0)
        return;
    const double safe = 0.9, facc1 = 1.0 / 0.333, facc2 = 1.0 / 6.0, expo = 1.0 / 8.0;
    double t = 0.0;
    Mat3 k1 = seg.f(0.0, Y);
    double h = 0.0;
    {
        double d = singular_distance(problem, ctx, seg.at(0.0));
        h = std::min(1.0, step_fraction * d / seg.length());
    }
    bool reject = false;
    while (t < 1.0)
    {
        double d = singular_distance(problem, ctx, seg.at(t));
        double hmax = step_fraction * d / seg.length();
        h = std::min({h, hmax, 1.0 - t});
        if (h < 1e-14)
            throw PathTooCloseError("integration step underflow near a singular point", d);
        if (++steps > max_steps)
            throw PathTooCloseError("step budget exhausted along the path", d);

        Mat3 k2, k3, k4, k5, k6, k7, k8, k9, k10;
        k2 = seg.f(t + c2 * h, Y + h * (a21 * k1));
        k3 = seg.f(t + c3 * h, Y + h * (a31 * k1 + a32 * k2));
        k4 = seg.f(t + c4 * h, Y + h * (a41 * k1 + a43 * k3));
        k5 = seg.f(t + c5 * h, Y + h * (a51 * k1 + a53 * k3 + a54 * k4));
        k6 = seg.f(t + c6 * h, Y + h * (a61 * k1 + a64 * k4 + a65 * k5));
        k7 = seg.f(t + c7 * h, Y + h * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6));
        k8 = seg.f(t + c8 * h, Y + h * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7));
        k9 = seg.f(t + c9 * h, Y + h * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8));
        k10 = seg.f(t + c10 * h,
                    Y + h * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 + a108 * k8 + a109 * k9));
        Mat3 k11 = seg.f(t + c11 * h, Y + h * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 +
                                               a118 * k8 + a119 * k9 + a1110 * k10));
        Mat3 k12 = seg.f(t + h, Y + h * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 + a128 * k8 +
                                         a129 * k9 + a1210 * k10 + a1211 * k11));
        Mat3 bsum = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k11 + b12 * k12;
        Mat3 Ynew = Y + h * bsum;

        Mat3 e3 = bsum - e31 * k1 - e32 * k9 - e33 * k12;
        Mat3 e5 = e51 * k1 + e56 * k6 + e57 * k7 + e58 * k8 + e59 * k9 + e510 * k10 + e511 * k11 + e512 * k12;
        double err3 = 0.0, err5 = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
            {
                double sk = rtol * (1.0 + std::max(std::abs(Y(i, j)), std::abs(Ynew(i, j))));
                err3 += std::norm(e3(i, j) / sk);
                err5 += std::norm(e5(i, j) / sk);
            }
        double deno = err5 + 0.01 * err3;
        if (deno <= 0.0)
            deno = 1.0;
        double err = h * err5 * std::sqrt(1.0 / (9.0 * deno));
        if (!std::isfinite(err))
        {
            h *= 0.25;
            reject = true;
            continue;
        }
        double fac11 = std::pow(err, expo);
        double fac = std::max(facc2, std::min(facc1, fac11 / safe));
        if (err <= 1.0)
        {
            t += h;
            Y = Ynew;
            if (t < 1.0)
                k1 = seg.f(t, Y);
            if (det_drift)
                *det_drift = std::max(*det_drift, std::abs(Y.determinant() - 1.0));
            double hnew = h / fac;
            if (reject)
                hnew = std::min(hnew, h);
            h = hnew;
            reject = false;
        }
        else
        {
            h /= std::min(facc1, fac11 / safe);
            reject = true;
        }
    }
}

// A base point far from the punctures keeps the normalized frame well conditioned.
cplx choose_base_point(const ProblemSpec &problem, const EllipticContext &ctx, double eps0)
{
    const cplx w3 = 1.0 + ctx.tau();
    if (eps0 > 0.0)
        return -eps0 * w3;
    cplx best = -0.5 * w3;
    double bestd = singular_distance(problem, ctx, best);
    for (int i = 19; i >= 2; --i)
    {
        cplx q = -(0.025 * i) * w3;
        double d = singular_distance(problem, ctx, q);
        if (d > bestd * (1.0 + 1e-9))
        {
            best = q;
            bestd = d;
        }
    }
    return best;
}

PathPolyline concat(PathPolyline a, const PathPolyline &b)
{
    for (std::size_t i = 0; i < b.vertices.size(); ++i)
        if (i > 0 || a.vertices.empty() || a.vertices.back() != b.vertices[i])
            a.vertices.push_back(b.vertices[i]);
    a.clearance = std::min(a.clearance, b.clearance);
    return a;
}

PathPolyline reversed(PathPolyline p)
{
    std::reverse(p.vertices.begin(), p.vertices.end());
    return p;
}

std::array<cplx, 3> eps_powers(cplx e) { return {1.0, e, e * e}; }

Mat3 cyclic()
{
    Mat3 C = Mat3::Zero();
    C(0, 2) = 1.0;
    C(1, 0) = 1.0;
    C(2, 1) = 1.0;
    return C;
}

} // namespace

std::pair<cplx, cplx> ode_coefficients(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params,
                                       cplx z)
{
    if (params.m() != problem.m())
        throw StructuralError("parameter vector does not match the number of punctures");
    cplx Q = params.B, R = params.D;
    for (int k = 0; k <= problem.m(); ++k)
    {
        const auto &pk = problem.punctures[k];
        cplx u = z - pk.spec.p;
        auto w = ctx.wp_derivs(u, 1);
        cplx ze = ctx.zeta(u);
        Q += pk.alpha.get_d() * w[0] + params.Bk[k] * ze;
        R += pk.beta.get_d() * w[1] + params.Dk[k] * w[0] + params.A[k] * ze;
    }
    return {-Q, R};
}

double singular_distance(const ProblemSpec &problem, const EllipticContext &ctx, cplx z)
{
    double d = std::numeric_limits<double>::infinity();
    for (const auto &p : problem.punctures)
        d = std::min(d, ctx.lattice_distance(z - p.spec.p));
    return d;
}

namespace
{

// singular points p_k + n + m tau within rad of the segment [a, b]
std::vector<cplx> singular_near(const ProblemSpec &problem, const EllipticContext &ctx, cplx a, cplx b, double rad)
{
    std::vector<cplx> out;
    const cplx tau = ctx.tau();
    const double L = std::abs(b - a);
    for (const auto &p : problem.punctures)
    {
        cplx mid = 0.5 * (a + b) - p.spec.p;
        double ny = std::round(mid.imag() / tau.imag());
        int span_n = static_cast<int>(std::ceil((0.5 * L + rad) / tau.imag())) + 1;
        for (int n = -span_n; n <= span_n; ++n)
        {
            cplx row = p.spec.p + (ny + n) * tau;
            double nx = std::round((0.5 * (a + b) - row).real());
            int span_m = static_cast<int>(std::ceil(0.5 * L + rad)) + 1;
            for (int m = -span_m; m <= span_m; ++m)
                out.push_back(row + (nx + m));
        }
    }
    std::vector<cplx> near;
    for (cplx s : out)
    {
        double t = std::clamp(((s - a) * std::conj(b - a)).real() / std::max(L * L, 1e-300), 0.0, 1.0);
        if (std::abs(a + t * (b - a) - s) < rad)
            near.push_back(s);
    }
    return near;
}

void route(const ProblemSpec &problem, const EllipticContext &ctx, cplx a, cplx b, double clearance, int depth,
           std::vector<cplx> &out)
{
    const double L = std::abs(b - a);
    double c = std::min(clearance, 0.5 * std::min(singular_distance(problem, ctx, a), singular_distance(problem, ctx, b)));
    if (L > 0.0 && depth < 10)
    {
        const cplx u = (b - a) / L;
        // the closest singular point whose foot lies strictly inside the segment
        std::optional<cplx> hit;
        double hd = c;
        for (cplx s : singular_near(problem, ctx, a, b, c))
        {
            cplx rel = (s - a) / u;
            if (rel.real() <= 0.0 || rel.real() >= L)
                continue;
            if (std::abs(rel.imag()) < hd)
            {
                hd = std::abs(rel.imag());
                hit = s;
            }
        }
        if (hit)
        {
            cplx rel = (*hit - a) / u;
            double side = rel.imag() > 0.0 ? -1.0 : 1.0; // pass on the far side
            cplx w = a + u * cplx(rel.real(), rel.imag() + side * 2.0 * c);
            route(problem, ctx, a, w, clearance, depth + 1, out);
            route(problem, ctx, w, b, clearance, depth + 1, out);
            return;
        }
    }
    out.push_back(b);
}

} // namespace

PathPolyline make_path(const ProblemSpec &problem, const EllipticContext &ctx, cplx a, cplx b, double clearance)
{
    PathPolyline out;
    out.vertices.push_back(a);
    out.clearance = std::numeric_limits<double>::infinity();
    if (b != a)
        route(problem, ctx, a, b, clearance, 0, out.vertices);
    out.clearance = singular_distance(problem, ctx, a);
    for (std::size_t i = 0; i + 1 < out.vertices.size(); ++i)
    {
        cplx p = out.vertices[i], q = out.vertices[i + 1];
        for (cplx s : singular_near(problem, ctx, p, q, out.clearance))
        {
            double L2 = std::norm(q - p);
            double t = L2 > 0.0 ? std::clamp(((s - p) * std::conj(q - p)).real() / L2, 0.0, 1.0) : 0.0;
            out.clearance = std::min(out.clearance, std::abs(p + t * (q - p) - s));
        }
    }
    return out;
}

PathPolyline circle_path(cplx center, cplx start, int chords)
{
    PathPolyline out;
    cplx r = start - center;
    for (int i = 0; i <= chords; ++i)
        out.vertices.push_back(i == chords ? start : center + r * std::polar(1.0, 2.0 * pi * i / chords));
    out.clearance = std::abs(r) * std::cos(pi / chords);
    return out;
}

Mat3 transport(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params,
               const PathPolyline &path, double rtol, double *det_drift, long max_steps, double step_fraction)
{
    if (path.vertices.empty())
        throw StructuralError("empty path");
    if (!(path.clearance > 0.0))
        throw PathTooCloseError("path touches a singular point", path.clearance);
    Mat3 Y = Mat3::Identity();
    if (det_drift)
        *det_drift = 0.0;
    long steps = 0;
    for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i)
    {
        Segment seg(problem, ctx, params, path.vertices[i], path.vertices[i + 1]);
        integrate(seg, problem, ctx, Y, rtol, det_drift, steps, max_steps, step_fraction);
    }
    return Y;
}

double commutator_residual(const Mat3 &N1, const Mat3 &N2, cplx eps)
{
    return (N1 * N2 * N1.inverse() * N2.inverse() - eps * Mat3::Identity()).norm();
}

MonodromyReport monodromy_pair(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params,
                               const MonodromyConfig &cfg)
{
    MonodromyReport rep;
    rep.rtol = cfg.rtol;
    rep.epsilon = problem.epsilon;
    const cplx q0 = choose_base_point(problem, ctx, cfg.eps0);
    rep.q0 = q0;
    const double d0 = singular_distance(problem, ctx, q0);
    const double clearance = cfg.clearance > 0.0 ? cfg.clearance : 0.5 * d0;

    const int M = problem.m();
    std::vector<PathPolyline> paths;
    paths.push_back(make_path(problem, ctx, q0, q0 + 1.0, clearance));
    paths.push_back(make_path(problem, ctx, q0, q0 + ctx.tau(), clearance));
    for (int k = 0; k <= M; ++k)
    {
        cplx pk = problem.punctures[k].spec.p;
        // the nearest translate of p_k
        cplx rel = q0 - pk;
        double ny = std::round(rel.imag() / ctx.tau().imag());
        rel -= ny * ctx.tau();
        rel -= std::round(rel.real());
        cplx center = q0 - rel;
        double other = std::numeric_limits<double>::infinity();
        for (int l = 0; l <= M; ++l)
            for (int a = -1; a <= 1; ++a)
                for (int b = -1; b <= 1; ++b)
                {
                    cplx s = problem.punctures[l].spec.p + static_cast<double>(a) + static_cast<double>(b) * ctx.tau();
                    double dd = ctx.lattice_distance(s - pk);
                    if (dd > 1e-12)
                        other = std::min(other, dd);
                }
        double r = cfg.loop_radius > 0.0 ? cfg.loop_radius : std::min(std::abs(rel), 0.4 * other);
        cplx start = center + r * rel / std::abs(rel);
        PathPolyline lead = make_path(problem, ctx, q0, start, std::min(clearance, 0.5 * r));
        PathPolyline loop = concat(concat(lead, circle_path(center, start)), reversed(lead));
        paths.push_back(loop);
    }

    std::vector<Mat3> T(paths.size());
    std::vector<double> drift(paths.size(), 0.0);
    parallel_for(paths.size(), worker_count(), [&](std::size_t i) {
        T[i] = transport(problem, ctx, params, paths[i], cfg.rtol, &drift[i], cfg.max_steps, cfg.step_fraction);
    });

    rep.N1 = T[0].transpose();
    rep.N2 = T[1].transpose();
    rep.eps_residual = commutator_residual(rep.N1, rep.N2, rep.epsilon);
    rep.det_residual = std::max(std::abs(rep.N1.determinant() - 1.0), std::abs(rep.N2.determinant() - 1.0));
    for (int k = 0; k <= M; ++k)
    {
        Mat3 Mk = T[2 + k].transpose();
        rep.local.push_back(Mk);
        cplx target = std::exp(-2.0 * pi * I * problem.punctures[k].gamma1.get_d());
        rep.local_residual.push_back((Mk - target * Mat3::Identity()).norm());
    }

    Eigen::ComplexEigenSolver<Mat3> es(rep.N1);
    auto targets = eps_powers(rep.epsilon);
    std::array<bool, 3> used{false, false, false};
    rep.eigen_residual = 0.0;
    for (int i = 0; i < 3; ++i)
    {
        cplx lam = es.eigenvalues()(i);
        rep.N1_eigen[i] = lam;
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 3; ++j)
            if (!used[j] && std::abs(lam - targets[j]) < bd)
            {
                bd = std::abs(lam - targets[j]);
                best = j;
            }
        used[best] = true;
        rep.eigen_residual = std::max(rep.eigen_residual, bd);
    }
    return rep;
}

void unitarize(MonodromyReport &rep)
{
    rep.eps_residual = commutator_residual(rep.N1, rep.N2, rep.epsilon);
    if (rep.eps_residual > 1e-4)
        throw NotUnitarizableError("commutator relation fails: eps_residual = " + std::to_string(rep.eps_residual));

    // H = sum h_k E_k over a real basis of 3 x 3 Hermitian matrices
    std::array<Mat3, 9> E;
    for (auto &e : E)
        e.setZero();
    int idx = 0;
    for (int i = 0; i < 3; ++i)
        E[idx++](i, i) = 1.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
        {
            E[idx](i, j) = 1.0;
            E[idx++](j, i) = 1.0;
            E[idx](i, j) = I;
            E[idx++](j, i) = -I;
        }
    Eigen::MatrixXd L(36, 9);
    for (int k = 0; k < 9; ++k)
    {
        int row = 0;
        for (const Mat3 *N : {&rep.N1, &rep.N2})
        {
            Mat3 X = N->adjoint() * E[k] * (*N) - E[k];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                {
                    L(row++, k) = X(i, j).real();
                    L(row++, k) = X(i, j).imag();
                }
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeFullV);
    const auto &s = svd.singularValues();
    const double smax = s(0);
    std::vector<int> null;
    for (int k = 0; k < 9; ++k)
        if (s(k) <= 1e-8 * smax)
            null.push_back(k);
    if (null.empty())
    {
        // only the smallest direction, when it is clearly separated from the rest
        if (s(8) <= 1e-5 * smax && s(8) <= 1e-3 * s(7))
        {
            null.push_back(8);
            rep.notes.push_back("fixed-point space taken from the smallest singular value " + std::to_string(s(8) / smax));
        }
        else
            throw NotUnitarizableError("no Hermitian matrix is fixed by the monodromy");
    }

    std::optional<Mat3> H;
    for (int k : null)
    {
        Mat3 Hk = Mat3::Zero();
        for (int j = 0; j < 9; ++j)
            Hk += svd.matrixV()(j, k) * E[j];
        for (double sign : {1.0, -1.0})
        {
            Mat3 Hs = sign * Hk;
            Eigen::SelfAdjointEigenSolver<Mat3> se(Hs);
            if (se.eigenvalues().minCoeff() > 1e-8 * se.eigenvalues().cwiseAbs().maxCoeff())
            {
                H = Hs / std::cbrt(Hs.determinant().real());
                break;
            }
        }
        if (H)
            break;
    }
    if (!H)
        throw NotUnitarizableError("the fixed Hermitian form is indefinite");
    rep.H = *H;

    // H = P^* P, P N P^{-1} unitary
    Eigen::LLT<Mat3> llt(*H);
    Mat3 P = llt.matrixL().adjoint();
    Mat3 U1 = P * rep.N1 * P.inverse();

    // eigenbasis of U1 ordered as (1, eps, eps^2)
    Eigen::ComplexEigenSolver<Mat3> es(U1);
    auto targets = eps_powers(rep.epsilon);
    Mat3 Q;
    std::array<bool, 3> used{false, false, false};
    for (int j = 0; j < 3; ++j)
    {
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i)
            if (!used[i] && std::abs(es.eigenvalues()(i) - targets[j]) < bd)
            {
                bd = std::abs(es.eigenvalues()(i) - targets[j]);
                best = i;
            }
        used[best] = true;
        Q.col(j) = es.eigenvectors().col(best).normalized();
    }
    // Gram-Schmidt keeps Q unitary against round-off
    Eigen::HouseholderQR<Mat3> qr(Q);
    Mat3 Qr = qr.householderQ();
    for (int j = 0; j < 3; ++j)
    {
        cplx ph = Qr.col(j).dot(Q.col(j));
        Qr.col(j) *= ph / std::abs(ph);
    }
    Mat3 G = Qr.adjoint() * P;
    Mat3 V2 = G * rep.N2 * G.inverse();
    // V2 ~ [[0,0,a],[b,0,0],[0,c,0]]; D = diag(1, b^{-1}, a) brings it to the cyclic matrix
    cplx a = V2(0, 2), b = V2(1, 0);
    Mat3 D = Mat3::Identity();
    D(1, 1) = 1.0 / b;
    D(2, 2) = a;
    // D is unitary up to round-off here; rescaling by |.| keeps the frame unitary
    D(1, 1) /= std::abs(D(1, 1));
    D(2, 2) /= std::abs(D(2, 2));
    G = D * G;
    rep.G = G;
    rep.N1u = G * rep.N1 * G.inverse();
    rep.N2u = G * rep.N2 * G.inverse();
    Mat3 diag = Mat3::Zero();
    for (int j = 0; j < 3; ++j)
        diag(j, j) = targets[j];
    rep.normal_form_N1 = (rep.N1u - diag).norm();
    Mat3 C = cyclic();
    cplx c = (C.adjoint() * rep.N2u).trace() / 3.0;
    rep.normal_form_N2 = (rep.N2u - c * C).norm();
    rep.unitarizable = true;
}

std::vector<cplx> default_grid(cplx tau, int n)
{
    std::vector<cplx> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
        {
            double s = (i + 0.5) / n - 0.5, t = (j + 0.5) / n - 0.5;
            out.push_back(s + t * tau);
        }
    return out;
}

namespace
{

// Phi at z, continued from the base point
Mat3 phi_at(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params,
            const MonodromyReport &rep, cplx z, double clearance)
{
    PathPolyline path = make_path(problem, ctx, rep.q0, z, clearance);
    return transport(problem, ctx, params, path, rep.rtol);
}

// Phi at z + h dir from Phi at z
Mat3 phi_step(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params,
              const MonodromyReport &rep, const Mat3 &Phi, cplx z, cplx dz)
{
    PathPolyline seg{{z, z + dz}, singular_distance(problem, ctx, z) - std::abs(dz)};
    return transport(problem, ctx, params, seg, rep.rtol) * Phi;
}

// (e^{-U}, e^{-V}) from the unitarized frame G Y
std::pair<double, double> exp_uv(const Mat3 &G, double absW, const Mat3 &Phi)
{
    Eigen::Vector3cd y = G * Phi.row(0).transpose();
    Eigen::Vector3cd yp = G * Phi.row(1).transpose();
    double s2 = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            s2 += std::norm(y(i) * yp(j) - y(j) * yp(i));
    return {0.25 * std::pow(absW, -2.0 / 3.0) * y.squaredNorm(), 0.25 * std::pow(absW, -4.0 / 3.0) * s2};
}

} // namespace

std::pair<double, double> reconstruct_UV(const ProblemSpec &problem, const EllipticContext &ctx,
                                         const ParamVec &params, const MonodromyReport &rep, cplx z)
{
    if (!rep.unitarizable)
        throw NotUnitarizableError("reconstruction needs a unitarized frame");
    double clearance = 0.5 * singular_distance(problem, ctx, rep.q0);
    Mat3 Phi = phi_at(problem, ctx, params, rep, z, clearance);
    auto [eU, eV] = exp_uv(rep.G, std::abs(rep.G.determinant()), Phi);
    return {-std::log(eU), -std::log(eV)};
}

Reconstruction reconstruct_and_check(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params,
                                     const MonodromyReport &rep, const std::vector<cplx> &grid, double h,
                                     bool check_even)
{
    if (!rep.unitarizable)
        throw NotUnitarizableError("reconstruction needs a unitarized frame");
    Reconstruction out;
    out.min_exp_U = out.min_exp_V = std::numeric_limits<double>::infinity();
    const double absW = std::abs(rep.G.determinant());
    const double clearance = 0.5 * singular_distance(problem, ctx, rep.q0);
    struct Sample
    {
        bool ok = false;
        double rU = 0.0, rV = 0.0, eU = 0.0, eV = 0.0, even = 0.0;
        std::string note;
    };
    std::vector<Sample> samples(grid.size());
    parallel_for(grid.size(), worker_count(), [&](std::size_t i) {
        const cplx z = grid[i];
        Sample &s = samples[i];
        if (singular_distance(problem, ctx, z) < 0.1 || (check_even && singular_distance(problem, ctx, -z) < 0.1))
            return;
        try
        {
            Mat3 Phi = phi_at(problem, ctx, params, rep, z, clearance);
            auto [eU, eV] = exp_uv(rep.G, absW, Phi);
            double U0 = -std::log(eU), V0 = -std::log(eV);
            // fourth-order central stencil along each axis
            double lapU = -60.0 * U0, lapV = -60.0 * V0;
            for (cplx dir : {cplx(1.0), cplx(-1.0), I, -I})
                for (int k : {1, 2})
                {
                    auto [a, b] = exp_uv(rep.G, absW, phi_step(problem, ctx, params, rep, Phi, z, k * h * dir));
                    double w = k == 1 ? 16.0 : -1.0;
                    lapU -= w * std::log(a);
                    lapV -= w * std::log(b);
                }
            lapU /= 12.0 * h * h;
            lapV /= 12.0 * h * h;
            s.rU = std::abs(lapU + std::exp(2.0 * U0 - V0));
            s.rV = std::abs(lapV + std::exp(2.0 * V0 - U0));
            s.eU = eU;
            s.eV = eV;
            if (check_even)
            {
                Mat3 Pm = phi_at(problem, ctx, params, rep, -z, clearance);
                s.even = std::abs(U0 + std::log(exp_uv(rep.G, absW, Pm).first));
            }
            s.ok = true;
        }
        catch (const Error &e)
        {
            s.note = std::string("grid point ") + std::to_string(i) + " failed: " + e.what();
        }
    });
    double even = 0.0;
    for (const auto &s : samples)
    {
        if (!s.note.empty())
            out.notes.push_back(s.note);
        if (!s.ok)
        {
            ++out.skipped;
            continue;
        }
        ++out.used;
        out.pde_U = std::max(out.pde_U, s.rU);
        out.pde_V = std::max(out.pde_V, s.rV);
        out.min_exp_U = std::min(out.min_exp_U, s.eU);
        out.min_exp_V = std::min(out.min_exp_V, s.eV);
        even = std::max(even, s.even);
    }
    const int failed = static_cast<int>(out.notes.size());
    if (out.skipped > failed)
        out.notes.push_back(std::to_string(out.skipped - failed) + " grid points within 0.1 of a singularity skipped");
    out.pde_residual = std::max(out.pde_U, out.pde_V);
    if (check_even)
        out.even_residual = even;
    if (out.used == 0)
        throw InconclusiveError("no usable grid points for the reconstruction");
    return out;
}

MonodromyReport verify_params(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params,
                              const MonodromyConfig &cfg, bool check_even)
{
    MonodromyReport rep = monodromy_pair(problem, ctx, params, cfg);
    try
    {
        unitarize(rep);
        auto rc = reconstruct_and_check(problem, ctx, params, rep, default_grid(ctx.tau()), 1e-3, check_even);
        rep.pde_residual = rc.pde_residual;
        rep.even_residual = rc.even_residual;
        for (auto &n : rc.notes)
            rep.notes.push_back(n);
    }
    catch (const Error &e)
    {
        rep.notes.push_back(e.what());
    }
    return rep;
}

} // namespace toda
