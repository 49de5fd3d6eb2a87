#ifndef TODA_MONODROMY_HPP
#define TODA_MONODROMY_HPP

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "toda/apparency.hpp"
#include "toda/elliptic.hpp"

namespace toda
{

using Mat3 = Eigen::Matrix3cd;

struct MonodromyConfig
{
    double rtol = 1e-12;
    double eps0 = 0.0;         // base point q0 = -eps0 (1 + tau); 0: farthest from the singular set
    double clearance = 0.0;    // 0: half the distance from q0 to the singular set
    double loop_radius = 0.0;  // 0: |q0 - p_k| capped by the other singularities
    double step_fraction = 0.25;
    long max_steps = 1000000;
};

struct PathPolyline
{
    std::vector<cplx> vertices;
    double clearance = 0.0;
};

struct MonodromyReport
{
    Mat3 N1 = Mat3::Identity(), N2 = Mat3::Identity();
    std::vector<Mat3> local;            // rho(loop around p_k) in the base-point frame
    std::vector<double> local_residual; // |M_k - exp(-2 pi i gamma_{1,k}) I|
    cplx epsilon = 1.0;
    double eps_residual = 0.0;
    double det_residual = 0.0; // max |det N_j - 1|
    cplx q0 = 0.0;
    double rtol = 0.0;

    bool unitarizable = false;
    std::optional<Mat3> H;
    Mat3 G = Mat3::Identity();   // Y_unitary = G Y
    Mat3 N1u = Mat3::Identity(), N2u = Mat3::Identity();
    std::array<cplx, 3> N1_eigen{};
    double eigen_residual = 0.0;   // distance of the eigenvalues of N1 to {1, eps, eps^2}
    double normal_form_N1 = 0.0;   // |N1u - diag(1, eps, eps^2)|
    double normal_form_N2 = 0.0;   // min over c of |N2u - c C| with C the cyclic matrix

    std::optional<double> pde_residual;
    std::optional<double> even_residual;
    std::vector<std::string> notes;
};

// (W2, W3) with y''' + W2 y' + W3 y = 0
std::pair<cplx, cplx> ode_coefficients(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params,
                                       cplx z);

// distance from z to the nearest p_k + lattice point
double singular_distance(const ProblemSpec &problem, const EllipticContext &ctx, cplx z);

// straight segments from a to b, detouring through waypoints around any singularity closer than c
PathPolyline make_path(const ProblemSpec &problem, const EllipticContext &ctx, cplx a, cplx b, double clearance);

// counterclockwise circle around center starting and ending at start
PathPolyline circle_path(cplx center, cplx start, int chords = 96);

// Fundamental matrix of Phi' = A Phi along the path, Phi(start) = I, columns (y, y', y'').
// det_drift receives max |det Phi - 1| over the accepted steps when not null.
Mat3 transport(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params,
               const PathPolyline &path, double rtol, double *det_drift = nullptr, long max_steps = 1000000,
               double step_fraction = 0.25);

// |N1 N2 N1^{-1} N2^{-1} - eps I| (Frobenius)
double commutator_residual(const Mat3 &N1, const Mat3 &N2, cplx eps);

MonodromyReport monodromy_pair(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params,
                               const MonodromyConfig &cfg = {});

// Hermitian fixed point of the monodromy and the basis change to the normal form.
// Fills H, G, N1u, N2u and the normal-form distances; throws NotUnitarizableError.
void unitarize(MonodromyReport &report);

struct Reconstruction
{
    double pde_residual = 0.0;
    double pde_U = 0.0, pde_V = 0.0;
    std::optional<double> even_residual;
    double min_exp_U = 0.0, min_exp_V = 0.0; // smallest e^{-U}, e^{-V} on the grid
    int used = 0, skipped = 0;
    std::vector<std::string> notes;
};

// default 8 x 8 grid on the period parallelogram centered at 0
std::vector<cplx> default_grid(cplx tau, int n = 8);

// U, V at z in the unitarized frame of report
std::pair<double, double> reconstruct_UV(const ProblemSpec &problem, const EllipticContext &ctx,
                                         const ParamVec &params, const MonodromyReport &report, cplx z);

Reconstruction reconstruct_and_check(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params,
                                     const MonodromyReport &report, const std::vector<cplx> &grid, double h = 1e-3,
                                     bool check_even = false);

// monodromy_pair, unitarize and reconstruct_and_check in one go; failures end up in notes
MonodromyReport verify_params(const ProblemSpec &problem, const EllipticContext &ctx, const ParamVec &params,
                              const MonodromyConfig &cfg = {}, bool check_even = false);

} // namespace toda

#endif
