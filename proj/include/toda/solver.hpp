#ifndef TODA_SOLVER_HPP
#define TODA_SOLVER_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "toda/apparency.hpp"
#include "toda/elliptic.hpp"
#include "toda/error.hpp"

namespace toda
{

struct SolverConfig
{
    double box_radius = 0.0; // 0: 10 (1 + |g2|^{1/2} + |g3|^{1/3})
    long starts = 0;         // per round; 0: 200 N
    int max_iter = 100;
    int max_doublings = 3;
    double accept_tol = 1e-10;
    double even_tol = 1e-8;
    double merge_tol = 1e-6;
    double degenerate_tol = 1e-6; // sigma_min / sigma_max below this flags a cluster
    std::uint64_t seed = 0;
    int workers = 0; // 0: worker_count()
};

struct RootCluster
{
    ParamVec center;
    int multiplicity = 1;
    double residual_norm = 0.0;
    bool is_even = false;
    bool degenerate = false;
    double sigma_ratio = 1.0;     // sigma_min / sigma_max of the scaled Jacobian at the center
    double last_step_ratio = 0.0; // |dx_k| / |dx_{k-1}|^2 on the final Newton steps
    bool quadratic_tail = false;
    int members = 1;
};

struct CensusReport
{
    std::string route; // "m0", "even" or "probe"
    ProblemSpec problem;
    cplx g2 = 0.0, g3 = 0.0;
    std::vector<RootCluster> clusters;
    long total = 0, even = 0, bound = 0;
    SolverConfig cfg;
    double box_radius_used = 0.0;
    long starts_used = 0;
    int rounds = 0;
    bool reached_bound = false;
    std::string note;
};

// Thrown by roots_univariate when the iteration stalls; carries the last iterates.
class PartialRootsError : public Error
{
public:
    PartialRootsError(const std::string &what, std::vector<std::pair<cplx, int>> partial)
        : Error(what), partial_(std::move(partial))
    {
    }
    const std::vector<std::pair<cplx, int>> &partial() const noexcept { return partial_; }

private:
    std::vector<std::pair<cplx, int>> partial_;
};

// coefficients lowest degree first; Aberth-Ehrlich iteration
std::vector<std::pair<cplx, int>> roots_univariate(const std::vector<cplx> &coeffs, double tol = 1e-12,
                                                   int max_iter = 2000);

// (B, D0, D) -> (P1, P2, P3) with optional 3x3 Jacobian
using System3 = std::function<std::array<cplx, 3>(const std::array<cplx, 3> &, Eigen::Matrix3cd *)>;

// weighted scale max(|g2|^{1/4}, |g3|^{1/6}), 1 when both vanish
double natural_scale(cplx g2, cplx g3);
double default_box_radius(cplx g2, cplx g3);

CensusReport solve_m0(const ProblemSpec &problem, const EllipticContext &ctx, const SolverConfig &cfg = {});
CensusReport solve_even(const ProblemSpec &problem, const EllipticContext &ctx, double tol = 1e-12);

// The one-puncture system evaluated from its polynomials at arbitrary (g2, g3),
// including the degenerate point g2 = g3 = 0 that no lattice realizes.
CensusReport solve_m0_polynomial(const ApparencySystemM0 &sys, cplx g2, cplx g3, const SolverConfig &cfg = {});

// Generic multi-start driver shared by the routes above.
CensusReport solve_system3(const System3 &f, std::array<int, 3> eq_weights, cplx g2, cplx g3, long bound,
                           const SolverConfig &cfg);

struct ScanRow
{
    cplx tau;
    long total = 0, even = 0, bound = 0;
    bool degenerate = false;
    double min_distance = 0.0; // smallest scaled distance between clusters, inf when fewer than two
    std::string error;
};

// problem_template supplies the punctures; its lattice is replaced per grid point
std::vector<ScanRow> scan_tau(const ProblemSpec &problem_template, const std::vector<cplx> &grid,
                              const SolverConfig &cfg = {});

// {re0, re1, nre, im0, im1, nim}; points with Im tau <= 0 are dropped
std::vector<cplx> rectangle_grid(double re0, double re1, int nre, double im0, double im1, int nim);

std::string scan_csv(const std::vector<ScanRow> &rows);

} // namespace toda

#endif
