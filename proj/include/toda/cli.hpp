#ifndef TODA_CLI_HPP
#define TODA_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "toda/solver.hpp"

namespace toda
{

enum ExitCode : int
{
    exit_ok = 0,
    exit_bad_input = 1,
    exit_critical = 2,
    exit_even_nonexistence = 3,
    exit_inconclusive = 4,
};

struct RunConfig
{
    std::string command; // invariants, polys, even, solve, monodromy, scan, probe-degenerate
    std::optional<std::string> tau; // "re,im", "i", "rho" or "tau0"; default i
    std::optional<int> n1, n2;
    std::string punctures_file;
    std::string params_file;
    std::uint64_t seed = 0;
    std::optional<double> tol;
    std::string out;
    std::string format = "json"; // json, csv; polys also takes text
    SolverConfig solver;
    // scan rectangle
    double re0 = -0.5, re1 = 0.5, im0 = 0.8, im1 = 1.6;
    int nre = 5, nim = 5;
};

// Parses argv into cfg. Returns an exit code when the program should stop
// (help requested or a parse error), nullopt otherwise.
std::optional<int> parse_args(int argc, const char *const *argv, RunConfig &cfg, std::ostream &out,
                              std::ostream &err);

// Executes the command; the artifact goes to cfg.out when set and to out otherwise.
int run(const RunConfig &cfg, std::ostream &out, std::ostream &err);

} // namespace toda

#endif
