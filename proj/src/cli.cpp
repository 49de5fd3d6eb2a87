#include "toda/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "toda/error.hpp"
#include "toda/json_io.hpp"
#include "toda/monodromy.hpp"

namespace toda
{

namespace
{

const std::vector<std::pair<std::string, std::string>> commands = {
    {"invariants", "g2, g3 and e_k of the lattice"},
    {"polys", "apparency polynomials P01, P02, P03 of the one-puncture system"},
    {"even", "even-sector polynomial and its roots"},
    {"solve", "numerical census of the one-puncture system"},
    {"monodromy", "monodromy verification of given params or of every census root"},
    {"scan", "census counts over a rectangle of tau values"},
    {"probe-degenerate", "solve the one-puncture system at g2 = g3 = 0"},
};

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ojson read_json_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw StructuralError("cannot open " + path);
    try
    {
        return ojson::parse(in);
    }
    catch (const nlohmann::json::exception &e)
    {
        throw StructuralError("invalid JSON in " + path + ": " + e.what());
    }
}

cplx resolve_tau(const std::string &s)
{
    if (s == "tau0")
        return find_form_zero(ModularForm::F343, {0.5, 1.2});
    return parse_tau(s);
}

struct Input
{
    cplx tau;
    std::vector<PunctureSpec> punctures;
};

Input resolve_input(const RunConfig &cfg, bool need_punctures)
{
    Input in;
    std::optional<cplx> file_tau;
    if (!cfg.punctures_file.empty())
    {
        ojson j = read_json_file(cfg.punctures_file);
        in.punctures = punctures_from_json(j);
        file_tau = tau_from_json(j);
        if (cfg.n1 || cfg.n2)
            throw StructuralError("--punctures cannot be combined with --n1/--n2");
    }
    else if (cfg.n1 && cfg.n2)
        in.punctures = {PunctureSpec{0.0, *cfg.n1, *cfg.n2}};
    else if (need_punctures)
        throw StructuralError("give --n1 and --n2, or --punctures file.json");
    if (cfg.tau)
        in.tau = resolve_tau(*cfg.tau);
    else if (file_tau)
    {
        in.tau = *file_tau;
        if (!(in.tau.imag() > 0.0))
            throw StructuralError("tau must have positive imaginary part");
    }
    else
        in.tau = cplx(0.0, 1.0);
    return in;
}

std::pair<int, int> single_pair(const Input &in)
{
    if (in.punctures.size() != 1 || in.punctures[0].p != 0.0)
        throw StructuralError("this command handles a single puncture at 0");
    return {in.punctures[0].n1, in.punctures[0].n2};
}

void require_format(const RunConfig &cfg, std::initializer_list<const char *> allowed)
{
    for (const char *f : allowed)
        if (cfg.format == f)
            return;
    throw StructuralError("format " + cfg.format + " is not available for " + cfg.command);
}

std::string census_csv(const CensusReport &r)
{
    std::ostringstream os;
    os << "B_re,B_im,D0_re,D0_im,D_re,D_im,multiplicity,is_even,degenerate,residual_norm\n";
    for (const auto &c : r.clusters)
    {
        const auto &x = c.center;
        os << num(x.B.real()) << ',' << num(x.B.imag()) << ',' << num(x.Dk[0].real()) << ','
           << num(x.Dk[0].imag()) << ',' << num(x.D.real()) << ',' << num(x.D.imag()) << ',' << c.multiplicity
           << ',' << (c.is_even ? 1 : 0) << ',' << (c.degenerate ? 1 : 0) << ',' << num(c.residual_norm) << '\n';
    }
    return os.str();
}

SolverConfig solver_config(const RunConfig &cfg)
{
    SolverConfig sc = cfg.solver;
    sc.seed = cfg.seed;
    if (cfg.tol)
        sc.accept_tol = *cfg.tol;
    return sc;
}

std::string cmd_invariants(const RunConfig &cfg)
{
    require_format(cfg, {"json"});
    Input in = resolve_input(cfg, false);
    auto ctx = compute_invariants({in.tau});
    ojson body = ctx.to_json();
    body["f343_residual"] = form_residual(ModularForm::F343, in.tau);
    body["delta_residual"] = form_residual(ModularForm::DELTA, in.tau);
    return dump_document("invariants", body);
}

std::string cmd_polys(const RunConfig &cfg)
{
    require_format(cfg, {"json", "text"});
    auto [n1, n2] = single_pair(resolve_input(cfg, true));
    auto sys = build_m0_system(n1, n2);
    if (cfg.format == "text")
        return "P01 = " + sys.P01.to_string() + "\nP02 = " + sys.P02.to_string() + "\nP03 = " + sys.P03.to_string() +
               "\n";
    return dump_document("polys", to_json(sys));
}

std::string cmd_even(const RunConfig &cfg)
{
    require_format(cfg, {"json", "csv"});
    Input in = resolve_input(cfg, true);
    auto [n1, n2] = single_pair(in);
    auto problem = single_puncture(in.tau, n1, n2);
    auto ctx = compute_invariants({in.tau});
    auto rep = solve_even(problem, ctx, cfg.tol.value_or(1e-12));
    if (cfg.format == "csv")
        return census_csv(rep);
    ojson body;
    body["poly"] = to_json(build_even_poly(n1, n2));
    body["census"] = to_json(rep);
    return dump_document("even", body);
}

std::string cmd_solve(const RunConfig &cfg)
{
    require_format(cfg, {"json", "csv"});
    Input in = resolve_input(cfg, true);
    single_pair(in);
    auto problem = derive_problem({in.tau}, in.punctures);
    auto ctx = compute_invariants({in.tau});
    auto rep = solve_m0(problem, ctx, solver_config(cfg));
    if (cfg.format == "csv")
        return census_csv(rep);
    return dump_document("census", to_json(rep));
}

std::string cmd_probe(const RunConfig &cfg)
{
    require_format(cfg, {"json", "csv"});
    auto [n1, n2] = single_pair(resolve_input(cfg, true));
    auto rep = solve_m0_polynomial(build_m0_system(n1, n2), 0.0, 0.0, solver_config(cfg));
    if (cfg.format == "csv")
        return census_csv(rep);
    ojson body = to_json(rep);
    bool only_trivial = true;
    for (const auto &c : rep.clusters)
        for (cplx v : {c.center.B, c.center.Dk[0], c.center.D})
            if (std::abs(v) > 1e-8)
                only_trivial = false;
    body["only_trivial_root"] = only_trivial;
    return dump_document("probe-degenerate", body);
}

std::string cmd_monodromy(const RunConfig &cfg)
{
    require_format(cfg, {"json"});
    Input in = resolve_input(cfg, true);
    auto problem = derive_problem({in.tau}, in.punctures);
    auto ctx = compute_invariants({in.tau});
    MonodromyConfig mc;
    if (cfg.tol)
        mc.rtol = *cfg.tol;

    std::vector<std::pair<ParamVec, bool>> todo;
    if (!cfg.params_file.empty())
    {
        ParamVec x = paramvec_from_json(read_json_file(cfg.params_file));
        bool even = x.D == 0.0;
        for (cplx d : x.Dk)
            even = even && d == 0.0;
        todo.push_back({x, even});
    }
    else
    {
        auto census = solve_m0(problem, ctx, solver_config(cfg));
        for (const auto &c : census.clusters)
            todo.push_back({c.center, c.is_even});
    }
    auto arr = ojson::array();
    for (const auto &[x, even] : todo)
    {
        ojson e;
        e["params"] = to_json(x);
        e["claimed_even"] = even;
        e["report"] = to_json(verify_params(problem, ctx, x, mc, even));
        arr.push_back(e);
    }
    ojson body;
    body["problem"] = to_json(problem);
    body["verifications"] = arr;
    return dump_document("monodromy", body);
}

std::string cmd_scan(const RunConfig &cfg)
{
    require_format(cfg, {"json", "csv"});
    Input in = resolve_input(cfg, true);
    if (cfg.nre < 1 || cfg.nim < 1)
        throw StructuralError("scan needs at least one point per direction");
    auto problem = derive_problem({in.tau}, in.punctures);
    auto grid = rectangle_grid(cfg.re0, cfg.re1, cfg.nre, cfg.im0, cfg.im1, cfg.nim);
    if (grid.empty())
        throw StructuralError("scan rectangle has no points with Im tau > 0");
    auto rows = scan_tau(problem, grid, solver_config(cfg));
    if (cfg.format == "csv")
        return scan_csv(rows);
    auto arr = ojson::array();
    for (const auto &r : rows)
    {
        ojson e;
        e["tau"] = cjson(r.tau);
        e["total"] = r.total;
        e["even"] = r.even;
        e["bound"] = r.bound;
        e["degenerate"] = r.degenerate;
        e["min_distance"] = std::isfinite(r.min_distance) ? ojson(r.min_distance) : ojson(nullptr);
        e["error"] = r.error;
        arr.push_back(e);
    }
    return dump_document("scan", ojson{{"rows", arr}});
}

} // namespace

std::optional<int> parse_args(int argc, const char *const *argv, RunConfig &cfg, std::ostream &out,
                              std::ostream &err)
{
    CLI::App app{"SU(3) Toda census on flat tori"};
    app.require_subcommand(1);
    std::string tau;
    int n1 = -1, n2 = -1;
    double tol = 0.0;
    for (const auto &[name, help] : commands)
    {
        CLI::App *sub = app.add_subcommand(name, help);
        sub->add_option("--tau", tau, "\"re,im\", i, rho or tau0");
        sub->add_option("--n1", n1);
        sub->add_option("--n2", n2);
        sub->add_option("--punctures", cfg.punctures_file, "JSON {tau, punctures: [{p_re, p_im, n1, n2}]}");
        sub->add_option("--seed", cfg.seed);
        sub->add_option("--tol", tol);
        sub->add_option("--out", cfg.out);
        sub->add_option("--format", cfg.format)->check(CLI::IsMember({"json", "csv", "text"}));
        if (name == "monodromy")
            sub->add_option("--params", cfg.params_file, "ParamVec JSON; default: every census root");
        if (name == "solve" || name == "monodromy" || name == "scan" || name == "probe-degenerate")
        {
            sub->add_option("--starts", cfg.solver.starts);
            sub->add_option("--max-iter", cfg.solver.max_iter);
            sub->add_option("--box-radius", cfg.solver.box_radius);
        }
        if (name == "scan")
        {
            sub->add_option("--re0", cfg.re0);
            sub->add_option("--re1", cfg.re1);
            sub->add_option("--nre", cfg.nre);
            sub->add_option("--im0", cfg.im0);
            sub->add_option("--im1", cfg.im1);
            sub->add_option("--nim", cfg.nim);
        }
    }
    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_bad_input;
    }
    for (auto *sub : app.get_subcommands())
    {
        cfg.command = sub->get_name();
        if (sub->count("--tau"))
            cfg.tau = tau;
        if (sub->count("--n1"))
            cfg.n1 = n1;
        if (sub->count("--n2"))
            cfg.n2 = n2;
        if (sub->count("--tol"))
            cfg.tol = tol;
    }
    return std::nullopt;
}

int run(const RunConfig &cfg, std::ostream &out, std::ostream &err)
{
    std::string text;
    try
    {
        if (cfg.command == "invariants")
            text = cmd_invariants(cfg);
        else if (cfg.command == "polys")
            text = cmd_polys(cfg);
        else if (cfg.command == "even")
            text = cmd_even(cfg);
        else if (cfg.command == "solve")
            text = cmd_solve(cfg);
        else if (cfg.command == "monodromy")
            text = cmd_monodromy(cfg);
        else if (cfg.command == "scan")
            text = cmd_scan(cfg);
        else if (cfg.command == "probe-degenerate")
            text = cmd_probe(cfg);
        else
            throw StructuralError("unknown command " + cfg.command);
    }
    catch (const CriticalCaseError &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_critical;
    }
    catch (const EvenNonexistenceError &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_even_nonexistence;
    }
    catch (const StructuralError &e)
    {
        err << "error: " << e.what() << '\n';
        return exit_bad_input;
    }
    catch (const Error &e)
    {
        err << "inconclusive: " << e.what() << '\n';
        return exit_inconclusive;
    }
    if (cfg.out.empty())
        out << text;
    else
    {
        std::ofstream f(cfg.out, std::ios::binary);
        f << text;
        if (!f)
        {
            err << "error: cannot write " << cfg.out << '\n';
            return exit_bad_input;
        }
    }
    return exit_ok;
}

} // namespace toda
