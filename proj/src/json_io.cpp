#include "toda/json_io.hpp"

#include <limits>

namespace toda
{

namespace
{

ojson finite_or_null(double v)
{
    if (std::isfinite(v))
        return v;
    return nullptr;
}

ojson cvec(const std::vector<cplx> &v)
{
    auto a = ojson::array();
    for (cplx z : v)
        a.push_back(cjson(z));
    return a;
}

std::vector<cplx> cvec_parse(const ojson &j)
{
    if (!j.is_array())
        throw StructuralError("expected an array of complex numbers");
    std::vector<cplx> out;
    for (const auto &e : j)
        out.push_back(cparse(e));
    return out;
}

ojson solver_config_json(const SolverConfig &c)
{
    ojson j;
    j["box_radius"] = c.box_radius;
    j["starts"] = c.starts;
    j["max_iter"] = c.max_iter;
    j["max_doublings"] = c.max_doublings;
    j["accept_tol"] = c.accept_tol;
    j["even_tol"] = c.even_tol;
    j["merge_tol"] = c.merge_tol;
    j["degenerate_tol"] = c.degenerate_tol;
    j["seed"] = c.seed;
    return j;
}

} // namespace

std::string fraction_string(const mpq_class &q) { return q.get_num().get_str() + "/" + q.get_den().get_str(); }

ojson poly_json(const WeightedPoly &p)
{
    ojson j;
    j["text"] = p.to_string();
    ojson raw = p.to_json();
    j["vars"] = raw["vars"];
    j["weights"] = raw["weights"];
    auto terms = ojson::array();
    for (const auto &[e, c] : p.terms())
        terms.push_back(ojson{{"exp", e}, {"coef", fraction_string(c)}});
    j["terms"] = terms;
    return j;
}

ojson matrix_json(const Mat3 &M)
{
    auto rows = ojson::array();
    for (int i = 0; i < 3; ++i)
    {
        auto r = ojson::array();
        for (int k = 0; k < 3; ++k)
            r.push_back(cjson(M(i, k)));
        rows.push_back(r);
    }
    return rows;
}

ojson to_json(const ProblemSpec &p)
{
    ojson j;
    j["tau"] = cjson(p.lattice.tau);
    auto pk = ojson::array();
    for (const auto &d : p.punctures)
    {
        ojson e;
        e["p"] = cjson(d.spec.p);
        e["n1"] = d.spec.n1;
        e["n2"] = d.spec.n2;
        e["gamma1"] = fraction_string(d.gamma1);
        e["gamma2"] = fraction_string(d.gamma2);
        e["alpha"] = fraction_string(d.alpha);
        e["beta"] = fraction_string(d.beta);
        pk.push_back(e);
    }
    j["punctures"] = pk;
    j["N1"] = p.N1;
    j["N2"] = p.N2;
    j["critical"] = p.critical;
    j["epsilon"] = cjson(p.epsilon);
    return j;
}

ojson to_json(const ParamVec &x)
{
    ojson j;
    j["A"] = cvec(x.A);
    j["Bk"] = cvec(x.Bk);
    j["B"] = cjson(x.B);
    j["Dk"] = cvec(x.Dk);
    j["D"] = cjson(x.D);
    return j;
}

ojson to_json(const RootCluster &c)
{
    ojson j;
    j["params"] = to_json(c.center);
    j["multiplicity"] = c.multiplicity;
    j["members"] = c.members;
    j["residual_norm"] = c.residual_norm;
    j["is_even"] = c.is_even;
    j["degenerate"] = c.degenerate;
    j["sigma_ratio"] = c.sigma_ratio;
    j["last_step_ratio"] = finite_or_null(c.last_step_ratio);
    j["quadratic_tail"] = c.quadratic_tail;
    return j;
}

ojson to_json(const CensusReport &r)
{
    ojson j;
    j["route"] = r.route;
    j["problem"] = to_json(r.problem);
    j["g2"] = cjson(r.g2);
    j["g3"] = cjson(r.g3);
    j["counts"] = ojson{{"total", r.total}, {"even", r.even}, {"bound", r.bound}};
    auto cl = ojson::array();
    for (const auto &c : r.clusters)
        cl.push_back(to_json(c));
    j["roots"] = cl;
    j["reached_bound"] = r.reached_bound;
    if (r.route != "even")
    {
        j["config"] = solver_config_json(r.cfg);
        j["box_radius_used"] = r.box_radius_used;
        j["starts_used"] = r.starts_used;
        j["rounds"] = r.rounds;
    }
    if (!r.note.empty())
        j["note"] = r.note;
    return j;
}

ojson to_json(const MonodromyReport &r)
{
    ojson j;
    j["q0"] = cjson(r.q0);
    j["rtol"] = r.rtol;
    j["N1"] = matrix_json(r.N1);
    j["N2"] = matrix_json(r.N2);
    auto loc = ojson::array();
    for (const auto &M : r.local)
        loc.push_back(matrix_json(M));
    j["local"] = loc;
    j["local_residual"] = r.local_residual;
    j["epsilon"] = cjson(r.epsilon);
    j["eps_residual"] = r.eps_residual;
    j["det_residual"] = r.det_residual;
    j["N1_eigenvalues"] = ojson::array({cjson(r.N1_eigen[0]), cjson(r.N1_eigen[1]), cjson(r.N1_eigen[2])});
    j["eigen_residual"] = r.eigen_residual;
    j["unitarizable"] = r.unitarizable;
    j["H"] = r.H ? matrix_json(*r.H) : ojson(nullptr);
    if (r.unitarizable)
    {
        j["G"] = matrix_json(r.G);
        j["N1_normal"] = matrix_json(r.N1u);
        j["N2_normal"] = matrix_json(r.N2u);
        j["normal_form_N1"] = r.normal_form_N1;
        j["normal_form_N2"] = r.normal_form_N2;
    }
    j["pde_residual"] = r.pde_residual ? ojson(*r.pde_residual) : ojson(nullptr);
    j["even_residual"] = r.even_residual ? ojson(*r.even_residual) : ojson(nullptr);
    j["notes"] = r.notes;
    return j;
}

ojson to_json(const ApparencySystemM0 &s)
{
    ojson j;
    j["n1"] = s.n1;
    j["n2"] = s.n2;
    j["P01"] = poly_json(s.P01);
    j["P02"] = poly_json(s.P02);
    j["P03"] = poly_json(s.P03);
    return j;
}

ojson to_json(const EvenPoly &ep)
{
    ojson j;
    j["n1"] = ep.n1;
    j["n2"] = ep.n2;
    j["Ne"] = ep.Ne;
    j["P"] = poly_json(ep.P);
    auto c = ojson::array();
    for (const auto &p : ep.C)
        c.push_back(poly_json(p));
    j["C"] = c;
    return j;
}

ParamVec paramvec_from_json(const ojson &j)
{
    try
    {
        if (j.is_array())
            return ParamVec::unflatten(cvec_parse(j));
        ParamVec x;
        x.A = cvec_parse(j.at("A"));
        x.Bk = cvec_parse(j.at("Bk"));
        x.Dk = cvec_parse(j.at("Dk"));
        x.B = cparse(j.at("B"));
        x.D = cparse(j.at("D"));
        if (x.Bk.size() != x.A.size() || x.Dk.size() != x.A.size() || x.A.empty())
            throw StructuralError("parameter arrays have different lengths");
        return x;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw StructuralError(std::string("bad parameter JSON: ") + e.what());
    }
}

std::vector<PunctureSpec> punctures_from_json(const ojson &j)
{
    try
    {
        const ojson &arr = j.is_object() ? j.at("punctures") : j;
        if (!arr.is_array() || arr.empty())
            throw StructuralError("punctures must be a non-empty array");
        std::vector<PunctureSpec> out;
        for (const auto &e : arr)
        {
            PunctureSpec s;
            if (e.contains("p"))
                s.p = cparse(e.at("p"));
            else
                s.p = {e.value("p_re", 0.0), e.value("p_im", 0.0)};
            s.n1 = e.at("n1").get<int>();
            s.n2 = e.at("n2").get<int>();
            out.push_back(s);
        }
        return out;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw StructuralError(std::string("bad puncture JSON: ") + e.what());
    }
}

std::optional<cplx> tau_from_json(const ojson &j)
{
    if (!j.is_object() || !j.contains("tau"))
        return std::nullopt;
    const ojson &t = j.at("tau");
    if (t.is_string())
        return parse_tau(t.get<std::string>());
    return cparse(t);
}

std::string dump_document(const std::string &kind, const ojson &body)
{
    ojson doc;
    doc["schema"] = schema_tag;
    doc["kind"] = kind;
    for (auto it = body.begin(); it != body.end(); ++it)
        doc[it.key()] = it.value();
    return doc.dump(2) + "\n";
}

} // namespace toda
