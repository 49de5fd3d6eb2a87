#include "toda/polyring.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "toda/error.hpp"

namespace toda
{

VarTable::VarTable(std::vector<std::string> n, std::vector<int> w) : names(std::move(n)), weights(std::move(w))
{
    if (names.size() != weights.size())
        throw StructuralError("variable table: names and weights differ in length");
}

std::size_t VarTable::index(const std::string &name) const
{
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        throw StructuralError("unknown variable " + name);
    return static_cast<std::size_t>(it - names.begin());
}

VarTable zplane_vars() { return VarTable({"B", "D0", "D", "g2", "g3"}, {2, 1, 3, 4, 6}); }
VarTable xplane_vars() { return VarTable({"B", "g2", "g3"}, {1, 2, 3}); }
VarTable invariant_vars() { return VarTable({"g2", "g3"}, {4, 6}); }

bool GradedLexGreater::operator()(const Exponent &a, const Exponent &b) const
{
    int da = std::accumulate(a.begin(), a.end(), 0);
    int db = std::accumulate(b.begin(), b.end(), 0);
    if (da != db)
        return da > db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

WeightedPoly::WeightedPoly(VarTable vars) : vars_(std::move(vars)) {}

WeightedPoly WeightedPoly::constant(const VarTable &vars, const mpq_class &c)
{
    WeightedPoly p(vars);
    p.add_term(Exponent(vars.size(), 0), c);
    return p;
}

WeightedPoly WeightedPoly::variable(const VarTable &vars, const std::string &name)
{
    Exponent e(vars.size(), 0);
    e[vars.index(name)] = 1;
    return monomial(vars, e, 1);
}

WeightedPoly WeightedPoly::monomial(const VarTable &vars, const Exponent &e, const mpq_class &c)
{
    if (e.size() != vars.size())
        throw StructuralError("exponent length does not match variable table");
    WeightedPoly p(vars);
    p.add_term(e, c);
    return p;
}

void WeightedPoly::add_term(const Exponent &e, const mpq_class &c0)
{
    mpq_class c = c0;
    c.canonicalize();
    if (c == 0)
        return;
    auto it = terms_.find(e);
    if (it == terms_.end())
    {
        terms_.emplace(e, c);
        return;
    }
    it->second += c;
    if (it->second == 0)
        terms_.erase(it);
}

void WeightedPoly::require_same(const WeightedPoly &o) const
{
    if (!(vars_ == o.vars_))
        throw StructuralError("polynomials have different variable tables");
}

mpq_class WeightedPoly::coeff(const Exponent &e) const
{
    auto it = terms_.find(e);
    return it == terms_.end() ? mpq_class(0) : it->second;
}

int WeightedPoly::degree_in(std::size_t var) const
{
    int d = -1;
    for (const auto &[e, c] : terms_)
        d = std::max(d, e[var]);
    return d;
}

int WeightedPoly::total_degree() const
{
    if (terms_.empty())
        return -1;
    const auto &e = terms_.begin()->first;
    return std::accumulate(e.begin(), e.end(), 0);
}

int WeightedPoly::term_weight(const Exponent &e) const
{
    int w = 0;
    for (std::size_t i = 0; i < e.size(); ++i)
        w += e[i] * vars_.weights[i];
    return w;
}

WeightedPoly &WeightedPoly::operator+=(const WeightedPoly &o)
{
    require_same(o);
    for (const auto &[e, c] : o.terms_)
        add_term(e, c);
    return *this;
}

WeightedPoly &WeightedPoly::operator-=(const WeightedPoly &o)
{
    require_same(o);
    for (const auto &[e, c] : o.terms_)
        add_term(e, -c);
    return *this;
}

WeightedPoly &WeightedPoly::operator*=(const WeightedPoly &o)
{
    require_same(o);
    WeightedPoly r(vars_);
    Exponent e(vars_.size());
    for (const auto &[ea, ca] : terms_)
        for (const auto &[eb, cb] : o.terms_)
        {
            for (std::size_t i = 0; i < e.size(); ++i)
                e[i] = ea[i] + eb[i];
            r.add_term(e, ca * cb);
        }
    terms_ = std::move(r.terms_);
    return *this;
}

WeightedPoly &WeightedPoly::operator*=(const mpq_class &s)
{
    if (s == 0)
    {
        terms_.clear();
        return *this;
    }
    mpq_class f = s;
    f.canonicalize();
    for (auto &[e, c] : terms_)
        c *= f;
    return *this;
}

WeightedPoly WeightedPoly::operator-() const
{
    WeightedPoly r = *this;
    for (auto &[e, c] : r.terms_)
        c = -c;
    return r;
}

bool WeightedPoly::operator==(const WeightedPoly &o) const { return vars_ == o.vars_ && terms_ == o.terms_; }

WeightedPoly WeightedPoly::substitute(std::size_t var, const mpq_class &value) const
{
    if (var >= vars_.size())
        throw StructuralError("substitute: variable index out of range");
    WeightedPoly r(vars_);
    for (const auto &[e, c] : terms_)
    {
        mpq_class f = c;
        for (int k = 0; k < e[var]; ++k)
            f *= value;
        Exponent e2 = e;
        e2[var] = 0;
        r.add_term(e2, f);
    }
    return r;
}

WeightedPoly WeightedPoly::embed(const VarTable &target) const
{
    std::vector<std::size_t> map(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i)
        map[i] = target.index(vars_.names[i]);
    WeightedPoly r(target);
    for (const auto &[e, c] : terms_)
    {
        Exponent e2(target.size(), 0);
        for (std::size_t i = 0; i < e.size(); ++i)
            e2[map[i]] = e[i];
        r.add_term(e2, c);
    }
    return r;
}

std::vector<WeightedPoly> WeightedPoly::coefficients_in(std::size_t var) const
{
    int d = degree_in(var);
    std::vector<WeightedPoly> out(std::max(d + 1, 1), WeightedPoly(vars_));
    for (const auto &[e, c] : terms_)
    {
        Exponent e2 = e;
        e2[var] = 0;
        out[e[var]].add_term(e2, c);
    }
    return out;
}

cplx WeightedPoly::eval(const std::vector<cplx> &values) const
{
    if (values.size() != vars_.size())
        throw StructuralError("eval: wrong number of values");
    std::vector<std::vector<cplx>> pw(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i)
    {
        int d = std::max(degree_in(i), 0);
        pw[i].resize(d + 1);
        pw[i][0] = 1.0;
        for (int k = 1; k <= d; ++k)
            pw[i][k] = pw[i][k - 1] * values[i];
    }
    cplx s = 0.0;
    for (const auto &[e, c] : terms_)
    {
        cplx t = c.get_d();
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i])
                t *= pw[i][e[i]];
        s += t;
    }
    return s;
}

cplx WeightedPoly::eval(const std::map<std::string, cplx> &assignment) const
{
    std::vector<cplx> v(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i)
    {
        auto it = assignment.find(vars_.names[i]);
        if (it == assignment.end())
            throw StructuralError("missing assignment for " + vars_.names[i]);
        v[i] = it->second;
    }
    return eval(v);
}

std::string rational_string(const mpq_class &q)
{
    mpq_class c = q;
    c.canonicalize();
    if (c.get_den() == 1)
        return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

mpq_class parse_rational(const std::string &s)
{
    try
    {
        mpq_class q(s, 10);
        q.canonicalize();
        return q;
    }
    catch (const std::invalid_argument &)
    {
        throw StructuralError("bad rational: " + s);
    }
}

std::string WeightedPoly::to_string() const
{
    if (terms_.empty())
        return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto &[e, c] : terms_)
    {
        mpq_class a = abs(c);
        bool unit = (a == 1);
        bool is_const = std::all_of(e.begin(), e.end(), [](int k) { return k == 0; });
        if (first)
            os << (c < 0 ? "-" : "");
        else
            os << (c < 0 ? " - " : " + ");
        first = false;
        bool need_star = false;
        if (!unit || is_const)
        {
            os << rational_string(a);
            need_star = true;
        }
        for (std::size_t i = 0; i < e.size(); ++i)
        {
            if (!e[i])
                continue;
            if (need_star)
                os << "*";
            os << vars_.names[i];
            if (e[i] > 1)
                os << "^" << e[i];
            need_star = true;
        }
    }
    return os.str();
}

nlohmann::ordered_json WeightedPoly::to_json() const
{
    nlohmann::ordered_json j;
    j["vars"] = vars_.names;
    j["weights"] = vars_.weights;
    auto terms = nlohmann::ordered_json::array();
    for (const auto &[e, c] : terms_)
    {
        nlohmann::ordered_json t;
        t["exp"] = e;
        t["num"] = c.get_num().get_str();
        t["den"] = c.get_den().get_str();
        terms.push_back(t);
    }
    j["terms"] = terms;
    return j;
}

WeightedPoly WeightedPoly::from_json(const nlohmann::ordered_json &j)
{
    try
    {
        VarTable vt(j.at("vars").get<std::vector<std::string>>(), j.at("weights").get<std::vector<int>>());
        WeightedPoly p(vt);
        for (const auto &t : j.at("terms"))
        {
            Exponent e = t.at("exp").get<Exponent>();
            if (e.size() != vt.size())
                throw StructuralError("term exponent length mismatch");
            mpq_class c(mpz_class(t.at("num").get<std::string>()), mpz_class(t.at("den").get<std::string>()));
            c.canonicalize();
            p.add_term(e, c);
        }
        return p;
    }
    catch (const nlohmann::json::exception &ex)
    {
        throw StructuralError(std::string("polynomial json: ") + ex.what());
    }
}

WeightedPoly poly_arith(const WeightedPoly &a, const WeightedPoly &b, PolyOp op)
{
    switch (op)
    {
    case PolyOp::add:
        return a + b;
    case PolyOp::sub:
        return a - b;
    case PolyOp::mul:
        return a * b;
    case PolyOp::scale:
        break;
    }
    throw StructuralError("poly_arith: use poly_scale for scaling");
}

WeightedPoly poly_scale(const WeightedPoly &a, const mpq_class &s) { return a * s; }

cplx poly_eval(const WeightedPoly &p, const std::map<std::string, cplx> &assignment) { return p.eval(assignment); }

bool check_homogeneous(const WeightedPoly &p, int w)
{
    for (const auto &[e, c] : p.terms())
        if (p.term_weight(e) != w)
            return false;
    return true;
}

} // namespace toda
