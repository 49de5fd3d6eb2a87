#ifndef TODA_POLYRING_HPP
#define TODA_POLYRING_HPP

#include <complex>
#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

namespace toda
{

using cplx = std::complex<double>;

// Ordered symbols with integer weights. Two polynomials can only be combined
// when their tables compare equal.
struct VarTable
{
    std::vector<std::string> names;
    std::vector<int> weights;

    VarTable() = default;
    VarTable(std::vector<std::string> n, std::vector<int> w);

    std::size_t size() const { return names.size(); }
    std::size_t index(const std::string &name) const;
    bool operator==(const VarTable &o) const = default;
};

// z-plane grading over {B, D0, D, g2, g3}
VarTable zplane_vars();
// x-plane grading over {B, g2, g3}
VarTable xplane_vars();
// {g2, g3} with weights 4, 6
VarTable invariant_vars();

using Exponent = std::vector<int>;

// sorts higher total degree first, then lexicographically larger first
struct GradedLexGreater
{
    bool operator()(const Exponent &a, const Exponent &b) const;
};

class WeightedPoly
{
public:
    using TermMap = std::map<Exponent, mpq_class, GradedLexGreater>;

    WeightedPoly() = default;
    explicit WeightedPoly(VarTable vars);

    static WeightedPoly constant(const VarTable &vars, const mpq_class &c);
    static WeightedPoly variable(const VarTable &vars, const std::string &name);
    static WeightedPoly monomial(const VarTable &vars, const Exponent &e, const mpq_class &c);

    const VarTable &vars() const { return vars_; }
    const TermMap &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    mpq_class coeff(const Exponent &e) const;
    int degree_in(std::size_t var) const;
    int total_degree() const;
    int term_weight(const Exponent &e) const;

    WeightedPoly &operator+=(const WeightedPoly &o);
    WeightedPoly &operator-=(const WeightedPoly &o);
    WeightedPoly &operator*=(const WeightedPoly &o);
    WeightedPoly &operator*=(const mpq_class &s);

    friend WeightedPoly operator+(WeightedPoly a, const WeightedPoly &b) { return a += b; }
    friend WeightedPoly operator-(WeightedPoly a, const WeightedPoly &b) { return a -= b; }
    friend WeightedPoly operator*(WeightedPoly a, const WeightedPoly &b) { return a *= b; }
    friend WeightedPoly operator*(WeightedPoly a, const mpq_class &s) { return a *= s; }
    friend WeightedPoly operator*(const mpq_class &s, WeightedPoly a) { return a *= s; }
    WeightedPoly operator-() const;

    bool operator==(const WeightedPoly &o) const;

    // fix variable `var` to a rational value; the table is kept
    WeightedPoly substitute(std::size_t var, const mpq_class &value) const;
    // re-express in another table; variables are matched by name
    WeightedPoly embed(const VarTable &target) const;

    // coefficients of var^k as polynomials in the remaining symbols
    std::vector<WeightedPoly> coefficients_in(std::size_t var) const;

    cplx eval(const std::vector<cplx> &values) const;
    cplx eval(const std::map<std::string, cplx> &assignment) const;

    std::string to_string() const;
    nlohmann::ordered_json to_json() const;
    static WeightedPoly from_json(const nlohmann::ordered_json &j);

private:
    void add_term(const Exponent &e, const mpq_class &c);
    void require_same(const WeightedPoly &o) const;

    VarTable vars_;
    TermMap terms_;
};

enum class PolyOp
{
    add,
    sub,
    mul,
    scale
};

WeightedPoly poly_arith(const WeightedPoly &a, const WeightedPoly &b, PolyOp op);
WeightedPoly poly_scale(const WeightedPoly &a, const mpq_class &s);
cplx poly_eval(const WeightedPoly &p, const std::map<std::string, cplx> &assignment);
bool check_homogeneous(const WeightedPoly &p, int w);

std::string rational_string(const mpq_class &q);
mpq_class parse_rational(const std::string &s);

} // namespace toda

#endif
