#ifndef TODA_JSON_IO_HPP
#define TODA_JSON_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "toda/apparency.hpp"
#include "toda/jsonutil.hpp"
#include "toda/monodromy.hpp"
#include "toda/solver.hpp"

namespace toda
{

inline constexpr const char *schema_tag = "toda-census/1";

std::string fraction_string(const mpq_class &q); // always "num/den"
ojson poly_json(const WeightedPoly &p);
ojson matrix_json(const Mat3 &M); // rows of [re, im] pairs

ojson to_json(const ProblemSpec &p);
ojson to_json(const ParamVec &x);
ojson to_json(const RootCluster &c);
ojson to_json(const CensusReport &r);
ojson to_json(const MonodromyReport &r);
ojson to_json(const ApparencySystemM0 &s);
ojson to_json(const EvenPoly &ep);

// {"A": [...], "Bk": [...], "B": z, "Dk": [...], "D": z} or the flat array (A.., Bk.., B, Dk.., D)
ParamVec paramvec_from_json(const ojson &j);
// {"tau": ..., "punctures": [{"p_re": x, "p_im": y, "n1": int, "n2": int}, ...]};
// "p": [re, im] is accepted as well, and so is the bare array
std::vector<PunctureSpec> punctures_from_json(const ojson &j);
// tau as [re, im] or a string accepted by parse_tau
std::optional<cplx> tau_from_json(const ojson &j);

// {"schema": ..., <body>} serialized with a trailing newline
std::string dump_document(const std::string &kind, const ojson &body);

} // namespace toda

#endif
