#ifndef TODA_JSONUTIL_HPP
#define TODA_JSONUTIL_HPP

#include <complex>

#include <json.hpp>

#include "toda/error.hpp"

namespace toda
{

using ojson = nlohmann::ordered_json;

inline ojson cjson(std::complex<double> z) { return ojson::array({z.real(), z.imag()}); }

inline std::complex<double> cparse(const ojson &j)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw StructuralError("expected complex number as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace toda

#endif
