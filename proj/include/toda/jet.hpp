#ifndef TODA_JET_HPP
#define TODA_JET_HPP

#include <complex>
#include <vector>

namespace toda
{

// First-order forward-mode dual number over complex values. An empty
// gradient stands for a constant.
struct Jet
{
    using cplx = std::complex<double>;

    cplx v;
    std::vector<cplx> d;

    Jet() : v(0.0) {}
    Jet(cplx value) : v(value) {}
    Jet(double value) : v(value) {}

    static Jet variable(cplx value, std::size_t index, std::size_t n)
    {
        Jet j(value);
        j.d.assign(n, cplx(0.0));
        j.d[index] = 1.0;
        return j;
    }

    Jet &operator+=(const Jet &o)
    {
        v += o.v;
        axpy(1.0, o.d);
        return *this;
    }
    Jet &operator-=(const Jet &o)
    {
        v -= o.v;
        axpy(-1.0, o.d);
        return *this;
    }
    Jet &operator*=(cplx s)
    {
        v *= s;
        for (auto &x : d)
            x *= s;
        return *this;
    }
    Jet &operator*=(double s) { return *this *= cplx(s); }
    Jet &operator*=(const Jet &o)
    {
        // d(v w) = w dv + v dw
        for (auto &x : d)
            x *= o.v;
        axpy(v, o.d);
        v *= o.v;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet &b) { return a += b; }
    friend Jet operator-(Jet a, const Jet &b) { return a -= b; }
    friend Jet operator*(Jet a, const Jet &b) { return a *= b; }
    friend Jet operator*(Jet a, cplx s) { return a *= s; }
    friend Jet operator*(cplx s, Jet a) { return a *= s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator/(Jet a, cplx s) { return a *= (1.0 / s); }
    Jet operator-() const
    {
        Jet r = *this;
        r *= -1.0;
        return r;
    }

private:
    void axpy(cplx s, const std::vector<cplx> &o)
    {
        if (o.empty())
            return;
        if (d.empty())
            d.assign(o.size(), cplx(0.0));
        for (std::size_t i = 0; i < o.size(); ++i)
            d[i] += s * o[i];
    }
};

inline std::complex<double> value_of(const std::complex<double> &x) { return x; }
inline std::complex<double> value_of(const Jet &x) { return x.v; }

} // namespace toda

#endif
