#ifndef TODA_ERROR_HPP
#define TODA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace toda
{

// Base of every failure signal raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Malformed input: mismatched variable tables, missing assignments,
// coincident punctures, bad JSON and so on.
class StructuralError : public Error
{
public:
    using Error::Error;
};

// N1 == N2 (mod 3): the a priori estimates fail and census commands refuse.
class CriticalCaseError : public Error
{
public:
    using Error::Error;
};

// Both n1 and n2 odd: the one-puncture system has no even solutions.
class EvenNonexistenceError : public Error
{
public:
    using Error::Error;
};

// A defining series did not converge, or a value came out non-finite.
class EvaluationFailure : public Error
{
public:
    using Error::Error;
};

class NearPoleError : public Error
{
public:
    NearPoleError(const std::string &what, int pole_order, double distance)
        : Error(what), pole_order_(pole_order), distance_(distance)
    {
    }
    int pole_order() const noexcept { return pole_order_; }
    double distance() const noexcept { return distance_; }

private:
    int pole_order_;
    double distance_;
};

class NoZeroFound : public Error
{
public:
    using Error::Error;
};

// Numerical search finished without a verdict. Never means "proved empty".
class InconclusiveError : public Error
{
public:
    using Error::Error;
};

// Analytic continuation could not be carried out along the requested path.
class PathTooCloseError : public Error
{
public:
    PathTooCloseError(const std::string &what, double distance)
        : Error(what), distance_(distance)
    {
    }
    double distance() const noexcept { return distance_; }

private:
    double distance_;
};

class NotUnitarizableError : public Error
{
public:
    using Error::Error;
};

} // namespace toda

#endif
