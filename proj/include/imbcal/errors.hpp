#pragma once

#include <stdexcept>
#include <string>

namespace imbcal {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Input with a single class, too few minority rows, or otherwise unusable.
class DegenerateInputError : public Error
{
public:
    using Error::Error;
};

class DomainError : public Error
{
public:
    using Error::Error;
};

class DimensionError : public Error
{
public:
    using Error::Error;
};

class NonConvergenceError : public Error
{
public:
    using Error::Error;
};

// A metric is not defined for the given data (e.g. AUROC with one class).
class UndefinedMetricError : public Error
{
public:
    using Error::Error;
};

class ConfigurationError : public Error
{
public:
    using Error::Error;
};

class SolverError : public Error
{
public:
    SolverError(const std::string& what, double best_objective)
        : Error(what + " (best objective " + std::to_string(best_objective) + ")"),
          best_objective_(best_objective)
    {}

    double best_objective() const noexcept { return best_objective_; }

private:
    double best_objective_;
};

// CSV or configuration ingestion failure; the message names the row/column.
class IngestionError : public Error
{
public:
    using Error::Error;
};

} // namespace imbcal
