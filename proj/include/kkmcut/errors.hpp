#pragma once

#include <stdexcept>
#include <string>

namespace kkmcut {

/// Base of every error thrown by the library. Precondition violations and
/// malformed inputs are exceptions; certified outcomes (infeasibility,
/// uncovered points, exhausted budgets) are returned as values.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NegativeCoordinate : public Error {
public:
    using Error::Error;
};

class SumNotOne : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

class ResolutionZero : public Error {
public:
    ResolutionZero() : Error("lattice resolution must be at least 1") {}
};

class TooLarge : public Error {
public:
    using Error::Error;
};

class MissingWeights : public Error {
public:
    MissingWeights() : Error("hypergraph carries no edge weights") {}
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

} // namespace kkmcut
