#pragma once

#include <stdexcept>
#include <string>

namespace tradenet {

// Base class for errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A statistic or index has no defined value on the given input
// (empty layer, zero variance, too few nodes, ...).
class UndefinedStatistic : public Error {
public:
    using Error::Error;
};

// Malformed input data: a CSV that cannot be parsed, an inconsistent
// partition, a layer that does not match its network.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Estimation failures in the binary-response models.
class EstimationError : public Error {
public:
    using Error::Error;
};

class SeparationError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class RankDeficiencyError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

}  // namespace tradenet
