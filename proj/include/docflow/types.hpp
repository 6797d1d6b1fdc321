#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace docflow {

// Row-major so that one document / token position is one contiguous row.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXr = RowMatrix<double>;
using VectorXr = Vector<double>;
using MatrixXf32 = RowMatrix<float>;

using TokenId = std::int32_t;

/// Caller broke a documented precondition (bad argument, invalid config value).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data is malformed or inconsistent (schema errors, duplicate ids, coverage gaps).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or unknown configuration entries.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace docflow
