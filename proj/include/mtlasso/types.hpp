#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtlasso {

// All dense storage is Eigen's default column-major layout.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// A p x T coefficient matrix (B*, B-hat, or an iterate). Row j holds the
// coefficients of covariate j across all tasks.
using CoefficientMatrix = Matrix;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: wrong dimensions, non-finite entries, out of domain.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A numerical procedure could not produce a trustworthy result
/// (failed factorization, singular system, degenerate scale).
class NumericError : public Error {
public:
    using Error::Error;
};

/// An iterative solver ran out of iterations. Carries the last iterate.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, Matrix last_iterate, double kkt_residual, int iterations)
        : NumericError(what),
          last_iterate_(std::move(last_iterate)),
          kkt_residual_(kkt_residual),
          iterations_(iterations) {}

    const Matrix& last_iterate() const noexcept { return last_iterate_; }
    double kkt_residual() const noexcept { return kkt_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    Matrix last_iterate_;
    double kkt_residual_;
    int iterations_;
};

/// Observed inputs of the multi-task model Y = X B* + E.
/// x is n x p, y is n x T. Immutable after construction.
class ProblemData {
public:
    ProblemData(Matrix x, Matrix y);

    const Matrix& x() const noexcept { return x_; }
    const Matrix& y() const noexcept { return y_; }
    Index n() const noexcept { return x_.rows(); }
    Index p() const noexcept { return x_.cols(); }
    Index tasks() const noexcept { return y_.cols(); }

    /// The single-task problem (X, y^(t)).
    ProblemData task(Index t) const;

private:
    Matrix x_;
    Matrix y_;
};

/// Penalty configuration. lambda is the level used by the solver; the
/// remaining fields are the inputs of the default rule that produced it.
struct RegularizationSpec {
    double lambda = 0.0;
    double eta1 = 0.0;
    double eta2 = 0.0;
    Index sparsity_guess_s = 1;
    double sigma = 1.0;

    void validate() const;
};

/// Direction a in R^p and task vector b in R^T of a linear functional a^T B* b.
struct InferenceTarget {
    Vector direction_a;
    Vector task_vector_b;

    void validate(Index p, Index tasks) const;
};

bool all_finite(const Matrix& m);

}  // namespace mtlasso
