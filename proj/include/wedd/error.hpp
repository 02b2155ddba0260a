#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wedd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand dimensions do not conform.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold for the inputs.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Two independent characterizations of the same fact disagreed.
///
/// This signals a miscalibrated tolerance or an ill-conditioned input,
/// never a legitimate answer.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Jacobi sweeps exhausted without reaching orthogonality.
class ConvergenceError : public Error {
public:
    ConvergenceError(std::size_t sweeps, double off_diagonal)
        : Error("svd: no convergence after " + std::to_string(sweeps) +
                " sweeps, relative off-diagonal residual " + std::to_string(off_diagonal)),
          sweeps_(sweeps), off_diagonal_(off_diagonal) {}

    std::size_t sweeps() const noexcept { return sweeps_; }
    double off_diagonal() const noexcept { return off_diagonal_; }

private:
    std::size_t sweeps_;
    double off_diagonal_;
};

/// rank(Y^T A X) is smaller than rank(A), so the exact factorization does not apply.
class RankDeficiencyError : public PreconditionError {
public:
    RankDeficiencyError(std::size_t rank_core, std::size_t rank_a)
        : PreconditionError("rank(Y^T A X) = " + std::to_string(rank_core) +
                            " differs from rank(A) = " + std::to_string(rank_a) +
                            "; use generalized_reduce instead"),
          rank_core_(rank_core), rank_a_(rank_a) {}

    std::size_t rank_core() const noexcept { return rank_core_; }
    std::size_t rank_a() const noexcept { return rank_a_; }

private:
    std::size_t rank_core_;
    std::size_t rank_a_;
};

/// Malformed matrix file. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

} // namespace wedd
