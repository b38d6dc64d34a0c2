#include "tfwi/solver.hpp"

#include <Eigen/UmfPackSupport>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

#include "tfwi/error.hpp"

namespace tfwi {

namespace {

std::atomic<std::uint64_t> factorization_counter{0};

bool same_pattern(const SparseMatrix& a, const SparseMatrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) {
        return false;
    }
    const auto outer = static_cast<std::size_t>(a.outerSize() + 1);
    const auto nnz = static_cast<std::size_t>(a.nonZeros());
    return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + outer, b.outerIndexPtr()) &&
           std::equal(a.innerIndexPtr(), a.innerIndexPtr() + nnz, b.innerIndexPtr());
}

/// Throws for rows or columns without a single nonzero entry.
void check_structure(const SparseMatrix& m)
{
    if (m.rows() != m.cols()) {
        throw Error(ErrorCode::dimension_mismatch, "impedance matrix is not square");
    }
    std::vector<char> row_used(static_cast<std::size_t>(m.rows()), 0);
    for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
        bool column_used = false;
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
            if (it.value() != Complex{0.0, 0.0}) {
                column_used = true;
                row_used[static_cast<std::size_t>(it.row())] = 1;
            }
        }
        if (!column_used) {
            throw Error(ErrorCode::singular_matrix, "matrix is singular: column " + std::to_string(c) + " is zero");
        }
    }
    for (std::size_t r = 0; r < row_used.size(); ++r) {
        if (row_used[r] == 0) {
            throw Error(ErrorCode::singular_matrix, "matrix is singular: row " + std::to_string(r) + " is zero");
        }
    }
}

std::string pivot_diagnostics(const SparseMatrix& m)
{
    double smallest = std::numeric_limits<double>::infinity();
    double largest = 0.0;
    Eigen::Index where = -1;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double d = std::abs(m.coeff(i, i));
        if (d < smallest) {
            smallest = d;
            where = i;
        }
        largest = std::max(largest, d);
    }
    std::ostringstream msg;
    msg << "numerically singular matrix (n = " << m.rows() << "); smallest diagonal |L_ii| = " << smallest
        << " at row " << where << ", largest = " << largest;
    return msg.str();
}

}  // namespace

struct Factorization::Impl {
    SparseMatrix matrix;
    Eigen::UmfPackLU<SparseMatrix> lu;
};

Factorization::Factorization(SparseMatrix matrix) : impl_(std::make_unique<Impl>())
{
    impl_->matrix = std::move(matrix);
    auto& matrix_ = impl_->matrix;
    matrix_.makeCompressed();
    check_structure(matrix_);
    impl_->lu.analyzePattern(matrix_);
    if (impl_->lu.info() != Eigen::Success) {
        throw Error(ErrorCode::singular_matrix, "symbolic analysis failed (n = " + std::to_string(matrix_.rows()) + ")");
    }
    impl_->lu.factorize(matrix_);
    ++factorization_counter;
    if (impl_->lu.info() != Eigen::Success) {
        throw Error(ErrorCode::singular_matrix, pivot_diagnostics(matrix_));
    }
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Eigen::Index Factorization::dimension() const { return impl_->matrix.rows(); }
const SparseMatrix& Factorization::matrix() const { return impl_->matrix; }

bool Factorization::refactorize(SparseMatrix matrix)
{
    matrix.makeCompressed();
    check_structure(matrix);
    auto& matrix_ = impl_->matrix;
    const bool reuse = same_pattern(matrix, matrix_);
    matrix_ = std::move(matrix);
    if (!reuse) {
        impl_->lu.analyzePattern(matrix_);
    }
    impl_->lu.factorize(matrix_);
    ++factorization_counter;
    if (impl_->lu.info() != Eigen::Success) {
        throw Error(ErrorCode::singular_matrix, pivot_diagnostics(matrix_));
    }
    return reuse;
}

ComplexVector Factorization::solve(const ComplexVector& rhs) const
{
    const auto& matrix_ = impl_->matrix;
    if (rhs.size() != matrix_.rows()) {
        std::ostringstream msg;
        msg << "right-hand side has length " << rhs.size() << ", expected " << matrix_.rows();
        throw Error(ErrorCode::dimension_mismatch, msg.str());
    }
    if (rhs.isZero(0.0)) {
        return ComplexVector::Zero(rhs.size());
    }
    ComplexVector x = impl_->lu.solve(rhs);
#ifndef NDEBUG
    const double residual = relative_residual(matrix_, x, rhs);
    if (!(residual <= 1e-8)) {
        throw Error(ErrorCode::singular_matrix, "solve residual " + std::to_string(residual) + " exceeds 1e-8");
    }
#endif
    return x;
}

Factorization factorize(SparseMatrix matrix) { return Factorization(std::move(matrix)); }

ComplexVector solve(const Factorization& factorization, const ComplexVector& rhs) { return factorization.solve(rhs); }

std::uint64_t numeric_factorization_count() { return factorization_counter.load(); }

double relative_residual(const SparseMatrix& matrix, const ComplexVector& x, const ComplexVector& rhs)
{
    const double norm = rhs.norm();
    const double r = (matrix * x - rhs).norm();
    return norm > 0.0 ? r / norm : r;
}

}  // namespace tfwi
