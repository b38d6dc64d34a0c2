#pragma once

#include <cstdint>
#include <memory>

#include "tfwi/types.hpp"

namespace tfwi {

/// Sparse LU factorization of one impedance matrix. Solves reuse the numeric
/// factors; refactorize() keeps the symbolic analysis when the sparsity
/// pattern is unchanged. One solve at a time per handle.
class Factorization {
public:
    explicit Factorization(SparseMatrix matrix);
    ~Factorization();
    Factorization(Factorization&&) noexcept;
    Factorization& operator=(Factorization&&) noexcept;

    [[nodiscard]] Eigen::Index dimension() const;
    [[nodiscard]] const SparseMatrix& matrix() const;

    [[nodiscard]] ComplexVector solve(const ComplexVector& rhs) const;

    /// Replaces the matrix; returns true when the symbolic analysis was reused.
    bool refactorize(SparseMatrix matrix);

private:
    // The LU object refers to the matrix storage, so both live on the heap.
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Factorization factorize(SparseMatrix matrix);
ComplexVector solve(const Factorization& factorization, const ComplexVector& rhs);

/// Numeric factorizations performed by this process so far.
std::uint64_t numeric_factorization_count();

/// ||L x - b|| / ||b|| (0 for b = 0 and x = 0).
double relative_residual(const SparseMatrix& matrix, const ComplexVector& x, const ComplexVector& rhs);

}  // namespace tfwi
