#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "error.hpp"

namespace polydg {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Accumulates (row, col, value) triplets in insertion order. seal() compresses
/// them, summing duplicates in that order, so an identical deposit sequence always
/// yields a bit-identical matrix.
class TripletBuilder
{
public:
    TripletBuilder(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols) {}

    void add(Eigen::Index i, Eigen::Index j, double v) { triplets_.emplace_back(i, j, v); }

    /// Deposits a dense block at (row0, col0), skipping exact zeros.
    template <typename Derived>
    void add_block(Eigen::Index row0, Eigen::Index col0, const Eigen::MatrixBase<Derived>& block,
                   double factor = 1.0)
    {
        for (Eigen::Index j = 0; j < block.cols(); ++j)
            for (Eigen::Index i = 0; i < block.rows(); ++i) {
                const double v = block(i, j);
                if (v != 0.0)
                    triplets_.emplace_back(row0 + i, col0 + j, factor * v);
            }
    }

    void reserve(std::size_t n) { triplets_.reserve(n); }
    std::size_t size() const { return triplets_.size(); }

    SparseMatrix seal() const
    {
        SparseMatrix m(rows_, cols_);
        m.setFromTriplets(triplets_.begin(), triplets_.end());
        m.makeCompressed();
        return m;
    }

private:
    Eigen::Index rows_, cols_;
    std::vector<Eigen::Triplet<double>> triplets_;
};

inline double max_abs(const SparseMatrix& a)
{
    double m = 0.0;
    for (Eigen::Index k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

/// ‖A − Aᵀ‖_max / ‖A‖_max (0 for the zero matrix).
inline double symmetry_defect(const SparseMatrix& a)
{
    const double norm = max_abs(a);
    if (norm == 0.0)
        return 0.0;
    const SparseMatrix d = a - SparseMatrix(a.transpose());
    return max_abs(d) / norm;
}

/// ‖A − B‖_F / ‖B‖_F
inline double relative_frobenius(const SparseMatrix& a, const SparseMatrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ValidationError("relative_frobenius: dimension mismatch");
    const double nb = b.norm();
    const double nd = (a - b).norm();
    return nb == 0.0 ? nd : nd / nb;
}

/// Places `block` at (row0, col0) inside a builder; used for block composition.
inline void add_sparse_block(TripletBuilder& out, Eigen::Index row0, Eigen::Index col0,
                             const SparseMatrix& block, double factor = 1.0)
{
    for (Eigen::Index k = 0; k < block.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(block, k); it; ++it)
            out.add(row0 + it.row(), col0 + it.col(), factor * it.value());
}

inline SparseMatrix diagonal_matrix(const Vector& d)
{
    SparseMatrix m(d.size(), d.size());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(d.size()));
    for (Eigen::Index i = 0; i < d.size(); ++i)
        t.emplace_back(i, i, d(i));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

} // namespace polydg
