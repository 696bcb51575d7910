#pragma once
//
// Matrix storage: compressed-row sparse matrices for the tall input A and
// row-major dense matrices (Eigen) for sketches, factors and Gram matrices.
//

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "errors.hpp"

namespace lspack {

using index_t     = std::int64_t;
using col_index_t = std::int32_t;

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector      = Eigen::VectorXd;

struct Triplet {
    index_t row;
    index_t col;
    double  value;
};

// One row of a SparseMatrix: parallel spans of column indices and values.
struct SparseRow {
    std::span<const col_index_t> cols;
    std::span<const double>      vals;

    std::size_t size() const { return cols.size(); }
};

//
// Compressed sparse row matrix. Immutable after construction; the
// constructor validates offsets, per-row strictly increasing column indices
// and the absence of explicit zeros.
//
class SparseMatrix {
public:
    SparseMatrix() : row_offsets_(1, 0) {}

    SparseMatrix(index_t rows, index_t cols,
                 std::vector<index_t> row_offsets,
                 std::vector<col_index_t> col_indices,
                 std::vector<double> values)
        : rows_(rows), cols_(cols),
          row_offsets_(std::move(row_offsets)),
          col_indices_(std::move(col_indices)),
          values_(std::move(values)) {
        validate();
    }

    // Duplicates are summed; zeros (explicit or from cancellation) dropped.
    static SparseMatrix from_triplets(index_t rows, index_t cols, std::vector<Triplet> entries) {
        for (const auto & t : entries) {
            if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
                throw usage_error("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                                  ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
        }
        std::sort(entries.begin(), entries.end(), [](const Triplet & a, const Triplet & b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });

        std::vector<index_t>     offsets(static_cast<std::size_t>(rows) + 1, 0);
        std::vector<col_index_t> colidx;
        std::vector<double>      vals;
        colidx.reserve(entries.size());
        vals.reserve(entries.size());

        for (std::size_t i = 0; i < entries.size();) {
            std::size_t j   = i;
            double      sum = 0.0;
            for (; j < entries.size() && entries[j].row == entries[i].row && entries[j].col == entries[i].col; ++j)
                sum += entries[j].value;
            if (sum != 0.0) {
                colidx.push_back(static_cast<col_index_t>(entries[i].col));
                vals.push_back(sum);
                ++offsets[static_cast<std::size_t>(entries[i].row) + 1];
            }
            i = j;
        }
        std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
        return SparseMatrix(rows, cols, std::move(offsets), std::move(colidx), std::move(vals));
    }

    template <typename Derived>
    static SparseMatrix from_dense(const Eigen::MatrixBase<Derived> & M) {
        const index_t            rows = M.rows(), cols = M.cols();
        std::vector<index_t>     offsets(static_cast<std::size_t>(rows) + 1, 0);
        std::vector<col_index_t> colidx;
        std::vector<double>      vals;
        for (index_t i = 0; i < rows; ++i) {
            for (index_t j = 0; j < cols; ++j) {
                const double v = M(i, j);
                if (v != 0.0) {
                    colidx.push_back(static_cast<col_index_t>(j));
                    vals.push_back(v);
                }
            }
            offsets[static_cast<std::size_t>(i) + 1] = static_cast<index_t>(vals.size());
        }
        return SparseMatrix(rows, cols, std::move(offsets), std::move(colidx), std::move(vals));
    }

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }
    index_t nnz() const { return row_offsets_.back(); }

    std::span<const index_t>     row_offsets() const { return row_offsets_; }
    std::span<const col_index_t> col_indices() const { return col_indices_; }
    std::span<const double>      values() const { return values_; }

    index_t row_nnz(index_t i) const { return row_offsets_[i + 1] - row_offsets_[i]; }

    SparseRow row(index_t i) const {
        const auto b = static_cast<std::size_t>(row_offsets_[i]);
        const auto n = static_cast<std::size_t>(row_offsets_[i + 1] - row_offsets_[i]);
        return {std::span<const col_index_t>(col_indices_).subspan(b, n),
                std::span<const double>(values_).subspan(b, n)};
    }

    DenseMatrix to_dense() const {
        DenseMatrix D = DenseMatrix::Zero(rows_, cols_);
        for (index_t i = 0; i < rows_; ++i) {
            const auto r = row(i);
            for (std::size_t p = 0; p < r.size(); ++p)
                D(i, r.cols[p]) = r.vals[p];
        }
        return D;
    }

    // Column-oriented access for the sparse QR path goes through this.
    SparseMatrix transpose() const {
        std::vector<index_t> offsets(static_cast<std::size_t>(cols_) + 1, 0);
        for (auto c : col_indices_)
            ++offsets[static_cast<std::size_t>(c) + 1];
        std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());

        std::vector<index_t>     fill(offsets.begin(), offsets.end() - 1);
        std::vector<col_index_t> colidx(col_indices_.size());
        std::vector<double>      vals(values_.size());
        for (index_t i = 0; i < rows_; ++i) {
            for (index_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
                const auto dst = static_cast<std::size_t>(fill[col_indices_[p]]++);
                colidx[dst]    = static_cast<col_index_t>(i);
                vals[dst]      = values_[p];
            }
        }
        return SparseMatrix(cols_, rows_, std::move(offsets), std::move(colidx), std::move(vals));
    }

    friend bool operator==(const SparseMatrix &, const SparseMatrix &) = default;

private:
    void validate() const {
        if (rows_ < 0 || cols_ < 0)
            throw usage_error("negative matrix dimensions");
        if (cols_ > std::numeric_limits<col_index_t>::max())
            throw usage_error("column count exceeds index range");
        if (row_offsets_.size() != static_cast<std::size_t>(rows_) + 1 || row_offsets_.front() != 0)
            throw usage_error("row_offsets must have n_rows+1 entries starting at 0");
        if (col_indices_.size() != values_.size() ||
            static_cast<std::size_t>(row_offsets_.back()) != values_.size())
            throw usage_error("row_offsets[n_rows] must equal nnz");
        for (index_t i = 0; i < rows_; ++i) {
            if (row_offsets_[i + 1] < row_offsets_[i])
                throw usage_error("row_offsets must be non-decreasing");
        }
        for (index_t i = 0; i < rows_; ++i) {
            for (index_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
                const auto c = col_indices_[p];
                if (c < 0 || c >= cols_)
                    throw usage_error("column index out of range in row " + std::to_string(i));
                if (p > row_offsets_[i] && col_indices_[p - 1] >= c)
                    throw usage_error("column indices not strictly increasing in row " + std::to_string(i));
                if (values_[p] == 0.0)
                    throw usage_error("explicit zero stored in row " + std::to_string(i));
            }
        }
    }

    index_t                  rows_ = 0;
    index_t                  cols_ = 0;
    std::vector<index_t>     row_offsets_;
    std::vector<col_index_t> col_indices_;
    std::vector<double>      values_;
};

// nnz2(A) = sum over rows of nnz(A_i,:)^2, the cost measure of the Gram and
// row-norm kernels.
inline index_t nnz2(const SparseMatrix & A) {
    index_t total = 0;
    for (index_t i = 0; i < A.rows(); ++i) {
        const index_t k = A.row_nnz(i);
        total += k * k;
    }
    return total;
}

// A_{:,K}, columns in the order given by K.
inline SparseMatrix select_columns(const SparseMatrix & A, std::span<const index_t> K) {
    std::vector<index_t> position(static_cast<std::size_t>(A.cols()), -1);
    for (std::size_t j = 0; j < K.size(); ++j) {
        const index_t c = K[j];
        if (c < 0 || c >= A.cols())
            throw usage_error("column index " + std::to_string(c) + " out of range");
        if (position[c] != -1)
            throw usage_error("duplicate column index " + std::to_string(c));
        position[c] = static_cast<index_t>(j);
    }

    std::vector<index_t>     offsets(static_cast<std::size_t>(A.rows()) + 1, 0);
    std::vector<col_index_t> colidx;
    std::vector<double>      vals;
    std::vector<std::pair<col_index_t, double>> buf;
    for (index_t i = 0; i < A.rows(); ++i) {
        const auto r = A.row(i);
        buf.clear();
        for (std::size_t p = 0; p < r.size(); ++p) {
            if (const index_t pos = position[r.cols[p]]; pos >= 0)
                buf.emplace_back(static_cast<col_index_t>(pos), r.vals[p]);
        }
        std::sort(buf.begin(), buf.end(), [](const auto & a, const auto & b) { return a.first < b.first; });
        for (const auto & [c, v] : buf) {
            colidx.push_back(c);
            vals.push_back(v);
        }
        offsets[static_cast<std::size_t>(i) + 1] = static_cast<index_t>(vals.size());
    }
    return SparseMatrix(A.rows(), static_cast<index_t>(K.size()), std::move(offsets), std::move(colidx), std::move(vals));
}

//
// Prescribed singular spectrum for the synthetic generators: strictly
// positive, sorted non-increasing.
//
class SpectrumSpec {
public:
    SpectrumSpec() = default;

    explicit SpectrumSpec(std::vector<double> singular_values) : values_(std::move(singular_values)) {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!(values_[i] > 0.0))
                throw usage_error("spectrum values must be strictly positive");
            if (i > 0 && values_[i] > values_[i - 1])
                throw usage_error("spectrum values must be sorted non-increasing");
        }
    }

    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double condition_number() const { return values_.empty() ? 1.0 : values_.front() / values_.back(); }

private:
    std::vector<double> values_;
};

} // namespace lspack
