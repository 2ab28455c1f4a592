#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "slimtsf/error.hpp"

namespace slimtsf {

/// Dense column-major feature matrix (rows = instances, cols = features).
/// Column-major keeps the per-feature scans of the split search contiguous.
class DataMatrix {
public:
    DataMatrix() = default;
    DataMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static DataMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        DataMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != m.cols_) {
                throw Error(ErrorKind::DimensionMismatch, "ragged row in matrix construction");
            }
            for (std::size_t c = 0; c < m.cols_; ++c) m(r, c) = rows[r][c];
        }
        return m;
    }

    double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }

    std::span<const double> col(std::size_t c) const {
        return {data_.data() + c * rows_, rows_};
    }

    std::vector<double> row(std::size_t r) const {
        std::vector<double> out(cols_);
        for (std::size_t c = 0; c < cols_; ++c) out[c] = (*this)(r, c);
        return out;
    }

    /// New matrix holding the given rows, in order (duplicates allowed).
    DataMatrix select_rows(std::span<const std::size_t> indices) const {
        DataMatrix out(indices.size(), cols_);
        for (std::size_t c = 0; c < cols_; ++c) {
            const double* src = data_.data() + c * rows_;
            double* dst = out.data_.data() + c * indices.size();
            for (std::size_t i = 0; i < indices.size(); ++i) dst[i] = src[indices[i]];
        }
        return out;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace slimtsf
