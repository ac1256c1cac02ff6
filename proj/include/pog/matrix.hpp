// Copyright 2026 The pogest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POG_MATRIX_HPP
#define POG_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace pog {

/// Dense row-major matrix of doubles.
class Matrix
{
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : mRows(rows), mCols(cols), mData(rows * cols, fill) { }
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : mRows(rows), mCols(cols), mData(std::move(data)) { }

    std::size_t rows() const { return mRows; }
    std::size_t cols() const { return mCols; }
    std::size_t size() const { return mData.size(); }

    double& operator()(std::size_t r, std::size_t c) { return mData[r * mCols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return mData[r * mCols + c]; }

    std::span<double> row(std::size_t r) { return {mData.data() + r * mCols, mCols}; }
    std::span<const double> row(std::size_t r) const { return {mData.data() + r * mCols, mCols}; }

    std::span<double> data() { return mData; }
    std::span<const double> data() const { return mData; }
    std::vector<double>& storage() { return mData; }
    const std::vector<double>& storage() const { return mData; }

    /* Resizes and zero-fills */
    void reset(std::size_t rows, std::size_t cols)
    {
        mRows = rows;
        mCols = cols;
        mData.assign(rows * cols, 0.0);
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t mRows = 0;
    std::size_t mCols = 0;
    std::vector<double> mData;
};

} // namespace pog

#endif // POG_MATRIX_HPP
