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


#ifndef POG_TESTS_SUPPORT_HPP
#define POG_TESTS_SUPPORT_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "pog/grid.hpp"
#include "pog/matrix.hpp"
#include "pog/rng.hpp"

namespace pog::test {

inline GridConfig small_grid(std::size_t rows, std::size_t cols, double cell = 1.0)
{
    GridConfig g;
    g.rows = rows;
    g.cols = cols;
    g.cell_length = cell;
    g.cell_width = cell;
    return g;
}

// Mix of exact zeros, exact levels and arbitrary probabilities, so the set and
// band logic sees every kind of cell.
inline std::vector<double> random_probs(std::size_t n, Rng& rng)
{
    std::vector<double> v(n);
    for (auto& p : v) {
        const double u = rng.uniform();
        if (u < 0.45) {
            p = 0.0;
        } else if (u < 0.65) {
            p = kQuantizedLevels[rng.below(kLevelCount)];
        } else {
            p = rng.uniform();
        }
    }
    return v;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                            double hi = 1.0)
{
    Matrix m(rows, cols);
    for (auto& v : m.storage()) {
        v = rng.uniform(lo, hi);
    }
    return m;
}

inline std::vector<double> random_vector(std::size_t n, Rng& rng, double lo = -1.0,
                                         double hi = 1.0)
{
    std::vector<double> v(n);
    for (auto& x : v) {
        x = rng.uniform(lo, hi);
    }
    return v;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir
{
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        mPath = std::filesystem::temp_directory_path() /
                ("pogtest_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::remove_all(mPath);
        std::filesystem::create_directories(mPath);
    }
    ~TempDir() { std::filesystem::remove_all(mPath); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return mPath; }
    std::filesystem::path operator/(const std::string& name) const { return mPath / name; }

private:
    std::filesystem::path mPath;
};

} // namespace pog::test

#endif // POG_TESTS_SUPPORT_HPP
