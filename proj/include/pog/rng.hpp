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

#ifndef POG_RNG_HPP
#define POG_RNG_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <vector>

namespace pog {

/// Seeded random stream.
///
/// The engine (mt19937_64) and seed_seq are fully specified by the standard, but
/// the std:: distributions are not, so the conversions to uniform/normal
/// variates are done here. Every stream is derived from a base seed plus a list
/// of stream ids (scenario index, tree index, cell coordinates, ...), which keeps
/// results independent of how work is scheduled across threads.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : Rng(seed, {}) { }

    Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream)
    {
        std::vector<std::uint32_t> words;
        words.reserve(2 + 2 * stream.size());
        auto push = [&words](std::uint64_t v) {
            words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
            words.push_back(static_cast<std::uint32_t>(v >> 32));
        };
        push(seed);
        for (auto id : stream) {
            push(id);
        }
        std::seed_seq seq(words.begin(), words.end());
        mEngine.seed(seq);
    }

    std::uint64_t next() { return mEngine(); }

    /* Uniform double in [0, 1) with 53 random bits */
    double uniform()
    { return static_cast<double>(mEngine() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /* Standard normal variate (Box-Muller, one value per call) */
    double normal()
    {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    /* Uniform integer in [0, n), rejection sampling to avoid modulo bias */
    std::size_t below(std::size_t n)
    {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v = mEngine();
        while (v >= limit) {
            v = mEngine();
        }
        return static_cast<std::size_t>(v % bound);
    }

    bool coin() { return (mEngine() >> 63) != 0; }

    template <typename T>
    void shuffle(std::vector<T>& items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

private:
    std::mt19937_64 mEngine;
};

} // namespace pog

#endif // POG_RNG_HPP
