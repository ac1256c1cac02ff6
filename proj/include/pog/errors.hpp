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

#ifndef POG_ERRORS_HPP
#define POG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pog {

// Precondition violations (bad dimensions, out-of-range arguments) throw
// std::invalid_argument. The two types below cover the remaining failure
// classes the command line distinguishes by exit code.

/* Malformed or missing data on disk, or data that disagrees with a config */
class DataError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/* Training diverged or produced a non-finite value */
class NumericError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

} // namespace pog

#endif // POG_ERRORS_HPP
