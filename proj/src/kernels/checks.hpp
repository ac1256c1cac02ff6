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

#ifndef POG_SRC_KERNELS_CHECKS_HPP
#define POG_SRC_KERNELS_CHECKS_HPP

#include <string>

#include "pog/errors.hpp"
#include "pog/kernels.hpp"

namespace pog::kernels::detail {

inline void check_matmul(std::size_t ar, std::size_t ac, std::size_t br, std::size_t bc,
                         std::size_t lhs_inner, std::size_t rhs_inner)
{
    require(lhs_inner == rhs_inner,
            "matmul shape mismatch: " + std::to_string(ar) + "x" + std::to_string(ac) +
                " vs " + std::to_string(br) + "x" + std::to_string(bc));
}

inline void check_conv(const ConvShape& s, std::size_t input, std::size_t kernel,
                       std::size_t bias, std::size_t output, std::size_t batch)
{
    require(s.stride >= 1 && s.kernel_h >= 1 && s.kernel_w >= 1, "invalid conv geometry");
    require(input == s.input_size() * batch, "conv input size mismatch");
    require(kernel == s.kernel_size(), "conv kernel size mismatch");
    require(bias == 0 || bias == s.out_channels, "conv bias size mismatch");
    require(output == s.output_size() * batch, "conv output size mismatch");
}

} // namespace pog::kernels::detail

#endif // POG_SRC_KERNELS_CHECKS_HPP
