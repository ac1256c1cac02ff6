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


#ifndef POG_SCENARIO_IO_HPP
#define POG_SCENARIO_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "pog/scenario.hpp"

namespace pog {

/// JSON scenario documents, the import path for externally authored scenes.
///
///     {
///       "version": 1,
///       "seed": 7,
///       "layout": {"kind": "four-way-open", "extent": [40, 40], "lane_width": 3.5},
///       "hypotheses": {"count": 3, "horizon": 1.0, "dt": 0.1},
///       "participants": [
///         {"id": 0, "kind": "ego", "pose": [2.5, 0, 0], "velocity": 5,
///          "accel": [0, 0], "footprint": [4.0, 1.8],
///          "hypotheses": [{"maneuver": "straight", "probability": 1.0}]}
///       ]
///     }
///
/// Participants without a "hypotheses" list get generate_hypotheses() with the
/// document's settings. Lane markings are rebuilt from the layout kind.
Scenario parse_scenario(std::string_view text, const std::string& source = "<memory>");
std::string dump_scenario(const Scenario& scenario, const HypothesisSettings& settings);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const HypothesisSettings& settings,
                   const std::filesystem::path& path);

} // namespace pog

#endif // POG_SCENARIO_IO_HPP
