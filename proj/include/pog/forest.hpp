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


#ifndef POG_FOREST_HPP
#define POG_FOREST_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pog/grid.hpp"
#include "pog/matrix.hpp"

namespace pog {

enum class ForestTask : std::uint8_t { classification, regression };

struct ForestParams
{
    std::size_t n_trees = 50;
    std::size_t mtry = 0;              // 0: ceil(sqrt(d))
    std::size_t max_depth = 0;         // 0: unlimited
    std::size_t min_samples_leaf = 1;
    bool bootstrap = true;
    std::uint64_t rng_seed = 1;

    void validate() const;
    std::size_t effective_mtry(std::size_t n_features) const;
};

/// Decision tree stored in pre-order; node 0 is the root and a split's left
/// child always follows it directly.
struct DecisionTree
{
    struct Node
    {
        std::int32_t feature = -1;     // -1 marks a leaf
        double threshold = 0.0;        // x[feature] <= threshold goes left
        std::uint32_t right = 0;       // index of the right child
        double value = 0.0;            // regression leaf mean
        std::uint32_t counts = 0;      // classification leaf: offset into leaf_counts
    };

    std::vector<Node> nodes;
    std::vector<std::uint32_t> leaf_counts;  // n_classes entries per classification leaf

    const Node& leaf_for(std::span<const double> x) const;
};

struct RandomForest
{
    ForestTask task = ForestTask::classification;
    std::size_t n_features = 0;
    std::size_t n_classes = 0;         // classification only
    ForestParams params;
    std::vector<DecisionTree> trees;
};

struct ForestDiagnostics
{
    // Out-of-bag accuracy (classification) or mean squared error (regression),
    // over the samples that were out of bag for at least one tree.
    double oob_score = 0.0;
    std::size_t oob_samples = 0;
};

/// Rows of X are samples. For classification y holds class indices 0..C-1.
/// Trees are grown in parallel, tree t seeded from (params.rng_seed, t).
RandomForest train_forest(const Matrix& x, std::span<const double> y, ForestTask task,
                          const ForestParams& params, ForestDiagnostics* diagnostics = nullptr);

/* Class voted by one tree: its leaf's majority, ties toward the lower class */
std::size_t tree_vote(const RandomForest& forest, const DecisionTree& tree,
                      std::span<const double> x);

/* Majority vote over trees, ties toward the lower class */
std::size_t predict_class(const RandomForest& forest, std::span<const double> x);
double predict_regression(const RandomForest& forest, std::span<const double> x);

/// One classification forest per POG cell over the six quantized levels.
struct CellForests
{
    GridConfig grid;
    std::vector<RandomForest> forests;  // row-major

    QuantizedPog predict(std::span<const double> latent, double t_pred) const;
};

CellForests train_percell_forests(const Matrix& latents, const std::vector<QuantizedPog>& pogs,
                                  const ForestParams& params);

/* One regression forest per output latent dimension */
std::vector<RandomForest> train_perlatent_forests(const Matrix& latents_in,
                                                  const Matrix& latents_out,
                                                  const ForestParams& params);

std::vector<double> predict_latents(const std::vector<RandomForest>& forests,
                                    std::span<const double> latent);

std::vector<std::uint8_t> encode_forest(const RandomForest& forest);
RandomForest decode_forest(std::vector<std::uint8_t> bytes, const std::string& source = "<memory>");

void save_cell_forests(const CellForests& forests, const std::filesystem::path& path);
CellForests load_cell_forests(const std::filesystem::path& path);
void save_forest_list(const std::vector<RandomForest>& forests, const std::filesystem::path& path);
std::vector<RandomForest> load_forest_list(const std::filesystem::path& path);

} // namespace pog

#endif // POG_FOREST_HPP
