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


#include "pog/forest.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "pog/binary_io.hpp"
#include "pog/errors.hpp"
#include "pog/rng.hpp"

namespace pog {

namespace {

constexpr char kForestMagic[] = "POGF";
constexpr char kCellForestMagic[] = "PGCF";
constexpr char kForestListMagic[] = "PGFL";
constexpr std::uint16_t kForestVersion = 1;

struct Split
{
    bool found = false;
    double score = 0.0;
    std::size_t feature = 0;
    double threshold = 0.0;

    bool improves(double s, std::size_t f, double t) const
    {
        if (!found || s < score) {
            return true;
        }
        return s == score && (f < feature || (f == feature && t < threshold));
    }
};

class TreeBuilder
{
public:
    TreeBuilder(const Matrix& x, std::span<const double> y, ForestTask task, std::size_t n_classes,
                const ForestParams& params, Rng& rng)
        : mX(x), mY(y), mTask(task), mClasses(n_classes), mParams(params),
          mMtry(params.effective_mtry(x.cols())), mRng(rng), mFeatures(x.cols())
    {
        for (std::size_t f = 0; f < mFeatures.size(); ++f) {
            mFeatures[f] = f;
        }
    }

    DecisionTree grow(std::vector<std::size_t> samples)
    {
        mIdx = std::move(samples);
        build(0, mIdx.size(), 0);
        return std::move(mTree);
    }

private:
    std::uint32_t build(std::size_t lo, std::size_t hi, std::size_t depth)
    {
        const auto self = static_cast<std::uint32_t>(mTree.nodes.size());
        mTree.nodes.emplace_back();
        const std::size_t n = hi - lo;

        const bool depth_capped = mParams.max_depth != 0 && depth >= mParams.max_depth;
        if (pure(lo, hi) || depth_capped || n < 2 * mParams.min_samples_leaf) {
            make_leaf(self, lo, hi);
            return self;
        }
        const Split best = find_split(lo, hi);
        if (!best.found) {
            make_leaf(self, lo, hi);
            return self;
        }
        const auto mid_it = std::partition(
            mIdx.begin() + static_cast<std::ptrdiff_t>(lo), mIdx.begin() + static_cast<std::ptrdiff_t>(hi),
            [&](std::size_t s) { return mX(s, best.feature) <= best.threshold; });
        const auto mid = static_cast<std::size_t>(mid_it - mIdx.begin());
        mTree.nodes[self].feature = static_cast<std::int32_t>(best.feature);
        mTree.nodes[self].threshold = best.threshold;
        build(lo, mid, depth + 1);
        const std::uint32_t right = build(mid, hi, depth + 1);
        mTree.nodes[self].right = right;
        return self;
    }

    bool pure(std::size_t lo, std::size_t hi) const
    {
        const double first = mY[mIdx[lo]];
        for (std::size_t k = lo + 1; k < hi; ++k) {
            if (mY[mIdx[k]] != first) {
                return false;
            }
        }
        return true;
    }

    void make_leaf(std::uint32_t node, std::size_t lo, std::size_t hi)
    {
        auto& leaf = mTree.nodes[node];
        leaf.feature = -1;
        if (mTask == ForestTask::classification) {
            leaf.counts = static_cast<std::uint32_t>(mTree.leaf_counts.size());
            mTree.leaf_counts.resize(mTree.leaf_counts.size() + mClasses, 0);
            for (std::size_t k = lo; k < hi; ++k) {
                ++mTree.leaf_counts[leaf.counts + static_cast<std::size_t>(mY[mIdx[k]])];
            }
        } else {
            double sum = 0.0;
            for (std::size_t k = lo; k < hi; ++k) {
                sum += mY[mIdx[k]];
            }
            leaf.value = sum / static_cast<double>(hi - lo);
        }
    }

    Split find_split(std::size_t lo, std::size_t hi)
    {
        Split best;
        std::size_t tried = 0;
        const std::size_t d = mFeatures.size();
        for (std::size_t k = 0; k < d && tried < mMtry; ++k) {
            std::swap(mFeatures[k], mFeatures[k + mRng.below(d - k)]);
            if (evaluate(mFeatures[k], lo, hi, best)) {
                ++tried;
            }
        }
        return best;
    }

    // Scans every threshold of one feature; false when the feature is constant here.
    bool evaluate(std::size_t f, std::size_t lo, std::size_t hi, Split& best)
    {
        const std::size_t n = hi - lo;
        mScratch.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t s = mIdx[lo + k];
            mScratch[k] = {mX(s, f), mY[s]};
        }
        std::sort(mScratch.begin(), mScratch.end());
        if (mScratch.front().first == mScratch.back().first) {
            return false;
        }

        const std::size_t min_leaf = mParams.min_samples_leaf;
        if (mTask == ForestTask::classification) {
            mLeft.assign(mClasses, 0.0);
            mRight.assign(mClasses, 0.0);
            for (const auto& [v, t] : mScratch) {
                mRight[static_cast<std::size_t>(t)] += 1.0;
            }
        }
        double sum_left = 0.0;
        double sum_right = 0.0;
        if (mTask == ForestTask::regression) {
            for (const auto& [v, t] : mScratch) {
                sum_right += t;
            }
        }

        for (std::size_t k = 0; k + 1 < n; ++k) {
            const double t = mScratch[k].second;
            if (mTask == ForestTask::classification) {
                mLeft[static_cast<std::size_t>(t)] += 1.0;
                mRight[static_cast<std::size_t>(t)] -= 1.0;
            } else {
                sum_left += t;
                sum_right -= t;
            }
            const double a = mScratch[k].first;
            const double b = mScratch[k + 1].first;
            const std::size_t n_left = k + 1;
            if (a == b || n_left < min_leaf || n - n_left < min_leaf) {
                continue;
            }
            const double nl = static_cast<double>(n_left);
            const double nr = static_cast<double>(n - n_left);
            double score = 0.0;
            if (mTask == ForestTask::classification) {
                // Size-weighted Gini impurity of the two children.
                double sq_left = 0.0;
                double sq_right = 0.0;
                for (std::size_t c = 0; c < mClasses; ++c) {
                    sq_left += mLeft[c] * mLeft[c];
                    sq_right += mRight[c] * mRight[c];
                }
                score = (nl - sq_left / nl) + (nr - sq_right / nr);
            } else {
                score = -(sum_left * sum_left / nl + sum_right * sum_right / nr);
            }
            double threshold = a + 0.5 * (b - a);
            if (!(threshold < b)) {
                threshold = a;
            }
            if (best.improves(score, f, threshold)) {
                best = {true, score, f, threshold};
            }
        }
        return true;
    }

    const Matrix& mX;
    std::span<const double> mY;
    ForestTask mTask;
    std::size_t mClasses;
    const ForestParams& mParams;
    std::size_t mMtry;
    Rng& mRng;
    std::vector<std::size_t> mFeatures;
    std::vector<std::size_t> mIdx;
    std::vector<std::pair<double, double>> mScratch;
    std::vector<double> mLeft;
    std::vector<double> mRight;
    DecisionTree mTree;
};

void check_input(const RandomForest& forest, std::span<const double> x)
{
    require(x.size() == forest.n_features, "forest expects " + std::to_string(forest.n_features) +
                                               " features, got " + std::to_string(x.size()));
    require(!forest.trees.empty(), "forest has no trees");
}

std::size_t argmax_low(std::span<const std::uint32_t> counts)
{
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best]) {
            best = c;
        }
    }
    return best;
}

// Runs body(k) for k in [0, n) in parallel; the first failure by index is rethrown.
template <typename F>
void parallel_units(std::size_t n, F&& body)
{
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long kl = 0; kl < static_cast<long>(n); ++kl) {
        try {
            body(static_cast<std::size_t>(kl));
        } catch (...) {
            errors[static_cast<std::size_t>(kl)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

void write_blob(io::ByteWriter& w, const std::vector<std::uint8_t>& blob)
{
    w.u64(blob.size());
    w.bytes(std::string_view(reinterpret_cast<const char*>(blob.data()), blob.size()));
}

std::vector<std::uint8_t> read_blob(io::ByteReader& r)
{
    const std::uint64_t size = r.u64();
    if (size > r.remaining()) {
        r.fail("forest record larger than the file");
    }
    std::vector<std::uint8_t> blob(size);
    for (auto& b : blob) {
        b = r.u8();
    }
    return blob;
}

void write_tree(io::ByteWriter& w, const RandomForest& forest, const DecisionTree& tree,
                std::uint32_t node)
{
    const auto& n = tree.nodes[node];
    if (n.feature < 0) {
        w.u8(1);
        if (forest.task == ForestTask::regression) {
            w.f64(n.value);
        } else {
            for (std::size_t c = 0; c < forest.n_classes; ++c) {
                w.u32(tree.leaf_counts[n.counts + c]);
            }
        }
        return;
    }
    w.u8(0);
    w.u32(static_cast<std::uint32_t>(n.feature));
    w.f64(n.threshold);
    write_tree(w, forest, tree, node + 1);
    write_tree(w, forest, tree, n.right);
}

std::uint32_t read_tree(io::ByteReader& r, const RandomForest& forest, DecisionTree& tree,
                        std::size_t depth)
{
    if (depth > 100000) {
        r.fail("tree too deep");
    }
    const auto self = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const std::uint8_t leaf = r.u8();
    if (leaf == 1) {
        tree.nodes[self].feature = -1;
        if (forest.task == ForestTask::regression) {
            tree.nodes[self].value = r.f64();
        } else {
            tree.nodes[self].counts = static_cast<std::uint32_t>(tree.leaf_counts.size());
            for (std::size_t c = 0; c < forest.n_classes; ++c) {
                tree.leaf_counts.push_back(r.u32());
            }
        }
        return self;
    }
    if (leaf != 0) {
        r.fail("invalid tree node tag");
    }
    const std::uint32_t feature = r.u32();
    if (feature >= forest.n_features) {
        r.fail("split feature out of range");
    }
    const double threshold = r.f64();
    if (!std::isfinite(threshold)) {
        r.fail("non-finite split threshold");
    }
    tree.nodes[self].feature = static_cast<std::int32_t>(feature);
    tree.nodes[self].threshold = threshold;
    read_tree(r, forest, tree, depth + 1);
    const std::uint32_t right = read_tree(r, forest, tree, depth + 1);
    tree.nodes[self].right = right;
    return self;
}

} // namespace

void ForestParams::validate() const
{
    require(n_trees >= 1, "forest needs at least one tree");
    require(min_samples_leaf >= 1, "min_samples_leaf must be >= 1");
}

std::size_t ForestParams::effective_mtry(std::size_t n_features) const
{
    if (mtry == 0) {
        return std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features)))));
    }
    require(mtry <= n_features, "mtry (" + std::to_string(mtry) + ") exceeds the feature count (" +
                                    std::to_string(n_features) + ")");
    return mtry;
}

const DecisionTree::Node& DecisionTree::leaf_for(std::span<const double> x) const
{
    std::uint32_t k = 0;
    while (nodes[k].feature >= 0) {
        const auto& n = nodes[k];
        k = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? k + 1 : n.right;
    }
    return nodes[k];
}

RandomForest train_forest(const Matrix& x, std::span<const double> y, ForestTask task,
                          const ForestParams& params, ForestDiagnostics* diagnostics)
{
    params.validate();
    require(x.rows() >= 1 && x.cols() >= 1, "forest training needs at least one sample");
    require(y.size() == x.rows(), "target count does not match the sample count");
    params.effective_mtry(x.cols());
    for (double v : x.data()) {
        require(std::isfinite(v), "forest features must be finite");
    }

    RandomForest forest;
    forest.task = task;
    forest.n_features = x.cols();
    forest.params = params;
    if (task == ForestTask::classification) {
        double top = 0.0;
        for (double v : y) {
            require(v >= 0.0 && v < 256.0 && v == std::floor(v),
                    "classification targets must be class indices 0..255");
            top = std::max(top, v);
        }
        forest.n_classes = static_cast<std::size_t>(top) + 1;
    } else {
        for (double v : y) {
            require(std::isfinite(v), "regression targets must be finite");
        }
    }

    const std::size_t n = x.rows();
    forest.trees.resize(params.n_trees);
    std::vector<std::vector<std::uint8_t>> in_bag(params.n_trees);
    parallel_units(params.n_trees, [&](std::size_t t) {
        Rng rng(params.rng_seed, {t});
        std::vector<std::size_t> samples(n);
        in_bag[t].assign(n, params.bootstrap ? 0 : 1);
        for (std::size_t k = 0; k < n; ++k) {
            samples[k] = params.bootstrap ? rng.below(n) : k;
            in_bag[t][samples[k]] = 1;
        }
        TreeBuilder builder(x, y, task, forest.n_classes, params, rng);
        forest.trees[t] = builder.grow(std::move(samples));
    });

    if (diagnostics != nullptr) {
        ForestDiagnostics diag;
        double total = 0.0;
        std::vector<std::uint32_t> votes(forest.n_classes);
        for (std::size_t s = 0; s < n; ++s) {
            std::fill(votes.begin(), votes.end(), 0);
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t t = 0; t < params.n_trees; ++t) {
                if (in_bag[t][s] != 0) {
                    continue;
                }
                ++count;
                if (task == ForestTask::classification) {
                    ++votes[tree_vote(forest, forest.trees[t], x.row(s))];
                } else {
                    sum += forest.trees[t].leaf_for(x.row(s)).value;
                }
            }
            if (count == 0) {
                continue;
            }
            ++diag.oob_samples;
            if (task == ForestTask::classification) {
                total += static_cast<double>(argmax_low(votes)) == y[s] ? 1.0 : 0.0;
            } else {
                const double e = sum / static_cast<double>(count) - y[s];
                total += e * e;
            }
        }
        diag.oob_score = diag.oob_samples == 0 ? 0.0 : total / static_cast<double>(diag.oob_samples);
        *diagnostics = diag;
    }
    return forest;
}

std::size_t tree_vote(const RandomForest& forest, const DecisionTree& tree,
                      std::span<const double> x)
{
    const auto& leaf = tree.leaf_for(x);
    return argmax_low(std::span<const std::uint32_t>(tree.leaf_counts).subspan(leaf.counts,
                                                                               forest.n_classes));
}

std::size_t predict_class(const RandomForest& forest, std::span<const double> x)
{
    check_input(forest, x);
    require(forest.task == ForestTask::classification, "predict_class needs a classification forest");
    std::vector<std::uint32_t> votes(forest.n_classes, 0);
    for (const auto& tree : forest.trees) {
        ++votes[tree_vote(forest, tree, x)];
    }
    return argmax_low(votes);
}

double predict_regression(const RandomForest& forest, std::span<const double> x)
{
    check_input(forest, x);
    require(forest.task == ForestTask::regression, "predict_regression needs a regression forest");
    double sum = 0.0;
    for (const auto& tree : forest.trees) {
        sum += tree.leaf_for(x).value;
    }
    return sum / static_cast<double>(forest.trees.size());
}

QuantizedPog CellForests::predict(std::span<const double> latent, double t_pred) const
{
    require(forests.size() == grid.cells(), "cell forest count does not match the grid");
    std::vector<QuantizedLevel> levels(forests.size());
    for (std::size_t c = 0; c < forests.size(); ++c) {
        levels[c].index = static_cast<std::uint8_t>(predict_class(forests[c], latent));
    }
    return QuantizedPog(grid, t_pred, std::move(levels));
}

CellForests train_percell_forests(const Matrix& latents, const std::vector<QuantizedPog>& pogs,
                                  const ForestParams& params)
{
    require(!pogs.empty(), "per-cell forests need at least one POG");
    require(latents.rows() == pogs.size(), "latent rows do not match the POG count");
    CellForests out;
    out.grid = pogs.front().config();
    for (const auto& p : pogs) {
        require(p.config() == out.grid, "all POGs must share one grid configuration");
    }
    out.forests.resize(out.grid.cells());
    parallel_units(out.grid.cells(), [&](std::size_t c) {
        std::vector<double> y(pogs.size());
        for (std::size_t k = 0; k < pogs.size(); ++k) {
            y[k] = pogs[k].levels()[c].index;
        }
        ForestParams p = params;
        p.rng_seed = Rng(params.rng_seed, {c / out.grid.cols, c % out.grid.cols}).next();
        out.forests[c] = train_forest(latents, y, ForestTask::classification, p);
    });
    return out;
}

std::vector<RandomForest> train_perlatent_forests(const Matrix& latents_in,
                                                  const Matrix& latents_out,
                                                  const ForestParams& params)
{
    require(latents_in.rows() == latents_out.rows(), "input and output latent counts differ");
    require(latents_out.cols() >= 1, "no output latents");
    std::vector<RandomForest> forests(latents_out.cols());
    parallel_units(forests.size(), [&](std::size_t j) {
        std::vector<double> y(latents_out.rows());
        for (std::size_t k = 0; k < y.size(); ++k) {
            y[k] = latents_out(k, j);
        }
        ForestParams p = params;
        p.rng_seed = Rng(params.rng_seed, {j}).next();
        forests[j] = train_forest(latents_in, y, ForestTask::regression, p);
    });
    return forests;
}

std::vector<double> predict_latents(const std::vector<RandomForest>& forests,
                                    std::span<const double> latent)
{
    std::vector<double> out(forests.size());
    for (std::size_t j = 0; j < forests.size(); ++j) {
        out[j] = predict_regression(forests[j], latent);
    }
    return out;
}

std::vector<std::uint8_t> encode_forest(const RandomForest& forest)
{
    io::ByteWriter w;
    w.bytes(kForestMagic);
    w.u16(kForestVersion);
    w.u8(static_cast<std::uint8_t>(forest.task));
    w.u32(static_cast<std::uint32_t>(forest.n_features));
    w.u32(static_cast<std::uint32_t>(forest.n_classes));
    w.u32(static_cast<std::uint32_t>(forest.params.n_trees));
    w.u32(static_cast<std::uint32_t>(forest.params.mtry));
    w.u32(static_cast<std::uint32_t>(forest.params.max_depth));
    w.u32(static_cast<std::uint32_t>(forest.params.min_samples_leaf));
    w.u8(forest.params.bootstrap ? 1 : 0);
    w.u64(forest.params.rng_seed);
    w.u32(static_cast<std::uint32_t>(forest.trees.size()));
    for (const auto& tree : forest.trees) {
        w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
        write_tree(w, forest, tree, 0);
    }
    return w.data();
}

RandomForest decode_forest(std::vector<std::uint8_t> bytes, const std::string& source)
{
    io::ByteReader r(std::move(bytes), source);
    r.expect_magic(kForestMagic);
    if (const auto v = r.u16(); v != kForestVersion) {
        r.fail("unsupported forest version " + std::to_string(v));
    }
    RandomForest f;
    const std::uint8_t task = r.u8();
    if (task > 1) {
        r.fail("invalid forest task");
    }
    f.task = static_cast<ForestTask>(task);
    f.n_features = r.u32();
    f.n_classes = r.u32();
    f.params.n_trees = r.u32();
    f.params.mtry = r.u32();
    f.params.max_depth = r.u32();
    f.params.min_samples_leaf = r.u32();
    f.params.bootstrap = r.u8() != 0;
    f.params.rng_seed = r.u64();
    const std::uint32_t trees = r.u32();
    if (f.n_features == 0 || trees == 0 ||
        (f.task == ForestTask::classification && f.n_classes == 0)) {
        r.fail("invalid forest header");
    }
    f.trees.resize(trees);
    for (auto& tree : f.trees) {
        const std::uint32_t count = r.u32();
        read_tree(r, f, tree, 0);
        if (tree.nodes.size() != count) {
            r.fail("tree node count mismatch");
        }
    }
    r.expect_end();
    return f;
}

void save_cell_forests(const CellForests& forests, const std::filesystem::path& path)
{
    io::ByteWriter w;
    w.bytes(kCellForestMagic);
    w.u16(kForestVersion);
    w.u32(static_cast<std::uint32_t>(forests.grid.rows));
    w.u32(static_cast<std::uint32_t>(forests.grid.cols));
    w.f64(forests.grid.cell_length);
    w.f64(forests.grid.cell_width);
    w.f64(forests.grid.origin.x);
    w.f64(forests.grid.origin.y);
    for (const auto& f : forests.forests) {
        write_blob(w, encode_forest(f));
    }
    w.save(path);
}

CellForests load_cell_forests(const std::filesystem::path& path)
{
    io::ByteReader r = io::ByteReader::from_file(path);
    r.expect_magic(kCellForestMagic);
    if (const auto v = r.u16(); v != kForestVersion) {
        r.fail("unsupported cell-forest version " + std::to_string(v));
    }
    CellForests out;
    out.grid.rows = r.u32();
    out.grid.cols = r.u32();
    out.grid.cell_length = r.f64();
    out.grid.cell_width = r.f64();
    out.grid.origin = {r.f64(), r.f64()};
    out.grid.attributes = 1;
    if (out.grid.rows == 0 || out.grid.cols == 0) {
        r.fail("empty forest grid");
    }
    for (std::size_t c = 0; c < out.grid.cells(); ++c) {
        out.forests.push_back(decode_forest(read_blob(r), path.string()));
    }
    r.expect_end();
    return out;
}

void save_forest_list(const std::vector<RandomForest>& forests, const std::filesystem::path& path)
{
    io::ByteWriter w;
    w.bytes(kForestListMagic);
    w.u16(kForestVersion);
    w.u32(static_cast<std::uint32_t>(forests.size()));
    for (const auto& f : forests) {
        write_blob(w, encode_forest(f));
    }
    w.save(path);
}

std::vector<RandomForest> load_forest_list(const std::filesystem::path& path)
{
    io::ByteReader r = io::ByteReader::from_file(path);
    r.expect_magic(kForestListMagic);
    if (const auto v = r.u16(); v != kForestVersion) {
        r.fail("unsupported forest-list version " + std::to_string(v));
    }
    const std::uint32_t count = r.u32();
    std::vector<RandomForest> out;
    for (std::uint32_t k = 0; k < count; ++k) {
        out.push_back(decode_forest(read_blob(r), path.string()));
    }
    r.expect_end();
    return out;
}

} // namespace pog
