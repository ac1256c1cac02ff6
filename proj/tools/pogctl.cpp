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


// pogctl: generate datasets, train and evaluate predictors, render grids.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "pog/cli.hpp"
#include "pog/errors.hpp"

namespace fs = std::filesystem;
using namespace pog;
using namespace pog::cli;

namespace {

struct ConfigOptions
{
    std::string file;
    std::vector<std::string> overrides;
    std::string dataset;

    void attach(CLI::App* app)
    {
        app->add_option("-c,--config", file, "Run config (JSON)")->check(CLI::ExistingFile);
        app->add_option("--set", overrides, "Override a config field, e.g. dataset.n_total=10")
            ->allow_extra_args(false);
        app->add_option("-d,--dataset", dataset, "Dataset directory (overrides paths.dataset)");
    }

    RunConfig resolve() const
    {
        RunConfig c = file.empty() ? desk_config() : load_run_config(file);
        for (const auto& o : overrides) {
            c = apply_override(c, o);
        }
        if (!dataset.empty()) {
            c.paths.dataset = dataset;
        }
        return c;
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Occupancy grid prediction toolkit"};
    app.require_subcommand(1);
    int threads = default_thread_count();
    app.add_option("-j,--threads", threads, "Worker threads (default: POG_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    ConfigOptions gen_cfg;
    std::vector<std::string> scenario_files;
    bool print_config = false;
    auto* gen = app.add_subcommand("generate", "Sample scenarios into a dataset");
    gen_cfg.attach(gen);
    gen->add_option("--scenarios", scenario_files,
                    "Rasterize these scenario files into a validation-only dataset instead")
        ->check(CLI::ExistingFile);
    gen->add_flag("--print-config", print_config, "Print the resolved config and exit");

    ConfigOptions train_cfg;
    std::string arch_name;
    std::string bundle_out;
    auto* train = app.add_subcommand("train", "Train one architecture");
    train_cfg.attach(train);
    train->add_option("arch", arch_name, "arch1 | arch2 | arch3")->required();
    train->add_option("-o,--out", bundle_out, "Bundle directory (default: <paths.output>/<arch>)");

    std::string bundle_in, aog_in, pog_out;
    auto* pred = app.add_subcommand("predict", "Predict the POG of one AOG file");
    pred->add_option("-b,--bundle", bundle_in, "Predictor bundle")->required()->check(CLI::ExistingDirectory);
    pred->add_option("aog", aog_in, "AOG grid file")->required()->check(CLI::ExistingFile);
    pred->add_option("-o,--out", pog_out, "Output POG grid file")->required();

    ConfigOptions eval_cfg;
    std::vector<std::string> bundles;
    std::string eval_out;
    EvalOptions eval_opts;
    auto* eval = app.add_subcommand("eval", "Evaluate bundles on the validation split");
    eval_cfg.attach(eval);
    eval->add_option("bundles", bundles, "Predictor bundles")->required()->check(CLI::ExistingDirectory);
    eval->add_option("-o,--out", eval_out, "Report directory (default: <paths.output>/eval)");
    eval->add_flag("--latency", eval_opts.measure_latency, "Time predictions (not reproducible)");
    eval->add_option("--latency-calls", eval_opts.latency_calls, "Timed calls per predictor");
    eval->add_option("--bins", eval_opts.histogram_bins, "Histogram bins")->check(CLI::PositiveNumber);

    std::string grid_in, image_out;
    auto* render = app.add_subcommand("render", "Render a grid file as a PGM image");
    render->add_option("grid", grid_in, "Grid file")->required()->check(CLI::ExistingFile);
    render->add_option("-o,--out", image_out, "Output .pgm")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }
    omp_set_num_threads(threads);

    try {
        if (*gen) {
            const RunConfig c = gen_cfg.resolve();
            if (print_config) {
                std::cout << dump_run_config(c) << "\n";
            } else if (scenario_files.empty()) {
                cmd_generate(c, std::cout);
            } else {
                cmd_import(c, {scenario_files.begin(), scenario_files.end()}, std::cout);
            }
        } else if (*train) {
            ArchitectureId arch;
            try {
                arch = parse_architecture(arch_name);
            } catch (const std::invalid_argument& e) {
                std::cerr << "usage error: " << e.what() << "\n";
                return kUsage;
            }
            const RunConfig c = train_cfg.resolve();
            const fs::path out = bundle_out.empty() ? c.paths.output / arch_name : fs::path(bundle_out);
            cmd_train(c, arch, out, std::cout);
        } else if (*pred) {
            cmd_predict(bundle_in, aog_in, pog_out, std::cout);
        } else if (*eval) {
            const RunConfig c = eval_cfg.resolve();
            const fs::path out = eval_out.empty() ? c.paths.output / "eval" : fs::path(eval_out);
            cmd_eval(c, {bundles.begin(), bundles.end()}, out, eval_opts, std::cout);
        } else if (*render) {
            cmd_render(grid_in, image_out);
        }
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumericError;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kOk;
}
