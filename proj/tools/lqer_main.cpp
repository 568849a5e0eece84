// Copyright 2026 The LQER Authors
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
// lqer: command-line front end. All logic lives in lqer/app.hpp.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lqer/app.hpp"

namespace {

struct Common {
    std::string config_file;
    std::vector<std::string> sets;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> threads;
    std::optional<std::size_t> batch_size;
    std::string data_dir;
    bool quiet{false};
    bool dump_circuit{false};
};

lqer::RunConfig resolve(const Common &c) {
    std::vector<std::string> o = c.sets;
    const auto add = [&](const std::string &key, const nlohmann::json &v) {
        o.push_back(key + "=" + v.dump());
    };
    if (!c.output_dir.empty()) {
        add("run.output_dir", c.output_dir);
    }
    if (c.seed) {
        add("run.seed", *c.seed);
    }
    if (c.epochs) {
        add("run.epochs", *c.epochs);
    }
    if (c.threads) {
        add("run.threads", *c.threads);
    }
    if (c.batch_size) {
        add("run.batch_size", *c.batch_size);
    }
    if (!c.data_dir.empty()) {
        add("data.source", "directory");
        add("data.path", c.data_dir);
    }
    std::optional<std::filesystem::path> file;
    if (!c.config_file.empty()) {
        file = c.config_file;
    }
    auto cfg = lqer::resolve_config(file, o);
    if (c.dump_circuit) {
        std::cerr << lqer::pqc::describe_circuit(cfg.model.pqc);
    }
    return cfg;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"LQER hybrid quantum-classical image classifier"};
    app.require_subcommand(1);
    Common c;
    const auto common = [&c](CLI::App *sub) {
        sub->add_option("-c,--config", c.config_file, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--set", c.sets, "override a config value, e.g. --set optim.weight_decay=0")
            ->take_all();
        sub->add_option("-o,--output-dir", c.output_dir, "output directory (env: LQER_OUTPUT_DIR)");
        sub->add_option("--seed", c.seed, "run seed");
        sub->add_option("--threads", c.threads, "worker threads (1 = reproducible)");
        sub->add_flag("-q,--quiet", c.quiet, "suppress progress messages");
        sub->add_flag("--dump-circuit", c.dump_circuit, "print the circuit layout to stderr")
            ->group("Debug");
    };

    auto *synth = app.add_subcommand("synth", "write a synthetic dataset and manifest");
    common(synth);
    std::optional<std::size_t> n_per_class, patch_size;
    synth->add_option("--n-per-class", n_per_class, "samples per class");
    synth->add_option("--patch-size", patch_size, "image side in pixels");

    auto *train = app.add_subcommand("train", "train a model");
    common(train);
    std::string ablation = "none";
    train->add_option("--ablation", ablation, "none | classical-only | both");
    train->add_option("--epochs", c.epochs, "training epochs");
    train->add_option("--batch-size", c.batch_size, "minibatch size");
    train->add_option("--data", c.data_dir, "dataset directory (negative/ and positive/)");

    auto *eval = app.add_subcommand("eval", "evaluate a checkpoint");
    common(eval);
    std::string checkpoint, split = "test";
    eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    eval->add_option("--split", split, "train | val | test | all");
    eval->add_option("--data", c.data_dir, "dataset directory (negative/ and positive/)");

    auto *predict = app.add_subcommand("predict", "classify one image");
    common(predict);
    std::string image;
    predict->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    predict->add_option("image", image, "PNG image")->required();

    auto *check = app.add_subcommand("selfcheck", "run the gradient and simulator oracles");
    lqer::selfcheck::Options sc;
    double fault = 0.0;
    check->add_option("--seed", sc.seed, "oracle seed");
    // Test hook: perturbs the parameter-shift angle; not part of the interface.
    check->add_option("--inject-shift-fault", fault)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(lqer::ExitCode::Usage);
    }

    try {
        lqer::log::set_quiet(c.quiet);
        if (synth->parsed()) {
            if (n_per_class) {
                c.sets.push_back("data.synthetic.n_per_class=" + std::to_string(*n_per_class));
            }
            if (patch_size) {
                c.sets.push_back("data.synthetic.patch_size=" + std::to_string(*patch_size));
            }
            (void)lqer::app::cmd_synth(resolve(c));
        } else if (train->parsed()) {
            const auto mode = lqer::app::ablation_from_string(ablation);
            (void)lqer::app::cmd_train(resolve(c), mode);
        } else if (eval->parsed()) {
            (void)lqer::app::cmd_eval(resolve(c), checkpoint, split);
        } else if (predict->parsed()) {
            (void)lqer::app::cmd_predict(resolve(c), checkpoint, image);
        } else if (check->parsed()) {
            sc.shift += fault;
            return lqer::app::cmd_selfcheck(sc) ? 0 : static_cast<int>(lqer::ExitCode::Numerical);
        }
    } catch (const lqer::Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::filesystem::filesystem_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(lqer::ExitCode::Data);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(lqer::ExitCode::Usage);
    }
    return 0;
}
