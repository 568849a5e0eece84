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
// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Criteria 5 and 6 train at the default configuration and
// take a few minutes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lqer/app.hpp"
#include "lqer/selfcheck.hpp"

namespace fs = std::filesystem;
using namespace lqer;

namespace {

struct Line {
    int id;
    std::string title;
    bool pass;
    std::string detail;
};

std::vector<Line> lines;

void report(int id, const std::string &title, bool pass, const std::string &detail) {
    lines.push_back({id, title, pass, detail});
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " -- "
              << detail << std::endl;
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

std::string sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << v;
    return os.str();
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string describe(const selfcheck::CheckResult &r) {
    return r.name + " max deviation " + sci(r.max_deviation) + " (tol " + sci(r.tolerance) + ")";
}

/// Small configuration for the reproducibility runs.
RunConfig small_config(const fs::path &out) {
    RunConfig c;
    c.model.backbone.input_size = 32;
    c.model.backbone.stem_channels = 8;
    c.model.backbone.stage_widths = {8, 16};
    c.model.backbone.blocks_per_stage = {1, 1};
    c.data.synthetic.n_per_class = 60;
    c.data.synthetic.patch_size = 32;
    c.data.augment = {10, true, 0.05, 0.05, 0.1, 0.1, 0.05, false};
    c.run.epochs = 3;
    c.run.threads = 1;
    c.run.seed = 77;
    c.run.output_dir = out.string();
    return c;
}

} // namespace

int main() {
    log::set_quiet(true);
    const fs::path work = fs::temp_directory_path() / "lqer_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    std::ostringstream sink; // progress output of the training runs

    // 1-4: gradient and simulator oracles.
    const selfcheck::Options opt;
    const auto shift = selfcheck::pqc_shift(opt);
    report(1, "parameter-shift gradients match finite differences", shift.pass,
           describe(shift) + " over " + std::to_string(opt.pqc_circuits) + " circuits");

    const auto kron = selfcheck::qsim_kronecker(opt);
    const auto norm = selfcheck::qsim_norm(opt);
    report(2, "simulator agrees with dense Kronecker products and preserves the norm",
           kron.pass && norm.pass, describe(kron) + "; " + describe(norm));

    const auto e2e = selfcheck::end_to_end(opt);
    report(3, "end-to-end hybrid gradients match finite differences", e2e.pass, describe(e2e));

    const auto auc = selfcheck::auc_oracle(opt);
    report(4, "trapezoidal AUC equals Mann-Whitney concordance", auc.pass,
           describe(auc) + " over " + std::to_string(opt.auc_sets) + " sets");

    // 5-6: default configuration, hybrid and classical-only under one seed.
    RunConfig def;
    def.run.output_dir = (work / "default").string();
    app::TrainCommandResult both;
    bool trained = false;
    std::string train_error;
    try {
        both = app::cmd_train(def, app::Ablation::Both, sink);
        trained = both.runs.size() == 2;
    } catch (const std::exception &e) {
        train_error = e.what();
    }
    if (trained) {
        const auto &h = both.runs[0];
        const double seconds = h.summary.at("seconds").get<double>();
        const bool ok = h.test.accuracy >= 0.95 && h.test.sensitivity >= 0.90 &&
                        h.test.specificity >= 0.90 && def.run.epochs <= 20 && seconds < 900;
        report(5, "synthetic task converges at the default configuration", ok,
               "test accuracy " + fmt(h.test.accuracy) + ", sensitivity " +
                   fmt(h.test.sensitivity) + ", specificity " + fmt(h.test.specificity) +
                   ", auc " + (h.test.auc ? fmt(*h.test.auc) : std::string("undefined")) + ", " +
                   std::to_string(def.run.epochs) + " epochs, " + fmt(seconds, 3) + " s");

        const auto &c = both.runs[1];
        const bool comparable = h.test.accuracy >= c.test.accuracy - 0.05 &&
                                fs::exists(work / "default" / "comparison.md");
        report(6, "hybrid within 0.05 of (or above) the classical-only ablation", comparable,
               "hybrid " + fmt(h.test.accuracy) + " vs classical-only " + fmt(c.test.accuracy));
        std::cout << app::comparison_markdown({h.summary, c.summary});
    } else {
        report(5, "synthetic task converges at the default configuration", false,
               "training failed: " + train_error);
        report(6, "hybrid within 0.05 of (or above) the classical-only ablation", false,
               "training failed: " + train_error);
    }

    // 7: two identical single-threaded runs.
    {
        bool same = false;
        std::string detail;
        try {
            (void)app::cmd_train(small_config(work / "repro_a"), app::Ablation::None, sink);
            (void)app::cmd_train(small_config(work / "repro_b"), app::Ablation::None, sink);
            same = true;
            for (const char *f : {"history.csv", "best.ckpt", "last.ckpt"}) {
                const auto a = slurp(work / "repro_a" / f);
                const auto b = slurp(work / "repro_b" / f);
                const bool eq = !a.empty() && a == b;
                same = same && eq;
                detail += std::string(f) + (eq ? " identical" : " DIFFERS") + " (" +
                          std::to_string(a.size()) + " bytes); ";
            }
        } catch (const std::exception &e) {
            detail = std::string("run failed: ") + e.what();
        }
        report(7, "single-threaded runs are bitwise reproducible", same, detail);
    }

    // 8: pipeline safety properties.
    {
        const auto ds = data::synthesize_dataset(500, 64, 8);
        std::size_t leaks = 0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto idx = data::split_indices(ds, {0.8, seed, true});
            std::set<std::string> train_ids;
            for (auto i : idx.train) {
                train_ids.insert(ds[i].patient_id);
            }
            for (auto i : idx.test) {
                leaks += train_ids.count(ds[i].patient_id);
            }
        }
        std::size_t label_changes = 0, augmented = 0;
        const data::AugmentPolicy policies[] = {def.data.augment,
                                                {30, true, 0.2, 0.2, 0.3, 0.3, 0.3, false},
                                                def.data.offline_expansion.policy};
        for (std::size_t p = 0; p < 3; ++p) {
            for (std::size_t i = 0; i < ds.size(); ++i) {
                Rng rng = make_rng(counter_seed(p, i));
                label_changes += data::augment(ds[i], policies[p], rng).label != ds[i].label;
                ++augmented;
            }
        }
        bool angles_ok = false;
        std::string angle_detail = "no training run";
        if (trained) {
            const auto &a = both.runs[0].summary.at("angles");
            angles_ok = a.at("within_open_period").get<bool>() &&
                        a.at("observed").get<std::size_t>() > 0;
            angle_detail = std::to_string(a.at("observed").get<std::size_t>()) +
                           " angles in [" + fmt(a.at("min").get<double>(), 7) + ", " +
                           fmt(a.at("max").get<double>(), 7) + "]";
        }
        report(8, "no patient leakage, label-preserving augmentation, angles in (-pi, pi)",
               leaks == 0 && label_changes == 0 && angles_ok,
               std::to_string(leaks) + " leaked samples over 50 splits; " +
                   std::to_string(label_changes) + " label changes over " +
                   std::to_string(augmented) + " augmentations; " + angle_detail);
    }

    const auto failed = std::count_if(lines.begin(), lines.end(), [](const Line &l) { return !l.pass; });
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
              << std::endl;
    fs::remove_all(work);
    return failed == 0 ? 0 : 1;
}
