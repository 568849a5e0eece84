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
// Re-uploading circuit: layout, closed-form readouts, and parameter-shift
// gradients against finite differences.

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "lqer/oracles.hpp"
#include "lqer/pqc.hpp"
#include "lqer/rng.hpp"
#include "lqer/selfcheck.hpp"

using namespace lqer;
using namespace lqer::pqc;
using Catch::Matchers::WithinAbs;
using std::numbers::pi;

namespace {
std::vector<double> random_angles(Rng &rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto &x : v) {
        x = uniform(rng, -pi, pi);
    }
    return v;
}
} // namespace

TEST_CASE("default circuit layout", "[pqc]") {
    const PqcConfig cfg;
    CHECK(cfg.n_qubits == 4);
    CHECK(cfg.depth == 2);
    CHECK(cfg.reupload);
    CHECK(cfg.entangler == Entangler::CnotRing);
    CHECK(cfg.param_count() == 24);

    const std::vector<double> z(4, 0.1), theta(24, 0.2);
    const auto tagged = build_tagged_circuit(z, theta, cfg);
    REQUIRE(tagged.size() == 40);
    std::size_t enc = 0, train = 0, ent = 0;
    for (const auto &g : tagged) {
        (g.source == AngleSource::Input   ? enc
         : g.source == AngleSource::Param ? train
                                          : ent)++;
    }
    CHECK(enc == 8);
    CHECK(train == 24);
    CHECK(ent == 8);

    // Layer 0 order: RY(z_i) x4, then RZ RY RZ per qubit, then the ring.
    CHECK(tagged[0].gate.kind == qsim::GateKind::RY);
    CHECK(tagged[4].gate.kind == qsim::GateKind::RZ);
    CHECK(tagged[5].gate.kind == qsim::GateKind::RY);
    CHECK(tagged[6].gate.kind == qsim::GateKind::RZ);
    CHECK(tagged[16].gate.kind == qsim::GateKind::CNOT);
    CHECK(*tagged[19].gate.control == 3);
    CHECK(tagged[19].gate.target == 0);
    // theta[l, i, k] lives at (l*n + i)*3 + k.
    CHECK(tagged[20 + 4 + 3 * 2 + 1].index == PqcParams::index(1, 2, 1, 4));
}

TEST_CASE("entangler variants", "[pqc]") {
    const std::vector<double> z(3, 0.0), theta(9, 0.0);
    PqcConfig cfg{3, 1, Entangler::CnotLinear, true};
    auto gates = build_circuit(z, theta, cfg);
    CHECK(gates.size() == 3 + 9 + 2);
    cfg.entangler = Entangler::CzRing;
    gates = build_circuit(z, theta, cfg);
    CHECK(gates.size() == 3 + 9 + 3);
    CHECK(gates.back().kind == qsim::GateKind::CZ);
    CHECK(entangler_from_string("cz_ring") == Entangler::CzRing);
    CHECK(to_string(Entangler::CnotLinear) == "cnot_linear");
    CHECK_THROWS_AS(entangler_from_string("ring"), ConfigError);
}

TEST_CASE("re-upload off encodes only in the first layer", "[pqc]") {
    const std::vector<double> z(4, 0.3), theta(24, 0.0);
    PqcConfig cfg;
    cfg.reupload = false;
    CHECK(build_circuit(z, theta, cfg).size() == 36);

    // With one layer both settings give the same gate list.
    PqcConfig a{4, 1, Entangler::CnotRing, true}, b{4, 1, Entangler::CnotRing, false};
    const std::vector<double> t1(12, 0.4);
    const auto ga = build_circuit(z, t1, a), gb = build_circuit(z, t1, b);
    REQUIRE(ga.size() == gb.size());
    for (std::size_t i = 0; i < ga.size(); ++i) {
        CHECK(ga[i].kind == gb[i].kind);
        CHECK(ga[i].target == gb[i].target);
        CHECK(ga[i].angle == gb[i].angle);
    }
}

TEST_CASE("bad dimensions and values are structural errors", "[pqc]") {
    const PqcConfig cfg;
    CHECK_THROWS_AS(forward(std::vector<double>(3, 0.0), std::vector<double>(24, 0.0), cfg),
                    StructuralError);
    CHECK_THROWS_AS(forward(std::vector<double>(4, 0.0), std::vector<double>(23, 0.0), cfg),
                    StructuralError);
    CHECK_THROWS_AS(forward(std::vector<double>{0, 0, NAN, 0}, std::vector<double>(24, 0.0), cfg),
                    StructuralError);
    CHECK_THROWS_AS(PqcConfig({0, 2, Entangler::CnotRing, true}).validate(), ConfigError);
    CHECK_THROWS_AS(PqcConfig({4, 0, Entangler::CnotRing, true}).validate(), ConfigError);
}

TEST_CASE("closed-form readouts", "[pqc]") {
    const PqcConfig cfg;
    CHECK(forward(std::vector<double>(4, 0.0), std::vector<double>(24, 0.0), cfg) ==
          std::vector<double>{1, 1, 1, 1});

    const PqcConfig one{1, 1, Entangler::CnotRing, true};
    for (double t : {-2.0, -0.3, 0.0, 0.9, 3.0}) {
        CHECK_THAT(forward(std::vector<double>{t}, std::vector<double>(3, 0.0), one)[0],
                   WithinAbs(std::cos(t), 1e-14));
    }

    Rng rng = make_rng(3, "bounds");
    for (int i = 0; i < 100; ++i) {
        for (double q : forward(random_angles(rng, 4), random_angles(rng, 24), cfg)) {
            CHECK(std::abs(q) <= 1.0);
        }
    }
}

TEST_CASE("readout matches the dense oracle", "[pqc][oracle]") {
    Rng rng = make_rng(4, "dense");
    const PqcConfig cfg;
    for (int i = 0; i < 20; ++i) {
        const auto z = random_angles(rng, 4), theta = random_angles(rng, 24);
        std::vector<qsim::Complex> v(16);
        v[0] = 1.0;
        for (const auto &g : build_circuit(z, theta, cfg)) {
            v = oracle::apply(selfcheck::detail::dense_gate(g, 4), v);
        }
        const auto q = forward(z, theta, cfg);
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(std::abs(q[k] - oracle::expect_z(v, 4, k)) < 1e-12);
        }
    }
}

TEST_CASE("shift-rule examples", "[pqc][gradient]") {
    const PqcConfig one{1, 1, Entangler::CnotRing, true};
    const std::vector<double> c{1.0};
    // RY(theta_1) is the only non-trivial trainable gate when RZ angles are 0.
    std::vector<double> theta(3, 0.0);
    CHECK(grad_params(std::vector<double>{0.0}, theta, one, c)[1] == 0.0);
    theta[1] = pi / 2;
    CHECK_THAT(grad_params(std::vector<double>{0.0}, theta, one, c)[1], WithinAbs(-1.0, 1e-14));
    CHECK(grad_inputs(std::vector<double>{0.0}, std::vector<double>(3, 0.0), one, c)[0] == 0.0);

    const PqcConfig two{1, 2, Entangler::CnotRing, true};
    CHECK_THAT(grad_inputs(std::vector<double>{pi / 4}, std::vector<double>(6, 0.0), two, c)[0],
               WithinAbs(-2.0, 1e-14));
}

TEST_CASE("gradient at the all-zero point is exactly zero", "[pqc][gradient]") {
    const PqcConfig cfg;
    const std::vector<double> c{0.3, -1.0, 2.0, 0.5};
    const auto g = vjp(std::vector<double>(4, 0.0), std::vector<double>(24, 0.0), cfg, c);
    for (double v : g.inputs) {
        CHECK(v == 0.0);
    }
    for (double v : g.params) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("shift rule matches finite differences on 100 draws", "[pqc][gradient][oracle]") {
    const auto r = selfcheck::pqc_shift();
    INFO("max deviation " << r.max_deviation);
    CHECK(r.max_deviation < 1e-6);
}

TEST_CASE("shift rule matches finite differences across configurations", "[pqc][gradient]") {
    Rng rng = make_rng(5, "configs");
    for (const auto ent : {Entangler::CnotRing, Entangler::CzRing, Entangler::CnotLinear}) {
        for (const bool re : {true, false}) {
            for (std::size_t n = 1; n <= 3; ++n) {
                const PqcConfig cfg{n, 2, ent, re};
                const auto z = random_angles(rng, n), theta = random_angles(rng, cfg.param_count());
                std::vector<double> c(n);
                for (auto &x : c) {
                    x = normal01(rng);
                }
                const auto g = vjp(z, theta, cfg, c);
                const auto dot = [&](const std::vector<double> &q) {
                    double s = 0;
                    for (std::size_t i = 0; i < n; ++i) {
                        s += c[i] * q[i];
                    }
                    return s;
                };
                const auto nz = oracle::numeric_gradient(
                    [&](std::span<const double> zz) { return dot(forward(zz, theta, cfg)); }, z);
                const auto nt = oracle::numeric_gradient(
                    [&](std::span<const double> tt) { return dot(forward(z, tt, cfg)); }, theta);
                for (std::size_t k = 0; k < n; ++k) {
                    CHECK(std::abs(g.inputs[k] - nz[k]) < 1e-6);
                }
                for (std::size_t k = 0; k < theta.size(); ++k) {
                    CHECK(std::abs(g.params[k] - nt[k]) < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("a wrong shift angle is caught by the finite-difference check", "[pqc][gradient]") {
    selfcheck::Options o;
    o.shift = half_pi + 0.05;
    o.pqc_circuits = 5;
    CHECK_FALSE(selfcheck::pqc_shift(o).pass);
}

TEST_CASE("re-uploading changes the function", "[pqc]") {
    // Pinned witness point; the search below shows such points are generic.
    const std::vector<double> z{0.9, -1.7, 2.3, 0.4};
    std::vector<double> theta(24);
    for (std::size_t k = 0; k < theta.size(); ++k) {
        theta[k] = 0.25 * static_cast<double>(k % 7) - 0.6;
    }
    PqcConfig on, off;
    off.reupload = false;
    const auto a = forward(z, theta, on), b = forward(z, theta, off);
    double diff = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
    }
    INFO("max |q_on - q_off| = " << diff);
    CHECK(diff > 1e-3);

    Rng rng = make_rng(6, "witness");
    std::size_t found = 0;
    for (int i = 0; i < 20; ++i) {
        const auto zz = random_angles(rng, 4), tt = random_angles(rng, 24);
        const auto qa = forward(zz, tt, on), qb = forward(zz, tt, off);
        for (std::size_t k = 0; k < 4; ++k) {
            if (std::abs(qa[k] - qb[k]) > 1e-3) {
                ++found;
                break;
            }
        }
    }
    CHECK(found > 10);
}

TEST_CASE("readout is a pure function of its inputs", "[pqc]") {
    const PqcConfig cfg;
    const std::vector<double> z{0.1, 0.2, -0.3, 1.0};
    std::vector<double> theta(24, 0.7);
    const auto a = forward(z, theta, cfg);
    (void)forward(std::vector<double>{3, 2, 1, 0}, theta, cfg);
    CHECK(forward(z, theta, cfg) == a);
}

TEST_CASE("circuit dump lists every layer symbolically", "[pqc]") {
    const auto text = describe_circuit(PqcConfig{});
    CHECK(text.find("z[3]") != std::string::npos);
    CHECK(text.find("theta[1,3,2]") != std::string::npos);
    CHECK(text.find("CNOT") != std::string::npos);
}
