#include "doctest.h"

#include "formstab/config.hpp"
#include "formstab/errors.hpp"
#include "formstab/hinfsynth.hpp"
#include "formstab/io.hpp"
#include "formstab/linmodel.hpp"
#include "formstab/lti.hpp"
#include "formstab/poly.hpp"

#include <algorithm>
#include <random>

using namespace formstab;
using Eigen::MatrixXd;

TEST_CASE("polynomial roots and reconstruction") {
    const Poly p = poly_mul(poly_mul({1.0, -1.0}, {1.0, -2.0}), {1.0, 3.0});
    auto r = poly_roots(p);
    std::sort(r.begin(), r.end(), [](cdouble a, cdouble b) { return a.real() < b.real(); });
    REQUIRE(r.size() == 3);
    CHECK(r[0].real() == doctest::Approx(-3.0));
    CHECK(r[1].real() == doctest::Approx(1.0));
    CHECK(r[2].real() == doctest::Approx(2.0));
    const Poly back = poly_from_roots(r);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(back[k] == doctest::Approx(p[k]));
    CHECK(polyval(p, 2.0) == doctest::Approx(0.0));
    CHECK(trailing_zeros({1.0, 2.0, 0.0, 0.0}) == 2);
}

TEST_CASE("rational transfer functions") {
    const RationalTF g({2.0}, {2.0, 0.0});
    CHECK(g.den()[0] == doctest::Approx(1.0));
    CHECK(g.num()[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(RationalTF({1.0, 0.0, 0.0}, {1.0, 1.0}), DomainError);
    // 1/s closed with unity feedback is 1/(s+1)
    const auto t = g.complementary();
    const cdouble s{0.3, 0.7};
    CHECK(std::abs(t(s) - 1.0 / (s + 1.0)) < 1e-12);
    CHECK(std::abs(g.sensitivity()(s) + t(s) - 1.0) < 1e-12);
}

TEST_CASE("scalar state space to transfer function") {
    const auto tf = ss_to_tf(-MatrixXd::Identity(1, 1), Eigen::VectorXd::Ones(1), Eigen::RowVectorXd::Ones(1));
    REQUIRE(tf.den().size() == 2);
    CHECK(tf.den()[1] == doctest::Approx(1.0));
    CHECK(tf.num().back() == doctest::Approx(1.0));
}

TEST_CASE("transfer function reconstructs the frequency response") {
    const auto ac = builtin_a320();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> lw(-3.0, 3.0);
    for (int input : {in::aileron, in::rudder}) {
        const auto tf = transfer_function(ac.model, input, st::y);
        const auto& A = ac.model.A;
        for (int k = 0; k < 50; ++k) {
            const double w = std::pow(10.0, lw(rng));
            Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(12, 12) * cdouble(0.0, w) - A.cast<cdouble>();
            const Eigen::VectorXcd x = M.partialPivLu().solve(ac.model.B.col(input).cast<cdouble>());
            const cdouble direct = x(st::y);
            CHECK(std::abs(tf(cdouble(0.0, w)) - direct) < 1e-6 * std::abs(direct));
        }
    }
}

TEST_CASE("built-in model structure") {
    const auto ac = builtin_a320();
    CHECK(ac.model.B(st::vx, in::thrust) == doctest::Approx(1.25e-5));
    const std::vector<int> lon{st::x, st::z, st::vx, st::vz, st::theta, st::q};
    const std::vector<int> lat{st::y, st::vy, st::phi, st::psi, st::p, st::r};
    for (int a : lon)
        for (int b : lat) {
            CHECK(ac.model.A(a, b) == 0.0);
            CHECK(ac.model.A(b, a) == 0.0);
        }
    for (int a : lon) {
        CHECK(ac.model.B(a, in::aileron) == 0.0);
        CHECK(ac.model.B(a, in::rudder) == 0.0);
    }

    const auto ev = eigenvalues(ac.model);
    for (std::size_t k = 1; k < ev.size(); ++k) CHECK(ev[k - 1].real() >= ev[k].real());

    // union of the block spectra
    auto block = sorted_eigenvalues(a320_lateral_A());
    const auto lon_ev = sorted_eigenvalues(a320_longitudinal_A());
    block.insert(block.end(), lon_ev.begin(), lon_ev.end());
    for (const auto& l : block) {
        double best = 1e300;
        for (const auto& m : ev) best = std::min(best, std::abs(l - m));
        CHECK(best < 1e-9);
    }
    const auto lat_ev = sorted_eigenvalues(a320_lateral_A());
    CHECK(std::count_if(lat_ev.begin(), lat_ev.end(), [](cdouble z) { return std::abs(z) < 1e-8; }) == 1);
}

TEST_CASE("matrix and model JSON round trip") {
    const auto ac = builtin_a320();
    const auto j = model_to_json(ac.model, ac.params);
    const auto back = model_from_json(j);
    CHECK((back.model.A - ac.model.A).norm() == 0.0);
    CHECK((back.model.B - ac.model.B).norm() == 0.0);
    CHECK(back.params.wingspan == ac.params.wingspan);

    json ragged = json::array({json::array({1.0, 2.0}), json::array({3.0})});
    CHECK_THROWS_AS(matrix_from_json(ragged, "M"), ConfigError);
    json partial = j;
    partial.erase("B");
    CHECK_THROWS_AS(model_from_json(partial), ConfigError);
}

TEST_CASE("controller JSON round trip") {
    for (const char* name : {"lqr", "lqr-int", "structured"}) {
        const Controller c = load_controller(name);
        const Controller back = controller_from_json(controller_to_json(c));
        CHECK(c.index() == back.index());
        if (const auto* g = std::get_if<GainSet>(&c)) {
            const auto& h = std::get<GainSet>(back);
            CHECK((g->K_alpha - h.K_alpha).norm() == 0.0);
            CHECK((g->K_p - h.K_p).norm() == 0.0);
        } else {
            CHECK((std::get<StateFeedbackGain>(c).K - std::get<StateFeedbackGain>(back).K).norm() == 0.0);
        }
    }
    CHECK_THROWS_AS(load_controller("pid"), ConfigError);
    CHECK_THROWS_AS(controller_from_json(json{{"kind", "fuzzy"}}), ConfigError);
}

TEST_CASE("scenario configuration") {
    const auto cfg = parse_scenario("[formation]\nn_aircraft = 4\nwake_enabled = false\n"
                                    "[controller]\ntype = lqr-int\n[integration]\nduration_s = 20\ndt_s = 0.02\n");
    CHECK(cfg.scenario.n_aircraft == 4);
    CHECK_FALSE(cfg.scenario.wake_enabled);
    CHECK(cfg.scenario.duration == doctest::Approx(20.0));
    CHECK(cfg.scenario.controller_name == "lqr-int");

    try {
        parse_scenario("[formation]\nn_planes = 3\n", "a.ini");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("[formation] unknown key 'n_planes'") != std::string::npos);
    }
    try {
        parse_scenario("[formation]\nn_aircraft = three\n", "b.ini");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("n_aircraft") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_scenario("[formation\nn_aircraft = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("[weather]\nrain = 1\n"), ConfigError);
}

TEST_CASE("problem configuration and tunable mask") {
    const auto p = parse_problem("[problem]\ncontroller = structured\nkp_scale = 5\nmask = kp_y,kd_y\n"
                                 "max_evaluations = 10\n");
    CHECK(p.kp_scale == doctest::Approx(5.0));
    CHECK(p.problem.mask.count() == 2);
    CHECK(p.problem.max_evaluations == 10);
    CHECK(TunableMask::parse("all").count() == 6);
    CHECK(TunableMask::parse("kp_x,kd_z").to_string() == "kp_x,kd_z");
    CHECK_THROWS_AS(TunableMask::parse("kp_q"), ConfigError);
    CHECK_THROWS_AS(parse_problem("[problem]\nmask = kp_w\n"), ConfigError);
}
