#include "hallab/model.hpp"
#include "hallab/switch_function.hpp"

#include <doctest.h>

#include <cmath>

using namespace hallab;

namespace {

MagneticModel open_lattice(int l = 24) {
    LatticeSpec spec{l, 1, 3, Boundary::open};
    return build_hofstadter(spec, PotentialSpec::zero_potential(), 0.0);
}

}  // namespace

TEST_CASE("smoothstep endpoints and symmetry") {
    for (int order : {1, 2, 3, 5}) {
        const auto s = SmoothStep::of_order(order);
        CHECK(s.value(0.0) == 0.0);
        CHECK(s.value(1.0) == 1.0);
        CHECK(s.value(-3.0) == 0.0);
        CHECK(s.value(4.0) == 1.0);
        CHECK(s.value(0.5) == doctest::Approx(0.5).epsilon(1e-14));
        // S(t) + S(1-t) = 1
        for (double t : {0.1, 0.3, 0.45}) {
            CHECK(s.value(t) + s.value(1.0 - t) == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("switch plateaus are bit-exact and the midpoint is one half") {
    const auto model = open_lattice();
    const auto sw = make_switch(Axis::x1, 2.0, 3, model);
    CHECK(sw.profile(-4.0) == 0.0);
    CHECK(sw.profile(-2.0) == 0.0);
    CHECK(sw.profile(2.0) == 1.0);
    CHECK(sw.profile(4.0) == 1.0);
    CHECK(sw.profile(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sw.profile(1.0) + sw.profile(-1.0) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("order-3 profile is C^3 with its largest derivative at the center") {
    const auto model = open_lattice();
    const double m = 2.0;
    const auto sw = make_switch(Axis::x1, m, 3, model);

    // d/dx of S_3((x+m)/2m) peaks at x = 0: S_3'(t) = 140 t^3 (1-t)^3 has its
    // maximum at t = 1/2.
    const double center = sw.profile_derivative(0.0);
    CHECK(center == doctest::Approx(140.0 / 64.0 / (2.0 * m)).epsilon(1e-12));
    for (double x : {-1.5, -0.7, 0.3, 1.1, 1.9}) {
        CHECK(sw.profile_derivative(x) <= center + 1e-12);
    }
    // C^3 join: first three derivatives vanish at the plateau edges
    // (finite-difference probe of the profile).
    const double h = 1e-3;
    for (double edge : {-m, m}) {
        const double d1 =
            (sw.profile(edge + h) - sw.profile(edge - h)) / (2.0 * h);
        const double inner1 =
            (sw.profile(edge + 2 * h) - sw.profile(edge - 2 * h)) / (4.0 * h);
        CHECK(std::abs(d1) < 1e-8);
        CHECK(std::abs(inner1) < 1e-7);
    }
}

TEST_CASE("switch preconditions") {
    const auto model = open_lattice();
    // quarter-extent rule
    CHECK_THROWS_AS(make_switch(Axis::x1, 6.5, 3, model), std::invalid_argument);
    // boundary-margin rule: a strongly off-center switch leaks into the margin
    CHECK_THROWS_AS(make_switch(Axis::x1, 4.0, 3, model, 7.0),
                    std::invalid_argument);
    CHECK_NOTHROW(make_switch(Axis::x1, 3.0, 3, model));
}

TEST_CASE("torus profile is periodic and continuous across the seam") {
    LatticeSpec spec{24, 1, 3, Boundary::torus};
    const auto model = build_hofstadter(spec, PotentialSpec::zero_potential(), 0.0);
    const auto sw = make_switch(Axis::x1, 3.0, 3, model);
    CHECK(sw.profile(-6.0) == 0.0);
    CHECK(sw.profile(6.0) == 1.0);
    CHECK(sw.profile(-11.9) == doctest::Approx(sw.profile(12.1)).epsilon(1e-12));
    CHECK(sw.profile(0.0) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("current operator is anti-Hermitian and strictly strip supported") {
    const auto model = open_lattice();
    const double m = 3.0;
    const auto l2 = make_switch(Axis::x2, m, 3, model);
    const Mat j_op = current_operator(model, l2);
    CHECK(antihermitian_defect(j_op) < 1e-12);

    const RVec& x2 = model.coordinate(Axis::x2);
    for (int i = 0; i < model.dim(); ++i) {
        for (int j = 0; j < model.dim(); ++j) {
            if (std::abs(x2(i)) > m + 1.0 && std::abs(x2(j)) > m + 1.0) {
                CHECK(j_op(i, j) == cxd(0.0, 0.0));
            }
        }
    }
}

TEST_CASE("constant switch commutes with the Hamiltonian exactly") {
    const auto model = open_lattice();
    auto sw = make_switch(Axis::x2, 3.0, 3, model);
    sw.diag.setOnes();
    const Mat j_op = current_operator(model, sw);
    CHECK(j_op.norm() == 0.0);
}

TEST_CASE("sharp step current bound on the free lattice") {
    LatticeSpec spec{12, 0, 1, Boundary::open};
    const auto model = build_hofstadter(spec, PotentialSpec::zero_potential(), 0.0);
    const auto sharp = make_switch(Axis::x2, 1.0, -1, model);
    const Mat j_op = current_operator(model, sharp);
    // Each bond crossing the step contributes at most the hopping amplitude
    // times the unit jump.
    CHECK(operator_norm(j_op) <= 2.0 + 1e-12);
    CHECK(operator_norm(j_op) > 0.5);
}
