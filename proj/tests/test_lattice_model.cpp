#include "hallab/model.hpp"
#include "hallab/spectral.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace hallab;

namespace {

// Peierls product around the plaquette with lower-left site (x, y).
cxd plaquette_product(const MagneticModel& m, int x, int y) {
    const int l = m.lattice.width;
    auto site = [l](int a, int b) { return (a % l) + l * (b % l); };
    const int s0 = site(x, y), s1 = site(x + 1, y), s2 = site(x + 1, y + 1),
              s3 = site(x, y + 1);
    auto hop = [&](int from, int to) {
        const cxd h = m.hamiltonian(to, from);
        return h / std::abs(h);
    };
    return hop(s0, s1) * hop(s1, s2) * hop(s2, s3) * hop(s3, s0);
}

}  // namespace

TEST_CASE("lattice spec validation") {
    CHECK_THROWS_AS((LatticeSpec{12, 2, 4, Boundary::open}.validate()),
                    std::invalid_argument);  // non-coprime
    CHECK_THROWS_AS((LatticeSpec{4, 1, 3, Boundary::open}.validate()),
                    std::invalid_argument);  // L < 2q
    CHECK_THROWS_AS((LatticeSpec{16, 1, 3, Boundary::torus}.validate()),
                    std::invalid_argument);  // incommensurate torus
    CHECK_NOTHROW((LatticeSpec{12, 1, 3, Boundary::open}.validate()));
    CHECK_NOTHROW((LatticeSpec{6, 0, 1, Boundary::open}.validate()));
}

TEST_CASE("zero-flux open lattice reproduces the free tight-binding spectrum") {
    LatticeSpec spec{6, 0, 1, Boundary::open};
    const auto model = build_hofstadter(spec, PotentialSpec::zero_potential(), 0.0);
    const auto eig = diagonalize(model);

    // Open 6x6 square lattice: E = -2 cos(a pi/7) - 2 cos(b pi/7).
    std::vector<double> expected;
    for (int a = 1; a <= 6; ++a) {
        for (int b = 1; b <= 6; ++b) {
            expected.push_back(-2.0 * std::cos(a * kPi / 7.0) -
                               2.0 * std::cos(b * kPi / 7.0));
        }
    }
    std::sort(expected.begin(), expected.end());
    for (int i = 0; i < model.dim(); ++i) {
        CHECK(eig.energies(i) == doctest::Approx(expected[i]).epsilon(1e-10));
    }
    // Bipartite: spectrum symmetric about zero.
    for (int i = 0; i < model.dim(); ++i) {
        CHECK(std::abs(eig.energies(i) + eig.energies(model.dim() - 1 - i)) < 1e-9);
    }
}

TEST_CASE("hermiticity and flux per plaquette") {
    LatticeSpec spec{12, 1, 3, Boundary::open};
    const auto model = build_hofstadter(spec, PotentialSpec::zero_potential(), 0.0);
    CHECK(hermitian_defect(model.hamiltonian) < 1e-12);

    const cxd target = std::exp(2.0 * kPi * kI / 3.0);
    for (int x = 0; x < 11; x += 3) {
        for (int y = 0; y < 11; y += 2) {
            CHECK(std::abs(plaquette_product(model, x, y) - target) < 1e-12);
        }
    }
}

TEST_CASE("torus flux stays uniform across the wrap") {
    LatticeSpec spec{12, 1, 3, Boundary::torus};
    const auto model = build_hofstadter(spec, PotentialSpec::zero_potential(), 0.0);
    const cxd target = std::exp(2.0 * kPi * kI / 3.0);
    for (int x = 0; x < 12; ++x) {
        CHECK(std::abs(plaquette_product(model, x, 11) - target) < 1e-12);
        CHECK(std::abs(plaquette_product(model, 11, x) - target) < 1e-12);
    }
}

TEST_CASE("q = 3 spectrum splits into three magnetic bands with open gaps") {
    LatticeSpec spec{24, 1, 3, Boundary::open};
    const auto model = build_hofstadter(spec, PotentialSpec::zero_potential(), 0.0);
    const auto eig = diagonalize(model);

    // The two largest nearest-level spacings separate the three clusters.
    std::vector<std::pair<double, int>> spacings;
    for (int i = 0; i + 1 < model.dim(); ++i) {
        spacings.push_back({eig.energies(i + 1) - eig.energies(i), i});
    }
    std::sort(spacings.rbegin(), spacings.rend());
    CHECK(spacings[0].first > 0.1);
    CHECK(spacings[1].first > 0.1);
    // Cluster boundaries sit near one third and two thirds of the states.
    std::set<int> cuts{spacings[0].second + 1, spacings[1].second + 1};
    for (int cut : cuts) {
        const double frac = static_cast<double>(cut) / model.dim();
        const double to_third =
            std::min(std::abs(frac - 1.0 / 3.0), std::abs(frac - 2.0 / 3.0));
        CHECK(to_third < 0.05);
    }
}

TEST_CASE("potential decouples at lambda = 0") {
    LatticeSpec spec{12, 1, 3, Boundary::open};
    auto pot = PotentialSpec::normalized_bumps({{1.0, -2.0, 2.0, 1.0}}, 1.0);
    const auto plain = build_hofstadter(spec, PotentialSpec::zero_potential(), 0.0);
    const auto with_pot = build_hofstadter(spec, pot, 0.0);
    CHECK((plain.hamiltonian - with_pot.hamiltonian).norm() == 0.0);
}

TEST_CASE("potential sup norm bounds the sampled values") {
    auto pot = PotentialSpec::normalized_bumps(
        {{0.5, 0.5, 1.5, 2.0}, {-1.0, 2.0, 2.5, -1.2}}, 1.0);
    double peak = 0.0;
    for (double x = -8.0; x <= 8.0; x += 0.05) {
        for (double y = -8.0; y <= 8.0; y += 0.05) {
            peak = std::max(peak, std::abs(pot.value(x, y)));
        }
    }
    CHECK(peak <= pot.sup_norm * (1.0 + 1e-9));
    CHECK(peak > 0.8 * pot.sup_norm);  // normalization actually reaches the sup
}

TEST_CASE("coupling beyond the field label is rejected") {
    LatticeSpec spec{12, 1, 3, Boundary::open};
    auto pot = PotentialSpec::normalized_bumps({{0.0, 0.0, 2.0, 1.0}}, 1.0);
    CHECK_THROWS_AS(build_hofstadter(spec, pot, 100.0), std::invalid_argument);
}

TEST_CASE("landau and symmetric Peierls gauges are spectrally identical") {
    LatticeSpec spec{12, 1, 3, Boundary::open};
    auto pot = PotentialSpec::normalized_bumps({{0.8, -0.4, 2.0, 1.0}}, 1.0);
    const auto a = build_hofstadter(spec, pot, 0.2, 0.0, PeierlsGauge::landau);
    const auto b = build_hofstadter(spec, pot, 0.2, 0.0, PeierlsGauge::symmetric);
    const auto ea = diagonalize(a);
    const auto eb = diagonalize(b);
    CHECK((ea.energies - eb.energies).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("model hashing tracks content") {
    LatticeSpec spec{12, 1, 3, Boundary::open};
    const auto a = build_hofstadter(spec, PotentialSpec::zero_potential(), 0.0);
    const auto b = build_hofstadter(spec, PotentialSpec::zero_potential(), 0.0);
    CHECK(a.content_hash() == b.content_hash());
    auto pot = PotentialSpec::normalized_bumps({{0.0, 0.0, 2.0, 1.0}}, 1.0);
    const auto c = build_hofstadter(spec, pot, 0.1);
    CHECK(a.content_hash() != c.content_hash());
}
