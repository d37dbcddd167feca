#include "hallab/diagnostics.hpp"
#include "hallab/kubo.hpp"
#include "hallab/model.hpp"
#include "hallab/spectral.hpp"

#include <doctest.h>

#include <cmath>

using namespace hallab;

namespace {

struct DiagFixture {
    MagneticModel model;
    EigenSystem eig;
    double fermi;
    FermiProjector proj;
    SwitchFunction l1, l2;
    DriveContext ctx;

    DiagFixture(int l, Boundary boundary)
        : model(build_hofstadter(LatticeSpec{l, 1, 3, boundary},
                                 PotentialSpec::zero_potential(), 0.0)),
          eig(diagonalize(model)),
          fermi(boundary == Boundary::torus ? midgap_energy(eig, model.dim() / 3)
                                            : torus_midgap(l)),
          proj(fermi_projector(eig, fermi)),
          l1(make_switch(Axis::x1, l / 8.0, 3, model)),
          l2(make_switch(Axis::x2, l / 8.0, 3, model)),
          ctx(make_drive_context(model, fermi, driving_profile(ProfileKind::ramp, 4),
                                 l1, l2)) {}

    static double torus_midgap(int l) {
        const int lt = ((l + 2) / 3) * 3;
        const auto teig = diagonalize(build_hofstadter(
            LatticeSpec{lt, 1, 3, Boundary::torus}, PotentialSpec::zero_potential(),
            0.0));
        return midgap_energy(teig, teig.dim() / 3);
    }
};

// Edge-free sample for bulk-locality claims.
const DiagFixture& torus36() {
    static const DiagFixture fix(36, Boundary::torus);
    return fix;
}

const DiagFixture& open24() {
    static const DiagFixture fix(24, Boundary::open);
    return fix;
}

const DiagFixture& open12() {
    static const DiagFixture fix(12, Boundary::open);
    return fix;
}

double norm_at(const DecayProfile& profile, double dist) {
    double value = profile.norms.front();
    for (std::size_t i = 0; i < profile.distances.size(); ++i) {
        if (profile.distances[i] <= dist) value = profile.norms[i];
    }
    return value;
}

}  // namespace

TEST_CASE("switch itself has flat shell profiles on both plateaus") {
    const auto& fix = open24();
    const Mat l1_mat = fix.l1.as_matrix();
    const auto pos = kernel_decay(l1_mat, fix.model, Axis::x1, fix.l1.half_width,
                                  DecaySide::positive);
    for (double v : pos.norms) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    const auto neg = kernel_decay(l1_mat, fix.model, Axis::x1, fix.l1.half_width,
                                  DecaySide::negative);
    for (double v : neg.norms) CHECK(v == 0.0);
}

TEST_CASE("projector-switch commutator decays away from the transition strip") {
    const auto& fix = torus36();
    const Mat c = commutator_with_diagonal(fix.proj.matrix, fix.l1.diag);
    const auto profile =
        kernel_decay(c, fix.model, Axis::x1, fix.l1.half_width, DecaySide::both);
    REQUIRE(profile.norms.size() >= 8);
    const double lb = fix.model.magnetic_length();
    // >= 10x drop between 2 and 10 magnetic lengths past the strip; the
    // second transition at the seam sits well beyond the probed window.
    CHECK(norm_at(profile, 2.0 * lb) / norm_at(profile, 10.0 * lb) >= 10.0);
    CHECK(profile.fit_exponent < 0.0);
}

TEST_CASE("projector kernel decays under an open gap") {
    const auto& fix = torus36();
    // Mask the projector columns to a thin central slab so that row shells
    // probe the kernel reach |x - x'|.
    Mat masked = fix.proj.matrix;
    const RVec& x1 = fix.model.coordinate(Axis::x1);
    for (int i = 0; i < fix.model.dim(); ++i) {
        for (int j = 0; j < fix.model.dim(); ++j) {
            if (std::abs(x1(j)) > 0.5) masked(i, j) = cxd(0.0, 0.0);
        }
    }
    const auto reach = kernel_decay(masked, fix.model, Axis::x1, 0.5, DecaySide::both);
    REQUIRE(reach.norms.size() >= 7);
    const double lb = fix.model.magnetic_length();
    CHECK(norm_at(reach, 1.0) / norm_at(reach, 8.0 * lb) >= 10.0);
}

TEST_CASE("current operator is identically zero beyond the strip") {
    const auto& fix = open24();
    const Mat j_op = current_operator(fix.model, fix.l2);
    const auto profile = kernel_decay(j_op, fix.model, Axis::x2,
                                      fix.l2.half_width + 1.0, DecaySide::both);
    for (double v : profile.norms) CHECK(v == 0.0);
}

TEST_CASE("stationary state does not spread") {
    const auto& fix = open12();
    Vec state = fix.eig.vectors.col(10);
    const auto report = lightcone_check(fix.ctx, fix.model, 16.0, state, 2048, 9);
    const double first = report.spreads.front();
    for (double s : report.spreads) {
        CHECK(std::abs(s - first) < 1e-6);
    }
}

TEST_CASE("filtered packet spreads at most ballistically") {
    const auto& fix = open24();
    const Vec packet =
        filtered_packet(fix.ctx, fix.model, 2.0, fix.fermi + fix.proj.gap_width);
    const auto report = lightcone_check(fix.ctx, fix.model, 24.0, packet, 4096, 17);
    CHECK(report.growth_exponent <= 1.2);
}

TEST_CASE("doubling tau overlays the physical-time spread curve") {
    const auto& fix = open12();
    const Vec packet =
        filtered_packet(fix.ctx, fix.model, 1.5, fix.fermi + fix.proj.gap_width);
    const auto slow = lightcone_check(fix.ctx, fix.model, 8.0, packet, 2048, 17);
    const auto fast = lightcone_check(fix.ctx, fix.model, 16.0, packet, 4096, 33);
    // compare at matching physical times t = tau * s
    for (std::size_t i = 1; i < slow.times.size(); ++i) {
        const double t = slow.times[i];
        for (std::size_t j = 0; j < fast.times.size(); ++j) {
            if (std::abs(fast.times[j] - t) < 1e-9) {
                CHECK(std::abs(fast.spreads[j] - slow.spreads[i]) <=
                      0.05 * std::max(1.0, slow.spreads[i]));
            }
        }
    }
}

TEST_CASE("boundary reflection is flagged") {
    const auto& fix = open12();
    const Vec packet =
        filtered_packet(fix.ctx, fix.model, 1.5, fix.fermi + 3.0 * fix.proj.gap_width);
    const auto report = lightcone_check(fix.ctx, fix.model, 256.0, packet, 8192, 17);
    CHECK(report.boundary_reflection);
}

TEST_CASE("energy bound equals one exactly for zero drive and zero power") {
    const auto& fix = open12();
    auto flat = fix.ctx;
    flat.profile.g = [](double) { return 0.0; };
    flat.profile.g_dot = [](double) { return 0.0; };
    flat.profile.phi = [](double) { return 0.0; };
    const std::vector<double> grid{0.0, 0.5, 1.0};
    CHECK(std::abs(energy_bound_check(flat, 32.0, 2, 2048, grid) - 1.0) < 1e-10);
    CHECK(std::abs(energy_bound_check(fix.ctx, 32.0, 0, 2048, grid) - 1.0) < 1e-10);
}

TEST_CASE("energy bound is tau-uniform within twenty percent") {
    const auto& fix = open12();
    const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
    const double at32 = energy_bound_check(fix.ctx, 32.0, 2, 4096, grid);
    const double at256 = energy_bound_check(fix.ctx, 256.0, 2, 8192, grid);
    CHECK(at32 >= 1.0 - 1e-12);
    CHECK(std::abs(at256 - at32) / at32 <= 0.20);
}
