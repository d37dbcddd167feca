// model.hpp — finite magnetic models: Peierls lattice and truncated Landau basis
#pragma once

#include "hallab/common.hpp"
#include "hallab/landau_basis.hpp"
#include "hallab/lattice.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace hallab {

enum class ModelBackend { hofstadter, landau_basis };
enum class PeierlsGauge { landau, symmetric };

struct MagneticModel {
    ModelBackend backend{ModelBackend::hofstadter};
    Mat hamiltonian;

    // Position observables. Lattice models carry per-site coordinates
    // (diagonal); the Landau backend carries dense projected operators.
    bool diagonal_positions{true};
    RVec x1_diag, x2_diag;
    Mat x1_dense, x2_dense;

    double field_B{0.0};
    double lambda{0.0};
    PotentialSpec potential;
    LatticeSpec lattice;                       // hofstadter backend only
    std::shared_ptr<const LandauBasis> basis;  // landau backend only

    int dim() const { return static_cast<int>(hamiltonian.rows()); }
    double magnetic_length() const;  // 1/sqrt(B)
    // Linear size of the sample along an axis (lattice: L; landau: the
    // diameter of the truncation disc).
    double coordinate_extent(Axis axis) const;
    const RVec& coordinate(Axis axis) const;

    // Row-major packed bytes of dimension + coordinates + Hamiltonian,
    // and their FNV-1a hash (cache/manifest key).
    std::vector<std::uint8_t> packed_bytes() const;
    std::uint64_t content_hash() const;
};

// Nearest-neighbor hopping model with flux p/q per plaquette (Peierls
// phases), hopping amplitude 1, plus lambda * V sampled at the sites.
// B_label <= 0 selects the natural label 2*pi*p/q.
MagneticModel build_hofstadter(const LatticeSpec& spec, const PotentialSpec& pot,
                               double lambda, double B_label = 0.0,
                               PeierlsGauge gauge = PeierlsGauge::landau);

// Truncated symmetric-gauge Landau Hamiltonian: diag((2n+1)B) plus
// lambda * V projected onto the basis by quadrature.
MagneticModel build_landau_truncated(double field_B, int n_levels, int m_max,
                                     const PotentialSpec& pot, double lambda,
                                     double quad_tol = 1e-8);

}  // namespace hallab
