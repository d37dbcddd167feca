// lattice.hpp — lattice geometry and scalar potential specifications
#pragma once

#include "hallab/common.hpp"

#include <vector>

namespace hallab {

enum class Boundary { open, torus };

struct LatticeSpec {
    int width{0};         // sites per side (L); sample is width x width
    int flux_p{0};        // flux per plaquette = p/q flux quanta
    int flux_q{1};
    Boundary boundary{Boundary::open};

    // Throws std::invalid_argument on non-coprime (p,q), p out of range,
    // L < 2q, or an incommensurate torus (q must divide L).
    void validate() const;

    int sites() const { return width * width; }
    double flux() const { return static_cast<double>(flux_p) / flux_q; }
};

enum class PotentialKind { zero, gaussian_bumps, cosine };

struct GaussianBump {
    double x1{0.0}, x2{0.0};  // center, in centered coordinates
    double width{1.0};
    double amplitude{1.0};
};

struct PotentialSpec {
    PotentialKind kind{PotentialKind::zero};
    std::vector<GaussianBump> bumps;
    double cosine_amplitude{0.0};
    double cosine_k1{0.0}, cosine_k2{0.0};
    double sup_norm{0.0};
    int smoothness_order{6};  // metadata only on a finite sample

    double value(double x1, double x2) const;
    // Minimum-image evaluation for periodic samples of linear size L.
    double value_periodic(double x1, double x2, double period) const;

    // Gaussian-bump potential rescaled so the sup norm equals `sup`.
    static PotentialSpec normalized_bumps(std::vector<GaussianBump> bumps,
                                          double sup = 1.0);
    static PotentialSpec zero_potential();
};

}  // namespace hallab
