#include "hallab/switch_function.hpp"

#include <cmath>
#include <stdexcept>

namespace hallab {

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - k + i) / i;
    return r;
}

}  // namespace

SmoothStep SmoothStep::of_order(int n) {
    if (n < 1) throw std::invalid_argument("smoothstep: order must be >= 1");
    SmoothStep s;
    s.order = n;
    s.coeff.resize(n + 1);
    // S_N(t) = t^(N+1) sum_k C(N+k, k) C(2N+1, N-k) (-t)^k
    for (int k = 0; k <= n; ++k) {
        s.coeff[k] = binomial(n + k, k) * binomial(2 * n + 1, n - k) *
                     ((k % 2 == 0) ? 1.0 : -1.0);
    }
    return s;
}

double SmoothStep::value(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double poly = 0.0;
    for (int k = order; k >= 0; --k) poly = poly * t + coeff[k];
    for (int i = 0; i <= order; ++i) poly *= t;  // t^(N+1)
    return poly;
}

double SmoothStep::derivative(double t) const {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    double poly = 0.0;
    for (int k = order; k >= 0; --k) {
        poly = poly * t + coeff[k] * (order + 1 + k);
    }
    for (int i = 0; i < order; ++i) poly *= t;  // t^N
    return poly;
}

double SwitchFunction::profile(double x) const {
    auto rise = [this](double u) {
        if (order < 0) return u < 0.0 ? 0.0 : 1.0;  // sharp step
        return step.value((u + half_width) / (2.0 * half_width));
    };
    if (!periodic) return rise(x - center);
    // Torus profile: rises around `center`, falls back across the seam so
    // the values match at the wrap.
    const double l = period;
    double u = std::fmod(x - center, l);
    if (u < -0.5 * l) u += l;
    if (u >= 0.5 * l) u -= l;
    const double fall_center = 0.5 * l - half_width;  // fall ends at the seam
    return rise(u) - rise(u - fall_center);
}

double SwitchFunction::profile_derivative(double x) const {
    if (order < 0) return 0.0;
    auto rise_d = [this](double u) {
        return step.derivative((u + half_width) / (2.0 * half_width)) /
               (2.0 * half_width);
    };
    if (!periodic) return rise_d(x - center);
    const double l = period;
    double u = std::fmod(x - center, l);
    if (u < -0.5 * l) u += l;
    if (u >= 0.5 * l) u -= l;
    const double fall_center = 0.5 * l - half_width;
    return rise_d(u) - rise_d(u - fall_center);
}

Mat SwitchFunction::as_matrix() const {
    if (is_diagonal) {
        return diag.cast<cxd>().asDiagonal().toDenseMatrix();
    }
    return dense;
}

int SwitchFunction::dim() const {
    return is_diagonal ? static_cast<int>(diag.size())
                       : static_cast<int>(dense.rows());
}

SwitchFunction make_switch(Axis direction, double half_width, int order,
                           const MagneticModel& model, double center,
                           double boundary_margin) {
    if (half_width <= 0.0) throw std::invalid_argument("switch: half width must be > 0");
    const double extent = model.coordinate_extent(direction);
    if (half_width >= 0.25 * extent) {
        throw std::invalid_argument(
            "switch: half width must stay below a quarter of the sample extent");
    }

    SwitchFunction sw;
    sw.direction = direction;
    sw.half_width = half_width;
    sw.order = order;
    sw.center = center;
    if (order >= 1) sw.step = SmoothStep::of_order(order);

    if (model.backend == ModelBackend::hofstadter) {
        const bool torus = model.lattice.boundary == Boundary::torus;
        sw.periodic = torus;
        sw.period = static_cast<double>(model.lattice.width);
        if (!torus) {
            // Four magnetic lengths of clearance, capped so weak-field
            // samples keep a usable interior.
            const double margin =
                boundary_margin >= 0.0
                    ? boundary_margin
                    : std::min(4.0 * model.magnetic_length(),
                               model.lattice.width / 8.0);
            const double edge = 0.5 * (model.lattice.width - 1);
            if (center - half_width < -edge + margin ||
                center + half_width > edge - margin) {
                throw std::invalid_argument(
                    "switch: support overlaps the open-boundary margin");
            }
        }
        const RVec& coords = model.coordinate(direction);
        sw.is_diagonal = true;
        sw.diag.resize(coords.size());
        for (Eigen::Index i = 0; i < coords.size(); ++i) {
            sw.diag(i) = sw.profile(coords(i));
        }
        return sw;
    }

    // Landau backend: project the profile onto the truncated basis. The
    // panel quadrature gets the profile edges as break points.
    if (order < 0) {
        throw std::invalid_argument("switch: sharp steps are lattice-only");
    }
    sw.is_diagonal = false;
    const std::vector<double> edges{center - half_width, center + half_width};
    auto f = [&sw, direction](double x1, double x2) {
        return sw.profile(direction == Axis::x1 ? x1 : x2);
    };
    if (direction == Axis::x1) {
        sw.dense = model.basis->project_scalar(f, 1e-8, nullptr, edges, {});
    } else {
        sw.dense = model.basis->project_scalar(f, 1e-8, nullptr, {}, edges);
    }
    return sw;
}

Mat current_operator(const MagneticModel& model, const SwitchFunction& lambda2) {
    if (lambda2.dim() != model.dim()) {
        throw std::invalid_argument("current: switch/model dimension mismatch");
    }
    if (lambda2.is_diagonal) {
        return commutator_with_diagonal(model.hamiltonian, lambda2.diag);
    }
    return commutator(model.hamiltonian, lambda2.dense);
}

}  // namespace hallab
