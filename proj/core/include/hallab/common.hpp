// common.hpp — shared scalar/matrix aliases, error types, small numeric helpers
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hallab {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr cxd kI{0.0, 1.0};

// ----------------------------- error taxonomy ------------------------------

// Fermi level not certified to sit in a spectral gap.
struct NoGapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Propagator left its unitarity budget.
struct StepBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Step-halving moved a residual by more than the certification allowance.
struct IntegratorDominatedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finite-difference stencil inconsistent with its own error estimate.
struct FdUnstableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadrature (or k-grid) failed its refinement check.
struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A sweep retained no usable grid points.
struct EmptyGridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration file rejected.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ----------------------------- numeric helpers -----------------------------

// Largest singular value.
double operator_norm(const Mat& a);

// ‖A − A†‖_F / max(1, ‖A‖_F)
double hermitian_defect(const Mat& a);

// ‖A + A†‖_F / max(1, ‖A‖_F)
double antihermitian_defect(const Mat& a);

inline Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

// [H, diag(v)]_{ij} = H_{ij} (v_j - v_i); plateau regions cancel bit-exactly.
Mat commutator_with_diagonal(const Mat& h, const RVec& v);

// FNV-1a over raw bytes; used to key eigensystem caches and manifests.
std::uint64_t fnv1a(const void* data, std::size_t n,
                    std::uint64_t seed = 1469598103934665603ull);

// Round-trip-exact decimal formatting (%.17g), used by every CSV/JSON writer.
std::string format_double(double x);

}  // namespace hallab
