#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ellipq {

using Complex = std::complex<double>;
using Seq = std::vector<int>;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex two_pi_i{0.0, 2.0 * std::numbers::pi};

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// raised when a theta denominator is too close to a zero
struct PoleProximityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExtrapolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RewriteLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LatticeParams {
    Complex eta{0.0, 1.0};
    int radius = 0;
    double tol = 1e-16;

    // radius chosen as the smallest R with exp(-2 pi Im(eta) R^2 / 4) < tol
    static LatticeParams make(Complex eta, double tol = 1e-16);
    static int radius_for(Complex eta, double tol);

    void validate() const;
};

bool operator==(const LatticeParams& a, const LatticeParams& b);

// residual used everywhere: |a-b| / (1 + max(|a|,|b|))
inline double mixed_residual(Complex a, Complex b) {
    return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
}

} // namespace ellipq
