#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "ellipq/core.hpp"

namespace ellipq {

template <class Real>
struct ThetaSums {
    std::complex<Real> value;
    std::complex<Real> deriv;
    Real scale; // sum of |terms|, the local magnitude the series is built from
};

// Window of 2R+1 terms centred on the dominant index of the Gaussian,
// so the cut is relative to the largest term wherever z sits.
template <class Real>
ThetaSums<Real> theta_sums(std::complex<Real> z, std::complex<Real> eta, int radius) {
    using C = std::complex<Real>;
    const Real tau_im = eta.imag();
    const Real centre = Real(0.5) - z.imag() / tau_im;
    const long a0 = std::lround(centre);
    const C tpi(0, 2 * std::numbers::pi_v<Real>);
    C v(0), dv(0);
    Real scale = 0;
    for (long a = a0 - radius; a <= a0 + radius; ++a) {
        const Real ar = Real(a);
        C t = std::exp(tpi * (ar * z + ar * (ar - 1) / 2 * eta));
        if (a % 2 != 0) t = -t;
        v += t;
        dv += tpi * ar * t;
        scale += std::abs(t);
    }
    return {v, dv, scale};
}

Complex theta_eval(Complex z, const LatticeParams& lat);
Complex theta_deriv(Complex z, const LatticeParams& lat);
// theta'/theta; throws PoleProximityError when |theta(z)| < 1e-10 * local scale
Complex theta_logd(Complex z, const LatticeParams& lat);
Complex theta_prime_zero(const LatticeParams& lat);
// theta(z) for use in a denominator; same guard as theta_logd
Complex theta_guarded(Complex z, const LatticeParams& lat);

// distance from w to the nearest point of Z + eta Z
double lattice_distance(Complex w, Complex eta);

struct ThetaTag {
    enum class Kind { scalar, multi };
    Kind kind = Kind::scalar;
    int m = 1;
    Complex c{0.0, 0.0};
    Seq n_vec;

    static ThetaTag scalar(int m, Complex c);
    static ThetaTag multi(Seq n_vec);

    std::size_t arity() const { return kind == Kind::scalar ? 1 : n_vec.size(); }
    // the law as a sequence: (m) for scalar tags
    Seq law() const { return kind == Kind::scalar ? Seq{m} : n_vec; }
    Complex shift() const { return kind == Kind::scalar ? c : Complex{}; }
};

bool operator==(const ThetaTag& a, const ThetaTag& b);

// f(z) = sum_k c_k exp(2 pi i k.z); coefficients kept as logarithms so that
// Gaussian tails do not underflow before they meet the exponential growth.
class ThetaElement {
public:
    ThetaElement(ThetaTag tag, LatticeParams lat, std::size_t arity);

    // log-coefficient entries; duplicates of k are merged
    void add_term(std::span<const int> k, Complex log_coeff);

    const ThetaTag& tag() const { return tag_; }
    const LatticeParams& lattice() const { return lat_; }
    std::size_t arity() const { return p_; }
    std::size_t size() const { return logc_.size(); }

    std::span<const int> exponent(std::size_t t) const { return {k_.data() + t * p_, p_}; }
    Complex coefficient(std::size_t t) const { return std::exp(logc_[t]); }
    Complex log_coefficient(std::size_t t) const { return logc_[t]; }
    std::optional<Complex> coefficient_of(std::span<const int> k) const;

    Complex operator()(std::span<const Complex> z) const;
    Complex operator()(Complex z) const { return (*this)(std::span<const Complex>(&z, 1)); }
    Complex partial(std::span<const Complex> z, std::size_t j) const;
    Eigen::VectorXcd gradient(std::span<const Complex> z) const;

    // a*f + b*g, same tag and arity
    static ThetaElement combine(Complex a, const ThetaElement& f, Complex b, const ThetaElement& g);

private:
    ThetaTag tag_;
    LatticeParams lat_;
    std::size_t p_;
    std::vector<int> k_;
    std::vector<Complex> logc_;
    std::map<std::vector<int>, std::size_t> index_;
};

// evaluation accuracy is maintained for |Im z_j| <= support_height(lat)
double support_height(const LatticeParams& lat);

std::vector<ThetaElement> theta_basis(int m, Complex c, const LatticeParams& lat);
std::vector<ThetaElement> multi_theta_basis(const Seq& n_vec, const LatticeParams& lat);

// tridiagonal matrix with diagonal n_i and -1 off the diagonal
Eigen::MatrixXi tridiagonal(const Seq& n_vec);

struct SmithForm {
    Eigen::Matrix<long long, Eigen::Dynamic, 1> diag;
    Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> U, W; // U * A * W = diag(diag)
};

SmithForm smith_normal_form(const Eigen::MatrixXi& a);

// one vector per coset of V Z^p in Z^p, in lexicographic order of the SNF box
// index, each reduced into the half-open cell V [0,1)^p
std::vector<Eigen::VectorXi> coset_representatives(const Seq& n_vec);

// log c_k along a path of unit moves (axis, +1/-1) starting from c_r = 1;
// returns the endpoint k together with log c_k
std::pair<Eigen::VectorXi, Complex> accumulate_log_coefficient(
    const Seq& n_vec, Complex eta, const Eigen::VectorXi& r,
    const std::vector<std::pair<int, int>>& path);

// closed form of the same quantity for k = r + V m
Complex multi_theta_log_coefficient(const Seq& n_vec, Complex eta, const Eigen::VectorXi& r,
                                    const Eigen::VectorXi& m);

// numerical rank of [f_j(points_i)] with cutoff rel * largest singular value
int gram_rank(const std::vector<ThetaElement>& basis,
              const std::vector<std::vector<Complex>>& points, double rel = 1e-8);

} // namespace ellipq
