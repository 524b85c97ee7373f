#include "ellipq/theta.hpp"

#include <algorithm>
#include <map>

namespace ellipq {

namespace {

void require_finite(Complex z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw DomainError("non-finite argument");
}

// terms whose bound over the support strip is below this are dropped
constexpr double log_prune = -45.0;

} // namespace

int LatticeParams::radius_for(Complex eta, double tol) {
    if (!(eta.imag() > 0)) throw DomainError("Im(eta) must be positive");
    if (!(tol > 0) || tol >= 1) throw DomainError("tol must lie in (0,1)");
    const double r2 = -4.0 * std::log(tol) / (2.0 * pi * eta.imag());
    int r = std::max(1, int(std::ceil(std::sqrt(r2))));
    while (std::exp(-2.0 * pi * eta.imag() * r * r / 4.0) >= tol) ++r;
    while (r > 1 && std::exp(-2.0 * pi * eta.imag() * (r - 1) * (r - 1) / 4.0) < tol) --r;
    return r;
}

LatticeParams LatticeParams::make(Complex eta, double tol) {
    LatticeParams lat;
    lat.eta = eta;
    lat.tol = tol;
    lat.radius = radius_for(eta, tol);
    return lat;
}

void LatticeParams::validate() const {
    if (!(eta.imag() > 0)) throw DomainError("Im(eta) must be positive");
    if (radius < 1) throw DomainError("radius must be at least 1");
    if (!(tol > 0)) throw DomainError("tol must be positive");
}

bool operator==(const LatticeParams& a, const LatticeParams& b) {
    return a.eta == b.eta && a.radius == b.radius && a.tol == b.tol;
}

Complex theta_eval(Complex z, const LatticeParams& lat) {
    lat.validate();
    require_finite(z);
    return theta_sums<double>(z, lat.eta, lat.radius).value;
}

Complex theta_deriv(Complex z, const LatticeParams& lat) {
    lat.validate();
    require_finite(z);
    return theta_sums<double>(z, lat.eta, lat.radius).deriv;
}

Complex theta_logd(Complex z, const LatticeParams& lat) {
    lat.validate();
    require_finite(z);
    auto s = theta_sums<double>(z, lat.eta, lat.radius);
    if (std::abs(s.value) < 1e-10 * s.scale)
        throw PoleProximityError("theta_logd: argument too close to a lattice point");
    return s.deriv / s.value;
}

Complex theta_prime_zero(const LatticeParams& lat) { return theta_deriv(0.0, lat); }

Complex theta_guarded(Complex z, const LatticeParams& lat) {
    require_finite(z);
    auto s = theta_sums<double>(z, lat.eta, lat.radius);
    if (std::abs(s.value) < 1e-10 * s.scale)
        throw PoleProximityError("theta denominator too close to a lattice point");
    return s.value;
}

double lattice_distance(Complex w, Complex eta) {
    const double b = w.imag() / eta.imag();
    const double a = w.real() - b * eta.real();
    const double a0 = std::floor(a), b0 = std::floor(b);
    double best = std::abs(w);
    for (int i = -1; i <= 2; ++i)
        for (int j = -1; j <= 2; ++j)
            best = std::min(best, std::abs(w - (a0 + i) - (b0 + j) * eta));
    return best;
}

ThetaTag ThetaTag::scalar(int m, Complex c) {
    if (m < 1) throw DomainError("scalar theta tag needs m >= 1");
    ThetaTag t;
    t.kind = Kind::scalar;
    t.m = m;
    t.c = c;
    return t;
}

ThetaTag ThetaTag::multi(Seq n_vec) {
    if (n_vec.empty()) throw DomainError("empty sequence");
    for (int n : n_vec)
        if (n < 2) throw DomainError("sequence entries must be >= 2");
    ThetaTag t;
    t.kind = Kind::multi;
    t.n_vec = std::move(n_vec);
    return t;
}

bool operator==(const ThetaTag& a, const ThetaTag& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == ThetaTag::Kind::scalar) return a.m == b.m && a.c == b.c;
    return a.n_vec == b.n_vec;
}

double support_height(const LatticeParams& lat) { return 2.0 * lat.eta.imag(); }

ThetaElement::ThetaElement(ThetaTag tag, LatticeParams lat, std::size_t arity)
    : tag_(std::move(tag)), lat_(lat), p_(arity) {
    lat_.validate();
    if (p_ == 0) throw DomainError("arity must be positive");
}

void ThetaElement::add_term(std::span<const int> k, Complex log_coeff) {
    if (k.size() != p_) throw DomainError("exponent arity mismatch");
    double norm1 = 0;
    for (int v : k) norm1 += std::abs(v);
    if (log_coeff.real() + 2 * pi * norm1 * support_height(lat_) < log_prune) return;
    std::vector<int> key(k.begin(), k.end());
    auto it = index_.find(key);
    if (it != index_.end()) {
        const std::size_t t = it->second;
        // log(e^a + e^b) without leaving the log domain
        Complex a = logc_[t], b = log_coeff;
        if (a.real() < b.real()) std::swap(a, b);
        Complex s = 1.0 + std::exp(b - a);
        if (std::abs(s) == 0) {
            logc_.erase(logc_.begin() + std::ptrdiff_t(t));
            k_.erase(k_.begin() + std::ptrdiff_t(t * p_), k_.begin() + std::ptrdiff_t((t + 1) * p_));
            index_.erase(it);
            for (auto& [kk, idx] : index_)
                if (idx > t) --idx;
        } else {
            logc_[t] = a + std::log(s);
        }
        return;
    }
    index_.emplace(std::move(key), logc_.size());
    k_.insert(k_.end(), k.begin(), k.end());
    logc_.push_back(log_coeff);
}

std::optional<Complex> ThetaElement::coefficient_of(std::span<const int> k) const {
    auto it = index_.find(std::vector<int>(k.begin(), k.end()));
    if (it == index_.end()) return std::nullopt;
    return std::exp(logc_[it->second]);
}

Complex ThetaElement::operator()(std::span<const Complex> z) const {
    if (z.size() != p_) throw DomainError("ThetaElement: wrong number of arguments");
    Complex s = 0;
    for (std::size_t t = 0; t < logc_.size(); ++t) {
        Complex e = logc_[t];
        const int* k = k_.data() + t * p_;
        for (std::size_t j = 0; j < p_; ++j) e += two_pi_i * double(k[j]) * z[j];
        s += std::exp(e);
    }
    return s;
}

Complex ThetaElement::partial(std::span<const Complex> z, std::size_t j) const {
    if (z.size() != p_ || j >= p_) throw DomainError("ThetaElement: bad partial");
    Complex s = 0;
    for (std::size_t t = 0; t < logc_.size(); ++t) {
        const int* k = k_.data() + t * p_;
        if (k[j] == 0) continue;
        Complex e = logc_[t];
        for (std::size_t i = 0; i < p_; ++i) e += two_pi_i * double(k[i]) * z[i];
        s += two_pi_i * double(k[j]) * std::exp(e);
    }
    return s;
}

Eigen::VectorXcd ThetaElement::gradient(std::span<const Complex> z) const {
    if (z.size() != p_) throw DomainError("ThetaElement: wrong number of arguments");
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(Eigen::Index(p_));
    for (std::size_t t = 0; t < logc_.size(); ++t) {
        const int* k = k_.data() + t * p_;
        Complex e = logc_[t];
        for (std::size_t i = 0; i < p_; ++i) e += two_pi_i * double(k[i]) * z[i];
        const Complex v = two_pi_i * std::exp(e);
        for (std::size_t i = 0; i < p_; ++i) g[Eigen::Index(i)] += double(k[i]) * v;
    }
    return g;
}

ThetaElement ThetaElement::combine(Complex a, const ThetaElement& f, Complex b,
                                   const ThetaElement& g) {
    if (!(f.tag_ == g.tag_) || f.p_ != g.p_ || !(f.lat_ == g.lat_))
        throw DomainError("combine: elements of different spaces");
    ThetaElement out(f.tag_, f.lat_, f.p_);
    if (a != 0.0)
        for (std::size_t t = 0; t < f.size(); ++t) out.add_term(f.exponent(t), f.logc_[t] + std::log(a));
    if (b != 0.0)
        for (std::size_t t = 0; t < g.size(); ++t) out.add_term(g.exponent(t), g.logc_[t] + std::log(b));
    return out;
}

std::vector<ThetaElement> theta_basis(int m, Complex c, const LatticeParams& lat) {
    if (m < 1) throw DomainError("theta_basis: m must be >= 1");
    lat.validate();
    const int J = lat.radius + 3;
    std::vector<ThetaElement> out;
    for (int r = 0; r < m; ++r) {
        ThetaElement f(ThetaTag::scalar(m, c), lat, 1);
        // c_{k+m} = exp(2 pi i (k eta + c)) c_k, walked out from c_r = 1
        Complex up = 0, down = 0;
        int k = r;
        f.add_term(std::span<const int>(&k, 1), 0.0);
        for (int j = 1; j <= J; ++j) {
            up += two_pi_i * (double(r + m * (j - 1)) * lat.eta + c);
            int kk = r + m * j;
            f.add_term(std::span<const int>(&kk, 1), up);
            down -= two_pi_i * (double(r - m * j) * lat.eta + c);
            kk = r - m * j;
            f.add_term(std::span<const int>(&kk, 1), down);
        }
        out.push_back(std::move(f));
    }
    return out;
}

Eigen::MatrixXi tridiagonal(const Seq& n_vec) {
    const int p = int(n_vec.size());
    Eigen::MatrixXi v = Eigen::MatrixXi::Zero(p, p);
    for (int i = 0; i < p; ++i) {
        v(i, i) = n_vec[i];
        if (i > 0) v(i, i - 1) = -1;
        if (i + 1 < p) v(i, i + 1) = -1;
    }
    return v;
}

SmithForm smith_normal_form(const Eigen::MatrixXi& a) {
    using M = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index n = a.rows(), m = a.cols();
    M A = a.cast<long long>();
    M U = M::Identity(n, n), W = M::Identity(m, m);
    const Eigen::Index lim = std::min(n, m);
    for (Eigen::Index t = 0; t < lim; ++t) {
        while (true) {
            // smallest nonzero pivot in the trailing block
            Eigen::Index pi_ = -1, pj = -1;
            long long best = 0;
            for (Eigen::Index i = t; i < n; ++i)
                for (Eigen::Index j = t; j < m; ++j)
                    if (A(i, j) != 0 && (best == 0 || std::llabs(A(i, j)) < best)) {
                        best = std::llabs(A(i, j));
                        pi_ = i;
                        pj = j;
                    }
            if (pi_ < 0) break;
            A.row(t).swap(A.row(pi_));
            U.row(t).swap(U.row(pi_));
            A.col(t).swap(A.col(pj));
            W.col(t).swap(W.col(pj));
            bool clean = true;
            for (Eigen::Index i = t + 1; i < n; ++i) {
                long long q = A(i, t) / A(t, t);
                A.row(i) -= q * A.row(t);
                U.row(i) -= q * U.row(t);
                if (A(i, t) != 0) clean = false;
            }
            for (Eigen::Index j = t + 1; j < m; ++j) {
                long long q = A(t, j) / A(t, t);
                A.col(j) -= q * A.col(t);
                W.col(j) -= q * W.col(t);
                if (A(t, j) != 0) clean = false;
            }
            if (!clean) continue;
            // divisibility: fold an offending row into row t and retry
            bool divides = true;
            for (Eigen::Index i = t + 1; i < n && divides; ++i)
                for (Eigen::Index j = t + 1; j < m; ++j)
                    if (A(i, j) % A(t, t) != 0) {
                        A.row(t) += A.row(i);
                        U.row(t) += U.row(i);
                        divides = false;
                        break;
                    }
            if (divides) break;
        }
        if (A(t, t) < 0) {
            A.row(t) *= -1;
            U.row(t) *= -1;
        }
    }
    SmithForm s;
    s.diag = A.diagonal();
    s.U = U;
    s.W = W;
    return s;
}

namespace {

using MatLL = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using VecLL = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

long long floor_div(long long a, long long b) {
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// adjugate of a small integer matrix through cofactors
MatLL adjugate(const MatLL& a) {
    const Eigen::Index n = a.rows();
    MatLL adj(n, n);
    if (n == 1) {
        adj(0, 0) = 1;
        return adj;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            Eigen::MatrixXd minor(n - 1, n - 1);
            for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
                if (r == i) continue;
                for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
                    if (c == j) continue;
                    minor(rr, cc++) = double(a(r, c));
                }
                ++rr;
            }
            long long cof = std::llround(minor.determinant());
            adj(j, i) = ((i + j) % 2 ? -cof : cof);
        }
    return adj;
}

} // namespace

std::vector<Eigen::VectorXi> coset_representatives(const Seq& n_vec) {
    const Eigen::MatrixXi V = tridiagonal(n_vec);
    const SmithForm s = smith_normal_form(V);
    const Eigen::Index p = V.rows();
    const MatLL Vll = V.cast<long long>();
    const MatLL adj = adjugate(Vll);
    const long long det = std::llround(V.cast<double>().determinant());
    // U^{-1} = adj(U)/det(U), det(U) = +-1
    const MatLL Uadj = adjugate(s.U);
    const long long detU = std::llround(s.U.cast<double>().determinant());

    std::vector<Eigen::VectorXi> reps;
    VecLL box = VecLL::Zero(p);
    while (true) {
        VecLL r = (Uadj * box) * detU;
        // reduce into V [0,1)^p: r - V floor(V^{-1} r)
        VecLL num = adj * r;
        VecLL fl(p);
        for (Eigen::Index i = 0; i < p; ++i) fl[i] = floor_div(num[i], det);
        r -= Vll * fl;
        reps.push_back(r.cast<int>());
        Eigen::Index i = p - 1;
        while (i >= 0 && ++box[i] >= s.diag[i]) box[i--] = 0;
        if (i < 0) break;
    }
    return reps;
}

std::pair<Eigen::VectorXi, Complex> accumulate_log_coefficient(
    const Seq& n_vec, Complex eta, const Eigen::VectorXi& r,
    const std::vector<std::pair<int, int>>& path) {
    const Eigen::MatrixXi V = tridiagonal(n_vec);
    Eigen::VectorXi k = r;
    Complex lc = 0;
    for (auto [axis, dir] : path) {
        if (dir > 0) {
            lc += two_pi_i * double(k[axis]) * eta;
            k += V.row(axis).transpose();
        } else {
            k -= V.row(axis).transpose();
            lc -= two_pi_i * double(k[axis]) * eta;
        }
    }
    return {k, lc};
}

Complex multi_theta_log_coefficient(const Seq& n_vec, Complex eta, const Eigen::VectorXi& r,
                                    const Eigen::VectorXi& m) {
    const Eigen::MatrixXi V = tridiagonal(n_vec);
    double e = double(m.dot(r)) + 0.5 * double(m.dot(V * m));
    for (std::size_t a = 0; a < n_vec.size(); ++a) e -= 0.5 * n_vec[a] * m[Eigen::Index(a)];
    return two_pi_i * eta * e;
}

std::vector<ThetaElement> multi_theta_basis(const Seq& n_vec, const LatticeParams& lat) {
    lat.validate();
    const ThetaTag tag = ThetaTag::multi(n_vec);
    const Eigen::MatrixXi V = tridiagonal(n_vec);
    const int p = int(n_vec.size());
    const int R = lat.radius + 3;
    std::vector<ThetaElement> out;
    for (const auto& r : coset_representatives(n_vec)) {
        ThetaElement f(tag, lat, std::size_t(p));
        Eigen::VectorXi m = Eigen::VectorXi::Constant(p, -R);
        while (true) {
            Eigen::VectorXi k = r + V * m;
            f.add_term(std::span<const int>(k.data(), std::size_t(p)),
                       multi_theta_log_coefficient(n_vec, lat.eta, r, m));
            int i = p - 1;
            while (i >= 0 && ++m[i] > R) m[i--] = -R;
            if (i < 0) break;
        }
        out.push_back(std::move(f));
    }
    return out;
}

int gram_rank(const std::vector<ThetaElement>& basis,
              const std::vector<std::vector<Complex>>& points, double rel) {
    if (basis.empty()) return 0;
    Eigen::MatrixXcd A(Eigen::Index(points.size()), Eigen::Index(basis.size()));
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = 0; j < basis.size(); ++j)
            A(Eigen::Index(i), Eigen::Index(j)) = basis[j](points[i]);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] == 0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > rel * sv[0]) ++rank;
    return rank;
}

} // namespace ellipq
