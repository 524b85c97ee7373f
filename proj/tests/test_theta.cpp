#include "helpers.hpp"

#include <Eigen/Dense>

#include "ellipq/seqcomb.hpp"
#include "ellipq/theta.hpp"

using namespace ellipq;
using testing_support::lattice;
using testing_support::points;

namespace {

// Jacobi triple product, an independent route to the same function:
// theta(z) = prod_{m>=1} (1 - q^{2m}) (1 - q^{2m-2} x) (1 - q^{2m} / x), q = e^{i pi eta}, x = e^{2 pi i z}
Complex theta_product(Complex z, Complex eta) {
    const Complex q = std::exp(Complex(0, pi) * eta);
    const Complex x = std::exp(two_pi_i * z);
    Complex r = 1;
    Complex q2m = q * q, q2m2 = 1.0;
    for (int m = 1; m < 200; ++m) {
        r *= (1.0 - q2m) * (1.0 - q2m2 * x) * (1.0 - q2m / x);
        q2m2 = q2m;
        q2m *= q * q;
        if (std::abs(q2m) < 1e-30) break;
    }
    return r;
}

} // namespace

TEST_CASE("theta vanishes at the origin") {
    for (Complex eta : {Complex(0, 1), Complex(0.3, 0.8)}) {
        auto lat = lattice(eta);
        CHECK(std::abs(theta_eval(0.0, lat)) < 1e-12);
    }
}

TEST_CASE("theta agrees with the triple product") {
    for (Complex eta : {Complex(0, 1), Complex(0.3, 0.8), Complex(-0.2, 0.55)}) {
        auto lat = lattice(eta);
        for (auto& z : points(1, 40, 3, eta)) {
            const Complex a = theta_eval(z[0], lat), b = theta_product(z[0], eta);
            CHECK(mixed_residual(a, b) < 1e-12);
        }
    }
}

TEST_CASE("theta periodicity, quasi-periodicity, reflection") {
    for (Complex eta : {Complex(0, 1), Complex(0.3, 0.8)}) {
        auto lat = lattice(eta);
        for (auto& p : points(1, 100, 11, eta)) {
            const Complex z = p[0], t = theta_eval(z, lat);
            CHECK(mixed_residual(theta_eval(z + 1.0, lat), t) < 1e-10);
            CHECK(mixed_residual(theta_eval(z + eta, lat), -std::exp(-two_pi_i * z) * t) < 1e-10);
            CHECK(mixed_residual(theta_eval(-z, lat), -std::exp(-two_pi_i * z) * t) < 1e-10);
        }
    }
}

TEST_CASE("truncation radius is converged") {
    auto lat = lattice(Complex(0, 1));
    auto wide = lat;
    wide.radius += 10;
    const Complex z(0.3, 0.1);
    CHECK(std::abs(theta_eval(z, lat) - theta_eval(z, wide)) < 1e-12);
    CHECK(LatticeParams::radius_for(Complex(0, 1), 1e-16) >= 4);
    // the defining inequality for the chosen radius
    const int r = lat.radius;
    CHECK(std::exp(-2 * pi * 1.0 * r * r / 4) < lat.tol);
    CHECK(std::exp(-2 * pi * 1.0 * (r - 1) * (r - 1) / 4) >= lat.tol);
}

TEST_CASE("theta derivative matches a difference quotient") {
    auto lat = lattice();
    for (auto& p : points(1, 20, 5)) {
        const Complex z = p[0], h = 1e-5;
        const Complex fd = (theta_eval(z + h, lat) - theta_eval(z - h, lat)) / (2.0 * h);
        CHECK(mixed_residual(theta_deriv(z, lat), fd) < 1e-8);
    }
}

TEST_CASE("logarithmic derivative identities") {
    auto lat = lattice();
    for (auto& p : points(1, 50, 9)) {
        const Complex z = p[0];
        CHECK(mixed_residual(theta_logd(-z, lat) + theta_logd(z, lat), two_pi_i) < 1e-10);
        CHECK(mixed_residual(theta_logd(z + 1.0, lat), theta_logd(z, lat)) < 1e-10);
    }
    const Complex dir = std::polar(1.0, 0.7);
    for (double r : {1e-2, 1e-3}) {
        const Complex z = r * dir;
        CHECK(std::abs(z * theta_logd(z, lat) - 1.0) < 5 * r);
    }
}

TEST_CASE("domain errors and the pole guard") {
    LatticeParams bad;
    bad.eta = Complex(0.5, -1);
    bad.radius = 5;
    CHECK_THROWS_AS(theta_eval(0.1, bad), DomainError);
    CHECK_THROWS_AS(LatticeParams::make(Complex(1, 0)), DomainError);
    auto lat = lattice();
    CHECK_THROWS_AS(theta_eval(Complex(std::nan(""), 0), lat), DomainError);
    CHECK_THROWS_AS(theta_logd(1e-13, lat), PoleProximityError);
    CHECK_THROWS_AS(theta_logd(lat.eta + 1.0, lat), PoleProximityError);
    CHECK_NOTHROW(theta_logd(1e-5, lat));
}

TEST_CASE("theta_basis(1, 1/2) is the line through theta") {
    auto lat = lattice();
    auto b = theta_basis(1, 0.5, lat);
    REQUIRE(b.size() == 1);
    auto pts = points(1, 20, 21);
    CHECK(gram_rank(b, pts) == 1);
    const Complex ratio = b[0](pts[0][0]) / theta_eval(pts[0][0], lat);
    for (auto& p : pts) CHECK(mixed_residual(b[0](p[0]), ratio * theta_eval(p[0], lat)) < 1e-12);
}

TEST_CASE("theta_basis quasi-periodicity and rank") {
    auto lat = lattice();
    for (int m : {1, 2, 3, 5}) {
        const Complex c(0.2, 0.1);
        auto b = theta_basis(m, c, lat);
        REQUIRE(b.size() == std::size_t(m));
        auto pts = points(1, std::size_t(3 * m + 6), 17);
        CHECK(gram_rank(b, pts) == m);
        for (auto& f : b)
            for (auto& p : pts) {
                const Complex z = p[0];
                CHECK(mixed_residual(f(z + 1.0), f(z)) < 1e-9);
                CHECK(mixed_residual(f(z + lat.eta), std::exp(-two_pi_i * (double(m) * z + c)) * f(z)) < 1e-9);
            }
    }
    CHECK_THROWS_AS(theta_basis(0, 0.0, lat), DomainError);
}

TEST_CASE("Smith normal form and coset counts") {
    for (Seq n : {Seq{2}, Seq{3}, Seq{2, 2}, Seq{3, 2}, Seq{2, 2, 2}, Seq{3, 4, 2}, Seq{5, 2, 3, 2}}) {
        const Eigen::MatrixXi V = tridiagonal(n);
        auto s = smith_normal_form(V);
        Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> D = s.U * V.cast<long long>() * s.W;
        long long prod = 1;
        for (Eigen::Index i = 0; i < D.rows(); ++i)
            for (Eigen::Index j = 0; j < D.cols(); ++j)
                if (i != j) CHECK(D(i, j) == 0);
        for (Eigen::Index i = 0; i < D.rows(); ++i) {
            CHECK(D(i, i) == s.diag[i]);
            CHECK(s.diag[i] > 0);
            if (i + 1 < D.rows()) CHECK(s.diag[i + 1] % s.diag[i] == 0);
            prod *= s.diag[i];
        }
        CHECK(prod == d(n));
        auto reps = coset_representatives(n);
        CHECK(reps.size() == std::size_t(d(n)));
        // pairwise inequivalent: V^{-1}(r_i - r_j) never integral
        const Eigen::MatrixXd Vinv = V.cast<double>().inverse();
        for (std::size_t i = 0; i < reps.size(); ++i)
            for (std::size_t j = i + 1; j < reps.size(); ++j) {
                Eigen::VectorXd w = Vinv * (reps[i] - reps[j]).cast<double>();
                bool integral = true;
                for (Eigen::Index t = 0; t < w.size(); ++t)
                    if (std::abs(w[t] - std::round(w[t])) > 1e-9) integral = false;
                CHECK_FALSE(integral);
            }
    }
}

TEST_CASE("coefficient accumulation is path independent") {
    const Complex eta(0.3, 0.8);
    const Seq n{3, 2, 2};
    Eigen::VectorXi r(3);
    r << 1, 0, 1;
    // two orders of the same net displacement m = (2, -1, 1)
    std::vector<std::pair<int, int>> p1{{0, 1}, {0, 1}, {1, -1}, {2, 1}};
    std::vector<std::pair<int, int>> p2{{2, 1}, {1, -1}, {0, 1}, {1, 1}, {1, -1}, {0, 1}};
    auto [k1, l1] = accumulate_log_coefficient(n, eta, r, p1);
    auto [k2, l2] = accumulate_log_coefficient(n, eta, r, p2);
    CHECK(k1 == k2);
    CHECK(std::abs(std::exp(l1) - std::exp(l2)) < 1e-12 * std::abs(std::exp(l1)));
    Eigen::VectorXi m(3);
    m << 2, -1, 1;
    CHECK(std::abs(std::exp(l1) - std::exp(multi_theta_log_coefficient(n, eta, r, m))) <
          1e-12 * std::abs(std::exp(l1)));
}

TEST_CASE("multi_theta_basis((2)) spans Theta_{2,0}") {
    auto lat = lattice();
    auto a = multi_theta_basis({2}, lat);
    auto b = theta_basis(2, 0.0, lat);
    REQUIRE(a.size() == 2);
    auto pts = points(1, 20, 31);
    Eigen::MatrixXcd A(20, 2), B(20, 2);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 2; ++j) {
            A(i, j) = a[std::size_t(j)](pts[std::size_t(i)]);
            B(i, j) = b[std::size_t(j)](pts[std::size_t(i)]);
        }
    Eigen::MatrixXcd X = B.colPivHouseholderQr().solve(A);
    CHECK((B * X - A).norm() / A.norm() < 1e-9);
    Eigen::MatrixXcd Y = A.colPivHouseholderQr().solve(B);
    CHECK((A * Y - B).norm() / B.norm() < 1e-9);
}

TEST_CASE("multi_theta_basis rank and quasi-periodicity") {
    auto lat = lattice();
    for (Seq n : {Seq{2, 2}, Seq{3, 2}, Seq{2, 2, 2}}) {
        auto b = multi_theta_basis(n, lat);
        REQUIRE(b.size() == std::size_t(d(n)));
        const std::size_t p = n.size();
        auto pts = points(p, 3 * b.size() + 6, 41);
        CHECK(gram_rank(b, pts) == d(n));
        for (auto& f : b)
            for (std::size_t t = 0; t < 5; ++t) {
                const auto& z = pts[t];
                const Complex v = f(z);
                for (std::size_t mu = 0; mu < p; ++mu) {
                    auto w = z;
                    w[mu] += 1.0;
                    CHECK(mixed_residual(f(w), v) < 1e-9);
                    w[mu] = z[mu] + lat.eta;
                    Complex e = double(n[mu]) * z[mu];
                    if (mu > 0) e -= z[mu - 1];
                    if (mu + 1 < p) e -= z[mu + 1];
                    CHECK(mixed_residual(f(w), std::exp(-two_pi_i * e) * v) < 1e-9);
                }
            }
    }
    CHECK_THROWS_AS(multi_theta_basis({2, 1}, lat), DomainError);
}

TEST_CASE("analytic gradient of a theta element") {
    auto lat = lattice();
    auto b = multi_theta_basis({3, 2}, lat);
    auto pts = points(2, 5, 2);
    for (auto& z : pts) {
        auto g = b[1].gradient(z);
        for (std::size_t j = 0; j < 2; ++j) {
            auto zp = z, zm = z;
            zp[j] += 1e-6;
            zm[j] -= 1e-6;
            const Complex fd = (b[1](zp) - b[1](zm)) / 2e-6;
            CHECK(mixed_residual(g[Eigen::Index(j)], fd) < 1e-6);
            CHECK(mixed_residual(b[1].partial(z, j), g[Eigen::Index(j)]) < 1e-14);
        }
    }
}

TEST_CASE("combine is linear") {
    auto lat = lattice();
    auto b = theta_basis(3, 0.0, lat);
    auto h = ThetaElement::combine(2.0, b[0], Complex(0, -1), b[2]);
    for (auto& p : points(1, 10, 8))
        CHECK(mixed_residual(h(p[0]), 2.0 * b[0](p[0]) - Complex(0, 1) * b[2](p[0])) < 1e-13);
}
