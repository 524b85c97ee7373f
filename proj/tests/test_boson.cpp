#include "helpers.hpp"

#include "ellipq/boson.hpp"

using namespace ellipq;
using testing_support::lattice;

namespace {

const Complex tau0{0.031, 0.017};

SiteConfig config(std::vector<BosonFactor> f, ShiftConvention c, Complex tau = tau0,
                  ZCoupling z = ZCoupling::printed) {
    SiteConfig s;
    s.factors = std::move(f);
    s.tau = tau;
    s.lat = lattice();
    s.convention = c;
    s.zcoupling = z;
    return s;
}

std::vector<Complex> sample(const BosonAlgebra& alg, std::uint64_t seed) {
    SampleSpec spec;
    spec.seed = seed;
    Sampler smp(spec, lattice().eta);
    return alg.point(smp);
}

double worst_confluence(const BosonAlgebra& alg, std::size_t words, std::size_t maxlen, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double r = 0;
    for (std::size_t i = 0; i < words; ++i) {
        const auto y = sample(alg, seed + i);
        auto w = random_word(alg, 2 + i % (maxlen - 1), rng);
        r = std::max(r, confluence_residual(alg, w, y));
    }
    return r;
}

} // namespace

TEST_CASE("segments") {
    CHECK(segments({0, 1, 0, 2}, {1, 1, 2, 2}) == std::vector<Segment>{{0, 0}, {2, 2}});
    CHECK(segments({0, 1, 2}, {1, 0, 0}) == std::vector<Segment>{{0, 2}});
    CHECK(segments({1, 1}, {1, 1}).empty());
    CHECK_THROWS_AS(segments({1}, {1, 2}), DomainError);
}

TEST_CASE("single site law reproduces the exchange relation and shifts") {
    for (int n : {2, 3}) {
        BosonAlgebra alg(config({{{n}, {3}}}, ShiftConvention::absolute));
        BosonGenerator e0{0, {0}}, e1{0, {1}};
        CHECK(alg.shift(e0, alg.y_index(0, 0, 0)) == Rational(n - 2));
        CHECK(alg.shift(e0, alg.y_index(0, 0, 2)) == Rational(-2));
        const auto y = sample(alg, 5);
        auto s = alg.evaluate(alg.exchange(e1, e0), y);
        REQUIRE(s.size() == 1);
        CHECK(s.begin()->first == NCWord{e0, e1});
        const Complex u = y[0] - y[1], nt = double(n) * tau0;
        const Complex expect = std::exp(-two_pi_i * nt) * theta_eval(u + nt, lattice()) / theta_eval(u - nt, lattice());
        CHECK(mixed_residual(s.begin()->second, expect) < 1e-13);
        CHECK_FALSE(alg.needs_rewrite(e0, e1));
        CHECK(alg.needs_rewrite(e1, e0));
    }
}

TEST_CASE("coefficients see shifts of the generators they pass") {
    BosonAlgebra alg(config({{{3}, {2}}}, ShiftConvention::absolute));
    BosonGenerator e0{0, {0}};
    BosonTerm t;
    t.coeff.multiply(std::make_shared<const Coefficient::Fn>([](std::span<const Complex> y) { return y[1]; }));
    t.word = {};
    auto prod = alg.multiply({{Coefficient(1.0), {e0}}}, {t});
    const std::vector<Complex> y{Complex(0.1, 0.2), Complex(0.4, 0.1)};
    // e0 y1 = (y1 - 2 tau) e0
    CHECK(mixed_residual(alg.evaluate(prod, y).at({e0}), y[1] - 2.0 * tau0) < 1e-15);
}

TEST_CASE("tau = 0 limit") {
    BosonAlgebra alg(config({{{3, 2, 2}, {2, 3, 2}}}, ShiftConvention::absolute, 0.0));
    const auto y = sample(alg, 9);
    BosonGenerator a{0, {1, 2, 0}}, b{0, {0, 1, 1}};
    auto ex = alg.evaluate(alg.exchange(a, b), y);
    CHECK(mixed_residual(ex.at({b, a}), 1.0) < 1e-14);
    for (auto& [w, v] : ex)
        if (w != NCWord{b, a}) CHECK(std::abs(v) < 1e-14);

    // commuting values e_a = prod_mu E(mu, a_mu, a_mu+1) satisfy every segment swap
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::map<std::tuple<int, int, int>, Complex> E;
    auto value = [&](const BosonGenerator& g) {
        Complex v = 1;
        for (std::size_t mu = 0; mu + 1 < g.sites.size(); ++mu) {
            auto key = std::make_tuple(int(mu), g.sites[mu], g.sites[mu + 1]);
            if (!E.count(key)) E[key] = Complex(u(rng), u(rng));
            v *= E[key];
        }
        return v;
    };
    for (int i = 0; i < 20; ++i) {
        auto w = random_word(alg, 3, rng);
        Complex direct = 1, reordered = 0;
        for (auto& g : w) direct *= value(g);
        for (auto& [word, c] : alg.evaluate(alg.normal_order({{Coefficient(1.0), w}}), y)) {
            Complex v = c;
            for (auto& g : word) v *= value(g);
            reordered += v;
        }
        CHECK(mixed_residual(direct, reordered) < 1e-12);
    }
}

TEST_CASE("confluence") {
    SUBCASE("one coordinate") {
        for (int n : {2, 3}) CHECK(worst_confluence(BosonAlgebra(config({{{n}, {3}}}, ShiftConvention::absolute)), 12, 4, 11) < 1e-9);
    }
    SUBCASE("two coordinates") {
        CHECK(worst_confluence(BosonAlgebra(config({{{3, 2}, {3, 3}}}, ShiftConvention::absolute)), 12, 4, 13) < 1e-9);
    }
    SUBCASE("two factors") {
        BosonAlgebra alg(config({{{3, 2}, {2, 2}}, {{2}, {3}}}, ShiftConvention::ratio));
        CHECK(worst_confluence(alg, 12, 4, 17) < 1e-9);
    }
    SUBCASE("three factors") {
        std::vector<BosonFactor> f{{{2}, {2}}, {{3}, {2}}, {{2}, {2}}};
        BosonAlgebra done(config(f, ShiftConvention::ratio, tau0, ZCoupling::completed));
        BosonAlgebra printed(config(f, ShiftConvention::ratio));
        CHECK(worst_confluence(done, 12, 4, 19) < 1e-9);
        // the word e_0 e_2 e_1 meets both orders of the outer pair
        NCWord w{{2, {0}}, {1, {0}}, {0, {0}}};
        const auto y = sample(printed, 23);
        CHECK(confluence_residual(done, w, y) < 1e-9);
        CHECK(confluence_residual(printed, w, y) > 1e-4);
    }
    SUBCASE("three coordinates") {
        // overlapping segment swaps do not close for p = 3, even without deformation
        NCWord w{{0, {0, 1, 0}}, {0, {0, 0, 1}}, {0, {1, 0, 0}}};
        for (Complex t : {Complex(0.0), tau0}) {
            BosonAlgebra alg(config({{{2, 2, 2}, {2, 2, 2}}}, ShiftConvention::absolute, t));
            CHECK(confluence_residual(alg, w, sample(alg, 29)) > 1e-3);
        }
    }
}

TEST_CASE("double exchange is the identity") {
    BosonAlgebra alg(config({{{3, 2}, {2, 2}}, {{2}, {3}}}, ShiftConvention::ratio));
    const auto y = sample(alg, 31);
    auto gens = alg.generators();
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = 0; j < gens.size(); ++j) {
            if (i == j) continue;
            CHECK(double_exchange_residual(alg, gens[i], gens[j], y) < 1e-10);
        }
}

TEST_CASE("rewrite limit and argument checks") {
    BosonAlgebra alg(config({{{3}, {4}}}, ShiftConvention::absolute));
    NCWord w{{0, {3}}, {0, {2}}, {0, {1}}, {0, {0}}};
    CHECK_THROWS_AS(alg.normal_order({{Coefficient(1.0), w}}, RewriteStrategy::leftmost, 2), RewriteLimitError);
    CHECK_THROWS_AS(alg.check({0, {4}}), DomainError);
    CHECK_THROWS_AS(alg.check({1, {0}}), DomainError);
    auto b = multi_theta_basis({2}, lattice());
    CHECK_THROWS_AS(alg.x_embed(SymElement::lift(b[0])), DomainError);
    CHECK_THROWS_AS(BosonAlgebra(config({{{3}, {0}}}, ShiftConvention::absolute)), DomainError);
}

TEST_CASE("product is associative") {
    BosonAlgebra alg(config({{{3, 2}, {2, 2}}, {{2}, {2}}}, ShiftConvention::ratio));
    std::mt19937_64 rng(37);
    const auto y = sample(alg, 37);
    auto single = [&](std::uint64_t s) {
        BosonTerm t;
        t.coeff.multiply(std::make_shared<const Coefficient::Fn>(
            [s](std::span<const Complex> v) { return std::exp(double(s) * 0.3 * v[s % v.size()]); }));
        t.word = random_word(alg, 2, rng);
        return BosonSum{t};
    };
    auto a = single(1), b = single(2), c = single(3);
    auto l = alg.evaluate(alg.normal_order(alg.multiply(alg.multiply(a, b), c)), y);
    auto r = alg.evaluate(alg.normal_order(alg.multiply(a, alg.multiply(b, c))), y);
    REQUIRE(l.size() == r.size());
    for (auto& [w, v] : l) CHECK(mixed_residual(v, r.at(w)) < 1e-10);
}

TEST_CASE("x embedding against the star product") {
    for (int n : {2, 3}) {
        const Complex tau{0.021, 0.013};
        BosonAlgebra alg(config({{{n}, {3}}}, ShiftConvention::absolute, tau));
        auto b = theta_basis(n, -double(n) * tau, lattice());
        auto f = SymElement::lift(b[0]), g = SymElement::lift(b[std::size_t(n - 1)]);
        for (std::uint64_t s : {41, 43, 47}) {
            auto r = homomorphism_residual(alg, f, g, sample(alg, s));
            CHECK(r.derived_max < 1e-10);
            // the rule with a plain -2 tau shift in the second slot does not match
            CHECK(r.literal_max > 1e-3);
        }
    }
}

TEST_CASE("shifts against the generator bracket table") {
    auto c = semiclassical_shift_check(config({{{3, 2}, {2, 2}}, {{2}, {3}}}, ShiftConvention::ratio));
    CHECK(c.mismatches == 0);
    CHECK(c.compared > 0);
    CHECK(c.own_site_uniform);
    CHECK(c.own_site_offset == Rational(1));
    auto c3 = semiclassical_shift_check(
        config({{{2}, {2}}, {{3}, {2}}, {{2}, {2}}}, ShiftConvention::ratio, tau0, ZCoupling::completed));
    CHECK(c3.mismatches == 0);

    // the absolute steps are d(N) times the ratio steps
    SiteConfig abs = config({{{3, 2}, {2, 2}}}, ShiftConvention::absolute);
    SiteConfig rat = abs;
    rat.convention = ShiftConvention::ratio;
    BosonAlgebra A(abs), R(rat);
    for (auto& g : A.generators())
        for (std::size_t v = 0; v < A.variable_count(); ++v) CHECK(A.shift(g, v) == Rational(5) * R.shift(g, v));
}

TEST_CASE("commutators over tau tend to the generator brackets") {
    SUBCASE("two factors, ratio steps") {
        SiteConfig cfg = config({{{3, 2}, {2, 2}}, {{2}, {2}}}, ShiftConvention::ratio);
        BosonAlgebra alg(cfg);
        const auto y = sample(alg, 53);
        std::vector<Complex> u, v;
        for (auto [A, B] : {std::pair<BosonGenerator, BosonGenerator>{{0, {0, 1}}, {0, {1, 0}}},
                            {{0, {1, 1}}, {0, {0, 0}}}, {{0, {1, 0}}, {1, {1}}}, {{1, {0}}, {0, {0, 1}}},
                            {{1, {0}}, {1, {1}}}})
            for (auto [pr, est] : semiclassical_pairs(cfg, A, B, y)) {
                u.push_back(pr);
                v.push_back(est);
            }
        auto fit = fit_scalar(u, v);
        CHECK_FALSE(fit.degenerate);
        CHECK(std::abs(fit.lambda - 1.0) < 1e-6);
        CHECK(fit.residual < 1e-6);
    }
    SUBCASE("one factor, absolute steps") {
        SiteConfig cfg = config({{{3, 2}, {2, 2}}}, ShiftConvention::absolute);
        const auto y = sample(BosonAlgebra(cfg), 59);
        std::vector<Complex> u, v;
        for (auto [pr, est] : semiclassical_pairs(cfg, {0, {1, 0}}, {0, {0, 1}}, y)) {
            u.push_back(pr);
            v.push_back(est);
        }
        auto fit = fit_scalar(u, v);
        CHECK(std::abs(fit.lambda - 5.0) < 1e-5);
    }
}
