#pragma once

#include <map>
#include <optional>

#include "ellipq/tensor.hpp"

namespace ellipq {

// absolute: a single factor with steps in units of d(N) tau; ratio: steps
// divided by d(N), which is the multi-factor normalization
enum class ShiftConvention { absolute, ratio };

struct BosonFactor {
    Seq seq;
    std::vector<int> sites; // number of sites per coordinate
};

struct SiteConfig {
    std::vector<BosonFactor> factors;
    Complex tau{0.0, 0.0};
    LatticeParams lat;
    ShiftConvention convention = ShiftConvention::ratio;
    ZCoupling zcoupling = ZCoupling::printed;

    void validate() const;
    std::vector<Seq> seqs() const;
};

struct BosonGenerator {
    int factor = 0;
    std::vector<int> sites; // one site per coordinate
    auto operator<=>(const BosonGenerator&) const = default;
};

using NCWord = std::vector<BosonGenerator>;

// maximal runs [first, last] of coordinates where the two site tuples differ
using Segment = std::pair<std::size_t, std::size_t>;
std::vector<Segment> segments(const std::vector<int>& a, const std::vector<int>& b);

// product of factors c(Y + tau * shift); shifts are exact multiples of tau
class Coefficient {
public:
    using Fn = std::function<Complex(std::span<const Complex>)>;

    Coefficient() = default;
    explicit Coefficient(Complex c) : scalar_(c) {}

    void multiply(Complex c) { scalar_ *= c; }
    void multiply(std::shared_ptr<const Fn> fn);
    void multiply(const Coefficient& o);
    // the coefficient as seen after moving it left past a generator with this shift
    void shift(const std::vector<Rational>& s);

    Complex operator()(std::span<const Complex> y, Complex tau) const;
    std::size_t atoms() const { return atoms_.size(); }

private:
    struct Atom {
        std::shared_ptr<const Fn> fn;
        std::vector<Rational> shift;
    };
    Complex scalar_{1.0, 0.0};
    std::vector<Atom> atoms_;
};

struct BosonTerm {
    Coefficient coeff;
    NCWord word;
};

using BosonSum = std::vector<BosonTerm>;

enum class RewriteStrategy { leftmost, rightmost };

class BosonAlgebra {
public:
    explicit BosonAlgebra(SiteConfig cfg);

    const SiteConfig& config() const { return cfg_; }
    std::size_t h() const { return cfg_.factors.size(); }
    std::size_t p(std::size_t t) const { return cfg_.factors[t].seq.size(); }

    // commuting variables: y_{t,mu,site} then z_{t,t+1}
    std::size_t variable_count() const { return nvars_; }
    std::size_t y_index(std::size_t t, std::size_t mu, std::size_t site) const;
    std::size_t z_index(std::size_t s) const;
    std::string variable_name(std::size_t v) const;

    void check(const BosonGenerator& g) const;
    std::vector<BosonGenerator> generators() const;

    // e C(y) = C(y + tau * shift) e
    Rational shift(const BosonGenerator& g, std::size_t var) const;
    const std::vector<Rational>& shift_vector(const BosonGenerator& g) const;

    // e_A e_B as a sum over the rewritten pairs; seg picks the segment for a
    // pair in one factor (first segment by default)
    BosonSum exchange(const BosonGenerator& A, const BosonGenerator& B,
                      std::optional<Segment> seg = std::nullopt) const;
    bool needs_rewrite(const BosonGenerator& A, const BosonGenerator& B) const;
    std::optional<Segment> first_bad_segment(const BosonGenerator& A, const BosonGenerator& B) const;
    // rewrite positions i, i+1 of one term
    BosonSum apply_at(const BosonTerm& term, std::size_t i, std::optional<Segment> seg = std::nullopt) const;

    BosonSum normal_order(BosonSum terms, RewriteStrategy s = RewriteStrategy::leftmost,
                          std::size_t max_steps = 1'000'000) const;
    BosonSum multiply(const BosonSum& a, const BosonSum& b) const;

    // x(f) = sum over site tuples of f(y_{.,site}) e_site, for one factor and
    // an element of that factor's law
    BosonSum x_embed(const SymElement& f, std::size_t factor = 0) const;

    std::map<NCWord, Complex> evaluate(const BosonSum& s, std::span<const Complex> y) const;
    std::vector<PoleLocus> loci() const;
    std::vector<Complex> point(Sampler& smp) const;

private:
    SiteConfig cfg_;
    std::size_t nvars_ = 0;
    std::vector<std::vector<std::size_t>> y_offsets_;
    std::map<BosonGenerator, std::vector<Rational>> shifts_;
    std::vector<Rational> compute_shift(const BosonGenerator& g) const;
    Complex step(std::size_t t) const; // d(N) tau or tau
};

// words of the given length drawn uniformly from all generators
NCWord random_word(const BosonAlgebra& alg, std::size_t len, std::mt19937_64& rng);

// leftmost and rightmost rewriting agree coefficientwise at a point
double confluence_residual(const BosonAlgebra& alg, const NCWord& w, std::span<const Complex> y);
// exchanging a pair twice returns the pair
double double_exchange_residual(const BosonAlgebra& alg, const BosonGenerator& A, const BosonGenerator& B,
                                std::span<const Complex> y);

// Intro family: one factor (n) with a single coordinate; x(f) x(g) against
// the rule built from h = f * g
struct HomomorphismResult {
    double derived_max = 0; // h(z_a1, z_a2) / T(z_a1 - z_a2), diagonal at z_a + n tau
    double literal_max = 0; // sum h(z_a1, z_a2 - 2 tau)
};
HomomorphismResult homomorphism_residual(const BosonAlgebra& alg, const SymElement& f, const SymElement& g,
                                         std::span<const Complex> y);

// generator shifts against the generator bracket table, exactly
struct ShiftComparison {
    std::size_t compared = 0;
    std::size_t mismatches = 0;
    std::size_t own_site_excluded = 0;
    Rational own_site_offset{0}; // shift minus table on the generator's own site
    bool own_site_uniform = true;
};
ShiftComparison semiclassical_shift_check(const SiteConfig& cfg);

// Richardson limit of [e_A, e_B]/tau against the generator bracket table at
// one point; returns (prediction, estimate) pairs coefficientwise
std::vector<std::pair<Complex, Complex>> semiclassical_pairs(SiteConfig cfg, const BosonGenerator& A,
                                                             const BosonGenerator& B, std::span<const Complex> y,
                                                             double t = 1e-3);

} // namespace ellipq
