#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "ellipq/report.hpp"
#include "ellipq/sampling.hpp"
#include "ellipq/theta.hpp"

namespace ellipq {

using Evaluator = std::function<Complex(std::span<const Complex>)>;
using PartialFn = std::function<Complex(std::span<const Complex>, std::size_t)>;
using GradientFn = std::function<std::vector<Complex>(std::span<const Complex>)>;

inline constexpr int max_total_grade = 5;

// d/dz_j by the trapezoidal rule on a circle of radius h (M nodes);
// spectrally accurate for holomorphic f, error ~ (h/rho)^M
Complex cauchy_partial(const Evaluator& f, std::span<const Complex> z, std::size_t j,
                       double h = 1e-3, int M = 8);

// Element of S^alpha(Theta_(n_1..n_p)): alpha blocks of p arguments, flat,
// block-major. Cheap to copy; the evaluator is shared.
class SymElement {
public:
    SymElement(Seq n_vec, int grade, LatticeParams lat, Complex tau_tag, Evaluator eval,
               GradientFn gradient = {});

    // grade-one element backed by a theta series (analytic derivatives)
    static SymElement lift(const ThetaElement& f);

    const Seq& n_vec() const { return body_->n_vec; }
    std::size_t p() const { return body_->n_vec.size(); }
    int grade() const { return body_->grade; }
    std::size_t arity() const { return p() * std::size_t(grade()); }
    const LatticeParams& lattice() const { return body_->lat; }
    Complex tau_tag() const { return body_->tau_tag; }
    bool analytic() const { return bool(body_->gradient); }

    Complex operator()(std::span<const Complex> args) const;
    Complex operator()(std::initializer_list<Complex> args) const {
        return (*this)(std::span<const Complex>(args.begin(), args.size()));
    }
    std::vector<Complex> gradient(std::span<const Complex> args) const;
    Complex partial(std::span<const Complex> args, std::size_t j) const;

    SymElement scaled(Complex a) const;
    const Evaluator& evaluator() const { return body_->eval; }

private:
    struct Body {
        Seq n_vec;
        int grade;
        LatticeParams lat;
        Complex tau_tag;
        Evaluator eval;
        GradientFn gradient;
    };
    std::shared_ptr<const Body> body_;
};

SymElement sym_product(const SymElement& f, const SymElement& g);
SymElement star_product(const SymElement& f, const SymElement& g, Complex tau);
SymElement bracket2(const SymElement& f, const SymElement& g);
SymElement bracketN(const SymElement& f, const SymElement& g);

enum class KernelMode { raw, odd };
SymElement intro_bracket(const SymElement& f, const SymElement& g, KernelMode mode = KernelMode::odd);

// Richardson limit of (f*_t g - g*_t f)/t over symmetric pairs +-t for the
// given (decreasing, nonzero) step magnitudes. Throws ExtrapolationError when the
// last two extrapolants disagree by more than 10*tol (relative).
SymElement commutator_limit(const SymElement& f, const SymElement& g,
                            std::vector<double> taus = {1e-3, 5e-4, 2.5e-4}, double tol = 1e-6);

// Conditions 1-2; law overrides the element's own n_vec
VerifyReport membership_check(const SymElement& f, const SampleSpec& spec = {},
                              std::optional<Seq> law = std::nullopt, double tol = 1e-9);

// (d(n_1..n_{psi-1}) + d(n_{psi+1}..n_p)) / d(n_1..n_p), psi 0-based
double d_ratio(const Seq& n_vec, std::size_t psi);

// sampling loci for a graded element: coordinate-wise block differences
std::vector<PoleLocus> block_loci(std::size_t p, std::size_t blocks);

// least-squares lambda with c ~ lambda b, and the post-fit residual
struct ScalarFit {
    Complex lambda{0.0, 0.0};
    double residual = 0;
    bool degenerate = false; // both sides vanish
};
ScalarFit fit_scalar(const std::vector<Complex>& b, const std::vector<Complex>& c);

} // namespace ellipq
