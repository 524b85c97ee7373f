#pragma once

#include <map>

#include "ellipq/graded.hpp"
#include "ellipq/seqcomb.hpp"

namespace ellipq {

// Argument layout of a multigraded element: factor-major, then block, then
// coordinate; the h-1 coupling variables z_{t,t+1} come last.
struct TensorShape {
    std::vector<Seq> seqs;
    std::vector<int> degrees;

    TensorShape() = default;
    TensorShape(std::vector<Seq> s, std::vector<int> deg);

    std::size_t h() const { return seqs.size(); }
    std::size_t p(std::size_t t) const { return seqs[t].size(); }
    std::size_t offset(std::size_t t) const { return offsets_[t]; }
    std::size_t index(std::size_t t, std::size_t block, std::size_t mu) const {
        return offsets_[t] + block * p(t) + mu;
    }
    std::size_t z_index(std::size_t t) const { return offsets_.back() + t; }
    std::size_t arity() const { return offsets_.back() + (h() ? h() - 1 : 0); }
    int total_degree() const;

private:
    std::vector<std::size_t> offsets_; // h+1 entries
};

class TensorElement {
public:
    TensorElement(std::vector<Seq> seqs, std::vector<int> degrees, LatticeParams lat, Evaluator eval,
                  GradientFn gradient = {});

    // degree e_factor element f(x_{.,1,factor}); analytic derivatives
    static TensorElement from_theta(const ThetaElement& f, std::vector<Seq> seqs, std::size_t factor);
    // the degree-zero element z_{s,s+1}
    static TensorElement coupling(std::vector<Seq> seqs, std::size_t s, LatticeParams lat);

    const TensorShape& shape() const { return body_->shape; }
    const std::vector<Seq>& seqs() const { return body_->shape.seqs; }
    const std::vector<int>& degrees() const { return body_->shape.degrees; }
    const LatticeParams& lattice() const { return body_->lat; }
    std::size_t arity() const { return body_->shape.arity(); }
    bool analytic() const { return bool(body_->gradient); }

    Complex operator()(std::span<const Complex> args) const;
    std::vector<Complex> gradient(std::span<const Complex> args) const;

    const Evaluator& evaluator() const { return body_->eval; }

private:
    struct Body {
        TensorShape shape;
        LatticeParams lat;
        Evaluator eval;
        GradientFn gradient;
    };
    std::shared_ptr<const Body> body_;
};

TensorElement tensor_product(const TensorElement& f, const TensorElement& g);
TensorElement tensor_combination(Complex a, const TensorElement& f, Complex b, const TensorElement& g);

enum class ZCoupling {
    printed,  // the table exactly as listed
    completed // adds {e_t, z_{t+1,t+2}} = -1/d(N_{t+1}) and {e_{t+2}, z_{t,t+1}} = 1/d(N_{t+1})
};

// Brackets of one generator e_t with the commuting variables, and the theta
// kernels between two generators. Factors and coordinates are 0-based.
class GeneratorBracketTable {
public:
    explicit GeneratorBracketTable(std::vector<Seq> seqs, ZCoupling mode = ZCoupling::printed);

    const std::vector<Seq>& seqs() const { return seqs_; }
    ZCoupling mode() const { return mode_; }

    // {e_t, x_{mu,.,t2}}
    Rational with_coordinate(std::size_t t, std::size_t t2, std::size_t mu) const;
    // {e_t, z_{s,s+1}}
    Rational with_coupling(std::size_t t, std::size_t s) const;

    // {e_t(u), e_t(v)} = diagonal * e(u)e(v) + sum_a swap(a) * e(v_1..v_a,u_{a+1}..)e(u_1..u_a,v_{a+1}..)
    static Complex diagonal(std::span<const Complex> u, std::span<const Complex> v, const LatticeParams& lat);
    static Complex swap(std::span<const Complex> u, std::span<const Complex> v, std::size_t a,
                        const LatticeParams& lat);
    // {e_t(u), e_{t+1}(v)} = adjacent * e_t(u)e_{t+1}(v)
    static Complex adjacent(Complex u_last, Complex v_first, Complex z, const LatticeParams& lat);

private:
    std::vector<Seq> seqs_;
    ZCoupling mode_;
};

// {f, g} through the generator table (bi-Leibniz over X_f, X_g), read off at
// the distinct-label word
TensorElement tensor_bracket(const TensorElement& f, const TensorElement& g,
                             const GeneratorBracketTable& table);

// --- formal words -----------------------------------------------------------

struct Generator {
    int factor = 0;
    std::vector<int> labels; // one label per coordinate
    auto operator<=>(const Generator&) const = default;
};

using Monomial = std::vector<Generator>; // sorted
using WordSum = std::map<Monomial, Complex>;

// numeric values of the formal variables x^{(gamma)}_{mu,t}: values[t][mu][gamma]
struct LabelPoint {
    std::vector<std::vector<std::vector<Complex>>> values;
    std::vector<Complex> z;
};

// two generators of one factor sharing a label in some coordinate
bool nilpotent(const Monomial& m);

// X_f restricted to `pool[t]` labels per coordinate of factor t; each
// non-nilpotent monomial carries f at its labels
WordSum encode_X(const TensorElement& f, const LabelPoint& pt, const std::vector<int>& pool);
WordSum word_product(const WordSum& a, const WordSum& b);

// --- membership conditions --------------------------------------------------

std::vector<PoleLocus> tensor_loci(const TensorShape& s);
std::vector<Complex> tensor_point(Sampler& smp, const TensorShape& s);

// symmetry and (quasi-)periodicity per factor
VerifyReport tensor_membership_check(const TensorElement& f, const SampleSpec& spec = {},
                                     double tol = 1e-9);

// theta-cleared function: product of theta(x_{1,mu,t+1} - x_{p_t,mu',t} - z_{t,t+1}) times f
Complex theta_cleared(const TensorElement& f, std::span<const Complex> args);

// simple poles only: log-log slope of |f-hat| along rays into each divisor;
// residual max(0, -slope), tolerance 0.1
VerifyReport condition3_check(const TensorElement& f, const SampleSpec& spec = {});

// f-hat vanishes on the codimension-2 coincidence loci; f-hat is evaluated
// there by the polydisc mean value, relative to the largest |f-hat| on the torus
VerifyReport condition4_check(const TensorElement& f, const SampleSpec& spec = {}, double tol = 1e-8);

} // namespace ellipq
