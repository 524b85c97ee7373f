#include "ellipq/graded.hpp"

#include "ellipq/seqcomb.hpp"
#include "ellipq/subsets.hpp"

namespace ellipq {

namespace {

void gather(std::span<const Complex> args, std::size_t p, const std::vector<int>& blocks,
            std::vector<Complex>& out) {
    out.resize(blocks.size() * p);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (std::size_t j = 0; j < p; ++j) out[b * p + j] = args[std::size_t(blocks[b]) * p + j];
}

void require_compatible(const SymElement& f, const SymElement& g, const char* who) {
    if (f.n_vec() != g.n_vec()) throw DomainError(std::string(who) + ": different n_vec");
    if (!(f.lattice() == g.lattice())) throw DomainError(std::string(who) + ": different lattices");
    if (f.grade() + g.grade() > max_total_grade)
        throw DomainError(std::string(who) + ": total grade above the cap of 5");
}

void require_arity(std::span<const Complex> args, std::size_t n) {
    if (args.size() != n) throw DomainError("wrong number of arguments");
}

} // namespace

Complex cauchy_partial(const Evaluator& f, std::span<const Complex> z, std::size_t j, double h,
                       int M) {
    std::vector<Complex> w(z.begin(), z.end());
    Complex s = 0;
    for (int k = 0; k < M; ++k) {
        const Complex om = std::polar(1.0, 2 * pi * k / M);
        w[j] = z[j] + h * om;
        s += f(w) * std::conj(om);
    }
    return s / (double(M) * h);
}

double d_ratio(const Seq& n_vec, std::size_t psi) {
    return double(d(n_vec, 0, psi) + d(n_vec, psi + 1, n_vec.size())) / double(d(n_vec));
}

std::vector<PoleLocus> block_loci(std::size_t p, std::size_t blocks) {
    std::vector<PoleLocus> out;
    for (std::size_t mu = 0; mu < p; ++mu) {
        std::vector<std::size_t> idx;
        for (std::size_t b = 0; b < blocks; ++b) idx.push_back(b * p + mu);
        auto l = pairwise_loci(idx);
        out.insert(out.end(), l.begin(), l.end());
    }
    return out;
}

SymElement::SymElement(Seq n_vec, int grade, LatticeParams lat, Complex tau_tag, Evaluator eval,
                       GradientFn gradient) {
    if (n_vec.empty()) throw DomainError("SymElement: empty n_vec");
    if (grade < 0) throw DomainError("SymElement: negative grade");
    if (!eval) throw DomainError("SymElement: missing evaluator");
    lat.validate();
    body_ = std::make_shared<const Body>(
        Body{std::move(n_vec), grade, lat, tau_tag, std::move(eval), std::move(gradient)});
}

SymElement SymElement::lift(const ThetaElement& f) {
    const Seq law = f.tag().law();
    if (law.size() != f.arity()) throw DomainError("lift: tag arity mismatch");
    Evaluator ev = [f](std::span<const Complex> z) { return f(z); };
    GradientFn gr = [f](std::span<const Complex> z) {
        Eigen::VectorXcd g = f.gradient(z);
        return std::vector<Complex>(g.data(), g.data() + g.size());
    };
    return SymElement(law, 1, f.lattice(), f.tag().shift(), std::move(ev), std::move(gr));
}

Complex SymElement::operator()(std::span<const Complex> args) const {
    require_arity(args, arity());
    return body_->eval(args);
}

std::vector<Complex> SymElement::gradient(std::span<const Complex> args) const {
    require_arity(args, arity());
    if (body_->gradient) return body_->gradient(args);
    std::vector<Complex> g(args.size());
    for (std::size_t j = 0; j < args.size(); ++j) g[j] = cauchy_partial(body_->eval, args, j);
    return g;
}

Complex SymElement::partial(std::span<const Complex> args, std::size_t j) const {
    require_arity(args, arity());
    if (j >= args.size()) throw DomainError("partial: index out of range");
    if (body_->gradient) return body_->gradient(args)[j];
    return cauchy_partial(body_->eval, args, j);
}

SymElement SymElement::scaled(Complex a) const {
    auto self = *this;
    Evaluator ev = [self, a](std::span<const Complex> z) { return a * self(z); };
    GradientFn gr;
    if (analytic())
        gr = [self, a](std::span<const Complex> z) {
            auto g = self.gradient(z);
            for (auto& v : g) v *= a;
            return g;
        };
    return SymElement(n_vec(), grade(), lattice(), tau_tag(), std::move(ev), std::move(gr));
}

SymElement sym_product(const SymElement& f, const SymElement& g) {
    require_compatible(f, g, "sym_product");
    if (f.tau_tag() != g.tau_tag()) throw DomainError("sym_product: different quasi-periodicity shifts");
    const int a = f.grade(), b = g.grade();
    const std::size_t p = f.p();
    // f and g are block-symmetric, so the S_{a+b} sum over (a! b!) collapses to a-subsets
    Evaluator ev = [f, g, a, b, p](std::span<const Complex> z) {
        std::vector<Complex> fa, ga;
        Complex s = 0;
        for_each_subset(a + b, a, [&](const std::vector<int>& S, const std::vector<int>& T) {
            gather(z, p, S, fa);
            gather(z, p, T, ga);
            s += f(fa) * g(ga);
        });
        return s;
    };
    GradientFn gr;
    if (f.analytic() && g.analytic())
        gr = [f, g, a, b, p](std::span<const Complex> z) {
            std::vector<Complex> out(z.size(), 0.0), fa, ga;
            for_each_subset(a + b, a, [&](const std::vector<int>& S, const std::vector<int>& T) {
                gather(z, p, S, fa);
                gather(z, p, T, ga);
                const Complex fv = f(fa), gv = g(ga);
                auto df = f.gradient(fa);
                auto dg = g.gradient(ga);
                for (std::size_t m = 0; m < S.size(); ++m)
                    for (std::size_t j = 0; j < p; ++j) out[std::size_t(S[m]) * p + j] += df[m * p + j] * gv;
                for (std::size_t m = 0; m < T.size(); ++m)
                    for (std::size_t j = 0; j < p; ++j) out[std::size_t(T[m]) * p + j] += fv * dg[m * p + j];
            });
            return out;
        };
    return SymElement(f.n_vec(), a + b, f.lattice(), f.tau_tag(), std::move(ev), std::move(gr));
}

SymElement star_product(const SymElement& f, const SymElement& g, Complex tau) {
    require_compatible(f, g, "star_product");
    if (f.p() != 1) throw DomainError("star_product: defined for single-coordinate spaces only");
    const int a = f.grade(), b = g.grade();
    const double n = f.n_vec()[0];
    const LatticeParams lat = f.lattice();
    Evaluator ev = [f, g, a, b, n, tau, lat](std::span<const Complex> z) {
        std::vector<Complex> fa, ga;
        Complex s = 0;
        for_each_subset(a + b, a, [&](const std::vector<int>& S, const std::vector<int>& T) {
            gather(z, 1, S, fa);
            gather(z, 1, T, ga);
            for (auto& v : ga) v -= 2.0 * double(a) * tau;
            Complex k = 1;
            for (int ip : S)
                for (int iq : T) {
                    const Complex u = z[std::size_t(ip)] - z[std::size_t(iq)];
                    k *= theta_eval(u - n * tau, lat) / theta_guarded(u, lat);
                }
            s += f(fa) * g(ga) * k;
        });
        return s;
    };
    return SymElement(f.n_vec(), a + b, lat, f.tau_tag() + g.tau_tag(), std::move(ev));
}

SymElement bracket2(const SymElement& f, const SymElement& g) {
    require_compatible(f, g, "bracket2");
    if (f.grade() != 1 || g.grade() != 1) throw DomainError("bracket2: grade-one inputs only");
    const Seq nv = f.n_vec();
    const std::size_t p = nv.size();
    const LatticeParams lat = f.lattice();
    std::vector<double> D(p);
    for (std::size_t a = 0; a < p; ++a) D[a] = d_ratio(nv, a);
    const Complex tp0 = theta_prime_zero(lat);
    Evaluator ev = [f, g, p, D, lat, tp0](std::span<const Complex> z) {
        std::span<const Complex> x = z.subspan(0, p), y = z.subspan(p, p);
        const Complex fx = f(x), fy = f(y), gx = g(x), gy = g(y);
        const auto dfx = f.gradient(x), dfy = f.gradient(y), dgx = g.gradient(x), dgy = g.gradient(y);
        Complex s = 0;
        for (std::size_t a = 0; a < p; ++a)
            s += D[a] * (gx * dfy[a] + gy * dfx[a] - fx * dgy[a] - fy * dgx[a]);
        s += (theta_logd(y[0] - x[0], lat) + theta_logd(y[p - 1] - x[p - 1], lat) - two_pi_i) *
             (fx * gy - gx * fy);
        std::vector<Complex> u(p), v(p);
        for (std::size_t a = 0; a + 1 < p; ++a) {
            const Complex ker = tp0 * theta_eval(x[a] + y[a + 1] - y[a] - x[a + 1], lat) /
                                (theta_guarded(x[a] - y[a], lat) * theta_guarded(y[a + 1] - x[a + 1], lat));
            // u = (y_1..y_a, x_{a+1}..x_p), v = (x_1..x_a, y_{a+1}..y_p)
            for (std::size_t j = 0; j < p; ++j) {
                u[j] = j <= a ? y[j] : x[j];
                v[j] = j <= a ? x[j] : y[j];
            }
            s += ker * (f(u) * g(v) - g(u) * f(v));
        }
        return s;
    };
    return SymElement(nv, 2, lat, f.tau_tag() + g.tau_tag(), std::move(ev));
}

SymElement bracketN(const SymElement& f, const SymElement& g) {
    require_compatible(f, g, "bracketN");
    const int a = f.grade(), b = g.grade();
    if (a < 1 || b < 1) throw DomainError("bracketN: grades must be positive");
    const Seq nv = f.n_vec();
    const std::size_t p = nv.size();
    const LatticeParams lat = f.lattice();
    std::vector<double> D(p);
    for (std::size_t s = 0; s < p; ++s) D[s] = d_ratio(nv, s);
    const Complex tp0 = theta_prime_zero(lat);
    Evaluator ev = [f, g, a, b, p, D, lat, tp0](std::span<const Complex> z) {
        std::vector<Complex> fa, ga, fs, gs;
        Complex total = 0;
        for_each_subset(a + b, a, [&](const std::vector<int>& S, const std::vector<int>& T) {
            gather(z, p, S, fa);
            gather(z, p, T, ga);
            const Complex fv = f(fa), gv = g(ga);
            const auto df = f.gradient(fa);
            const auto dg = g.gradient(ga);
            Complex sf = 0, sg = 0;
            for (int mu = 0; mu < a; ++mu)
                for (std::size_t psi = 0; psi < p; ++psi) sf += D[psi] * df[std::size_t(mu) * p + psi];
            for (int mu = 0; mu < b; ++mu)
                for (std::size_t psi = 0; psi < p; ++psi) sg += D[psi] * dg[std::size_t(mu) * p + psi];
            Complex term = double(b) * gv * sf - double(a) * fv * sg;

            Complex K = -two_pi_i * double(a * b);
            for (int mu = 0; mu < a; ++mu)
                for (int nu = 0; nu < b; ++nu) {
                    const Complex* X = &fa[std::size_t(mu) * p];
                    const Complex* Y = &ga[std::size_t(nu) * p];
                    K += theta_logd(Y[0] - X[0], lat) + theta_logd(Y[p - 1] - X[p - 1], lat);
                }
            term += K * fv * gv;

            for (int mu = 0; mu < a; ++mu)
                for (int nu = 0; nu < b; ++nu)
                    for (std::size_t psi = 0; psi + 1 < p; ++psi) {
                        const Complex* X = &fa[std::size_t(mu) * p];
                        const Complex* Y = &ga[std::size_t(nu) * p];
                        const Complex ker =
                            tp0 * theta_eval(X[psi] + Y[psi + 1] - Y[psi] - X[psi + 1], lat) /
                            (theta_guarded(X[psi] - Y[psi], lat) *
                             theta_guarded(Y[psi + 1] - X[psi + 1], lat));
                        // heads up to psi trade places between the two blocks
                        fs = fa;
                        gs = ga;
                        for (std::size_t j = 0; j <= psi; ++j) {
                            fs[std::size_t(mu) * p + j] = Y[j];
                            gs[std::size_t(nu) * p + j] = X[j];
                        }
                        term += ker * f(fs) * g(gs);
                    }
            total += term;
        });
        return total;
    };
    return SymElement(nv, a + b, lat, f.tau_tag() + g.tau_tag(), std::move(ev));
}

SymElement intro_bracket(const SymElement& f, const SymElement& g, KernelMode mode) {
    require_compatible(f, g, "intro_bracket");
    if (f.p() != 1) throw DomainError("intro_bracket: single-coordinate spaces only");
    const int a = f.grade(), b = g.grade();
    const double n = f.n_vec()[0];
    const LatticeParams lat = f.lattice();
    const Complex shift = mode == KernelMode::odd ? Complex(0, pi) : Complex(0, 0);
    Evaluator ev = [f, g, a, b, n, lat, shift](std::span<const Complex> z) {
        std::vector<Complex> fa, ga;
        Complex total = 0;
        for_each_subset(a + b, a, [&](const std::vector<int>& S, const std::vector<int>& T) {
            gather(z, 1, S, fa);
            gather(z, 1, T, ga);
            const Complex fv = f(fa), gv = g(ga);
            const auto df = f.gradient(fa);
            const auto dg = g.gradient(ga);
            Complex K = 0;
            for (int ip : S)
                for (int iq : T)
                    K += theta_logd(z[std::size_t(ip)] - z[std::size_t(iq)], lat) - shift;
            Complex sf = 0, sg = 0;
            for (auto v : df) sf += v;
            for (auto v : dg) sg += v;
            total += -2.0 * n * fv * gv * K + 2.0 * double(b) * gv * sf - 2.0 * double(a) * fv * sg;
        });
        return total;
    };
    return SymElement(f.n_vec(), a + b, lat, f.tau_tag() + g.tau_tag(), std::move(ev));
}

SymElement commutator_limit(const SymElement& f, const SymElement& g, std::vector<double> taus,
                            double tol) {
    require_compatible(f, g, "commutator_limit");
    if (f.p() != 1) throw DomainError("commutator_limit: single-coordinate spaces only");
    if (taus.size() < 2) throw DomainError("commutator_limit: need at least two step sizes");
    for (double t : taus)
        if (!(t > 0)) throw DomainError("commutator_limit: step sizes must be positive");
    Evaluator ev = [f, g, taus, tol](std::span<const Complex> z) {
        auto sym_quotient = [&](double t) {
            auto D = [&](double s) {
                return (star_product(f, g, s)(z) - star_product(g, f, s)(z)) / s;
            };
            return 0.5 * (D(t) + D(-t));
        };
        std::vector<Complex> S;
        for (double t : taus) S.push_back(sym_quotient(t));
        // the symmetric quotient is even in t, so eliminate the t^2 term
        std::vector<Complex> R;
        for (std::size_t i = 0; i + 1 < S.size(); ++i) {
            const double r2 = (taus[i] / taus[i + 1]) * (taus[i] / taus[i + 1]);
            R.push_back((r2 * S[i + 1] - S[i]) / (r2 - 1.0));
        }
        if (R.size() >= 2) {
            const Complex x = R[R.size() - 1], y = R[R.size() - 2];
            if (std::abs(x - y) > 10 * tol * (1 + std::abs(x)))
                throw ExtrapolationError("commutator_limit: extrapolation unstable");
        }
        return R.back();
    };
    return SymElement(f.n_vec(), f.grade() + g.grade(), f.lattice(), 0.0, std::move(ev));
}

VerifyReport membership_check(const SymElement& f, const SampleSpec& spec, std::optional<Seq> law,
                              double tol) {
    const Seq nv = law ? *law : f.n_vec();
    if (nv.size() != f.p()) throw DomainError("membership_check: law arity mismatch");
    const std::size_t p = f.p();
    const std::size_t alpha = std::size_t(f.grade());
    const Complex eta = f.lattice().eta;
    Sampler smp(spec, eta);
    ResidualAccumulator sym, per, quasi;
    for (std::size_t it = 0; it < spec.count; ++it) {
        auto z = smp.tuple(f.arity(), block_loci(p, alpha));
        const Complex v = f(z);
        for (std::size_t bb = 1; bb < alpha; ++bb) {
            auto w = z;
            for (std::size_t j = 0; j < p; ++j) std::swap(w[j], w[bb * p + j]);
            sym.add(f(w), v);
        }
        for (std::size_t i = 0; i < z.size(); ++i) {
            auto w = z;
            w[i] += 1.0;
            per.add(f(w), v);
            w[i] = z[i] + eta;
            const std::size_t mu = i % p, blk = i / p;
            Complex e = double(nv[mu]) * z[i] + f.tau_tag();
            if (mu > 0) e -= z[blk * p + mu - 1];
            if (mu + 1 < p) e -= z[blk * p + mu + 1];
            quasi.add(f(w), std::exp(-two_pi_i * e) * v);
        }
    }
    ResidualAccumulator all;
    all.merge(sym);
    all.merge(per);
    all.merge(quasi);
    VerifyReport r;
    r.suite = "membership";
    r.seed = spec.seed;
    r.count = spec.count;
    all.finish(r, tol);
    r.scalars["symmetry_max"] = sym.max();
    r.scalars["periodicity_max"] = per.max();
    r.scalars["quasi_periodicity_max"] = quasi.max();
    return r;
}

ScalarFit fit_scalar(const std::vector<Complex>& b, const std::vector<Complex>& c) {
    if (b.size() != c.size() || b.empty()) throw DomainError("fit_scalar: size mismatch");
    Complex num = 0;
    double den = 0, cmax = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        num += std::conj(b[i]) * c[i];
        den += std::norm(b[i]);
        cmax = std::max(cmax, std::abs(c[i]));
    }
    ScalarFit fit;
    if (den < 1e-20 * double(b.size())) {
        fit.degenerate = true;
        fit.lambda = std::numeric_limits<double>::quiet_NaN();
        double r = 0;
        for (std::size_t i = 0; i < b.size(); ++i) r = std::max(r, mixed_residual(c[i], 0.0));
        fit.residual = r;
        return fit;
    }
    fit.lambda = num / den;
    double r = 0;
    for (std::size_t i = 0; i < b.size(); ++i) r = std::max(r, mixed_residual(c[i], fit.lambda * b[i]));
    fit.residual = r;
    return fit;
}

} // namespace ellipq
