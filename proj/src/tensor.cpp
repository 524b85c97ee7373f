#include "ellipq/tensor.hpp"

#include <algorithm>
#include <functional>

#include "ellipq/subsets.hpp"

namespace ellipq {

namespace {

using Selection = std::vector<std::vector<int>>; // blocks chosen per factor

// every way to pick deg[t] of total[t] blocks in each factor
void for_each_split(const std::vector<int>& total, const std::vector<int>& deg,
                    const std::function<void(const Selection&, const Selection&)>& fn) {
    const std::size_t h = total.size();
    Selection S(h), T(h);
    std::function<void(std::size_t)> rec = [&](std::size_t t) {
        if (t == h) {
            fn(S, T);
            return;
        }
        for_each_subset(total[t], deg[t], [&](const std::vector<int>& a, const std::vector<int>& b) {
            S[t] = a;
            T[t] = b;
            rec(t + 1);
        });
    };
    rec(0);
}

// arguments of a sub-element made of the selected blocks (z's carried over)
void gather(std::span<const Complex> args, const TensorShape& full, const Selection& sel,
            std::vector<Complex>& out) {
    out.clear();
    for (std::size_t t = 0; t < full.h(); ++t)
        for (int b : sel[t])
            for (std::size_t mu = 0; mu < full.p(t); ++mu) out.push_back(args[full.index(t, std::size_t(b), mu)]);
    for (std::size_t s = 0; s + 1 < full.h(); ++s) out.push_back(args[full.z_index(s)]);
}

// position in the sub-element's argument list of (factor t, k-th selected block, mu)
std::size_t sub_index(const TensorShape& full, const Selection& sel, std::size_t t, std::size_t k,
                      std::size_t mu) {
    std::size_t off = 0;
    for (std::size_t u = 0; u < t; ++u) off += sel[u].size() * full.p(u);
    return off + k * full.p(t) + mu;
}

std::size_t sub_z_index(const TensorShape& full, const Selection& sel, std::size_t s) {
    std::size_t off = 0;
    for (std::size_t u = 0; u < full.h(); ++u) off += sel[u].size() * full.p(u);
    return off + s;
}

void require_same_seqs(const TensorElement& f, const TensorElement& g, const char* who) {
    if (f.seqs() != g.seqs()) throw DomainError(std::string(who) + ": different factor sequences");
    if (!(f.lattice() == g.lattice())) throw DomainError(std::string(who) + ": different lattices");
}

std::vector<int> add_degrees(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

double to_double(const Rational& r) { return double(r.numerator()) / double(r.denominator()); }

} // namespace

TensorShape::TensorShape(std::vector<Seq> s, std::vector<int> deg) : seqs(std::move(s)), degrees(std::move(deg)) {
    if (seqs.empty()) throw DomainError("tensor shape: no factors");
    if (degrees.size() != seqs.size()) throw DomainError("tensor shape: one degree per factor");
    offsets_.assign(1, 0);
    for (std::size_t t = 0; t < seqs.size(); ++t) {
        if (seqs[t].empty()) throw DomainError("tensor shape: empty sequence");
        for (int v : seqs[t])
            if (v < 2) throw DomainError("tensor shape: sequence entries must be >= 2");
        if (degrees[t] < 0) throw DomainError("tensor shape: negative degree");
        offsets_.push_back(offsets_.back() + seqs[t].size() * std::size_t(degrees[t]));
    }
}

int TensorShape::total_degree() const {
    int s = 0;
    for (int d : degrees) s += d;
    return s;
}

TensorElement::TensorElement(std::vector<Seq> seqs, std::vector<int> degrees, LatticeParams lat, Evaluator eval,
                             GradientFn gradient) {
    if (!eval) throw DomainError("tensor element: missing evaluator");
    lat.validate();
    TensorShape shape(std::move(seqs), std::move(degrees));
    if (shape.total_degree() > max_total_grade) throw DomainError("tensor element: total degree above 5");
    body_ = std::make_shared<const Body>(Body{std::move(shape), lat, std::move(eval), std::move(gradient)});
}

TensorElement TensorElement::from_theta(const ThetaElement& f, std::vector<Seq> seqs, std::size_t factor) {
    if (factor >= seqs.size()) throw DomainError("from_theta: factor out of range");
    if (f.tag().law() != seqs[factor]) throw DomainError("from_theta: tag does not match the factor");
    std::vector<int> deg(seqs.size(), 0);
    deg[factor] = 1;
    TensorShape shape(seqs, deg);
    const std::size_t off = shape.offset(factor), p = seqs[factor].size(), n = shape.arity();
    Evaluator ev = [f, off, p](std::span<const Complex> z) { return f(z.subspan(off, p)); };
    GradientFn gr = [f, off, p, n](std::span<const Complex> z) {
        std::vector<Complex> g(n, 0.0);
        Eigen::VectorXcd d = f.gradient(z.subspan(off, p));
        for (std::size_t j = 0; j < p; ++j) g[off + j] = d[Eigen::Index(j)];
        return g;
    };
    return TensorElement(std::move(seqs), std::move(deg), f.lattice(), std::move(ev), std::move(gr));
}

TensorElement TensorElement::coupling(std::vector<Seq> seqs, std::size_t s, LatticeParams lat) {
    if (s + 1 >= seqs.size()) throw DomainError("coupling: no such z variable");
    std::vector<int> deg(seqs.size(), 0);
    TensorShape shape(seqs, deg);
    const std::size_t i = shape.z_index(s), n = shape.arity();
    Evaluator ev = [i](std::span<const Complex> z) { return z[i]; };
    GradientFn gr = [i, n](std::span<const Complex>) {
        std::vector<Complex> g(n, 0.0);
        g[i] = 1.0;
        return g;
    };
    return TensorElement(std::move(seqs), std::move(deg), lat, std::move(ev), std::move(gr));
}

Complex TensorElement::operator()(std::span<const Complex> args) const {
    if (args.size() != arity()) throw DomainError("tensor element: wrong number of arguments");
    return body_->eval(args);
}

std::vector<Complex> TensorElement::gradient(std::span<const Complex> args) const {
    if (args.size() != arity()) throw DomainError("tensor element: wrong number of arguments");
    if (body_->gradient) return body_->gradient(args);
    std::vector<Complex> g(args.size());
    for (std::size_t j = 0; j < args.size(); ++j) g[j] = cauchy_partial(body_->eval, args, j);
    return g;
}

TensorElement tensor_product(const TensorElement& f, const TensorElement& g) {
    require_same_seqs(f, g, "tensor_product");
    const auto deg = add_degrees(f.degrees(), g.degrees());
    const TensorShape full(f.seqs(), deg);
    Evaluator ev = [f, g, full](std::span<const Complex> z) {
        std::vector<Complex> fa, ga;
        Complex s = 0;
        for_each_split(full.degrees, f.degrees(), [&](const Selection& S, const Selection& T) {
            gather(z, full, S, fa);
            gather(z, full, T, ga);
            s += f(fa) * g(ga);
        });
        return s;
    };
    GradientFn gr;
    if (f.analytic() && g.analytic())
        gr = [f, g, full](std::span<const Complex> z) {
            std::vector<Complex> out(z.size(), 0.0), fa, ga;
            for_each_split(full.degrees, f.degrees(), [&](const Selection& S, const Selection& T) {
                gather(z, full, S, fa);
                gather(z, full, T, ga);
                const Complex fv = f(fa), gv = g(ga);
                const auto df = f.gradient(fa), dg = g.gradient(ga);
                for (std::size_t t = 0; t < full.h(); ++t) {
                    for (std::size_t k = 0; k < S[t].size(); ++k)
                        for (std::size_t mu = 0; mu < full.p(t); ++mu)
                            out[full.index(t, std::size_t(S[t][k]), mu)] += df[sub_index(full, S, t, k, mu)] * gv;
                    for (std::size_t k = 0; k < T[t].size(); ++k)
                        for (std::size_t mu = 0; mu < full.p(t); ++mu)
                            out[full.index(t, std::size_t(T[t][k]), mu)] += fv * dg[sub_index(full, T, t, k, mu)];
                }
                for (std::size_t s = 0; s + 1 < full.h(); ++s)
                    out[full.z_index(s)] += df[sub_z_index(full, S, s)] * gv + fv * dg[sub_z_index(full, T, s)];
            });
            return out;
        };
    return TensorElement(f.seqs(), deg, f.lattice(), std::move(ev), std::move(gr));
}

TensorElement tensor_combination(Complex a, const TensorElement& f, Complex b, const TensorElement& g) {
    require_same_seqs(f, g, "tensor_combination");
    if (f.degrees() != g.degrees()) throw DomainError("tensor_combination: different degrees");
    Evaluator ev = [a, f, b, g](std::span<const Complex> z) { return a * f(z) + b * g(z); };
    GradientFn gr;
    if (f.analytic() && g.analytic())
        gr = [a, f, b, g](std::span<const Complex> z) {
            auto x = f.gradient(z);
            auto y = g.gradient(z);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = a * x[i] + b * y[i];
            return x;
        };
    return TensorElement(f.seqs(), f.degrees(), f.lattice(), std::move(ev), std::move(gr));
}

// --- generator table ----------------------------------------------------------

GeneratorBracketTable::GeneratorBracketTable(std::vector<Seq> seqs, ZCoupling mode)
    : seqs_(std::move(seqs)), mode_(mode) {
    TensorShape check(seqs_, std::vector<int>(seqs_.size(), 0));
}

Rational GeneratorBracketTable::with_coordinate(std::size_t t, std::size_t t2, std::size_t mu) const {
    if (t >= seqs_.size() || t2 >= seqs_.size() || mu >= seqs_[t2].size())
        throw DomainError("bracket table: index out of range");
    const Seq& M = seqs_[t2];
    const long long dM = d(M);
    if (t2 == t) return Rational(-(d(M, 0, mu) + d(M, mu + 1, M.size())), dM);
    if (t2 == t + 1) return Rational(d(M, mu + 1, M.size()), dM);
    if (t2 + 1 == t) return Rational(d(M, 0, mu), dM);
    return Rational(0);
}

Rational GeneratorBracketTable::with_coupling(std::size_t t, std::size_t s) const {
    const std::size_t h = seqs_.size();
    if (t >= h || s + 1 >= h) throw DomainError("bracket table: index out of range");
    if (s == t) {
        const Seq &N = seqs_[t], &M = seqs_[t + 1];
        return Rational(d(M, 1, M.size()), d(M)) + Rational(d(N, 0, N.size() - 1) + 1, d(N));
    }
    if (s + 1 == t) {
        const Seq &N = seqs_[s], &M = seqs_[t];
        return -(Rational(d(M, 1, M.size()) + 1, d(M)) + Rational(d(N, 0, N.size() - 1), d(N)));
    }
    if (mode_ == ZCoupling::completed) {
        if (s == t + 1) return Rational(-1, d(seqs_[t + 1]));
        if (s + 2 == t) return Rational(1, d(seqs_[s + 1]));
    }
    return Rational(0);
}

Complex GeneratorBracketTable::diagonal(std::span<const Complex> u, std::span<const Complex> v,
                                        const LatticeParams& lat) {
    const std::size_t p = u.size();
    return theta_logd(v[0] - u[0], lat) + theta_logd(v[p - 1] - u[p - 1], lat) - two_pi_i;
}

Complex GeneratorBracketTable::swap(std::span<const Complex> u, std::span<const Complex> v, std::size_t a,
                                    const LatticeParams& lat) {
    // a is 0-based: the heads u_0..u_a and v_0..v_a change places
    return theta_prime_zero(lat) * theta_eval(v[a] + v[a + 1] - u[a] - u[a + 1], lat) /
           (theta_guarded(v[a] - u[a], lat) * theta_guarded(v[a + 1] - u[a + 1], lat));
}

Complex GeneratorBracketTable::adjacent(Complex u_last, Complex v_first, Complex z, const LatticeParams& lat) {
    return theta_logd(u_last - v_first + z, lat) - Complex(0, pi);
}

TensorElement tensor_bracket(const TensorElement& f, const TensorElement& g, const GeneratorBracketTable& table) {
    require_same_seqs(f, g, "tensor_bracket");
    if (table.seqs() != f.seqs()) throw DomainError("tensor_bracket: table built for other sequences");
    const auto deg = add_degrees(f.degrees(), g.degrees());
    const TensorShape full(f.seqs(), deg);
    const std::size_t h = full.h();
    const LatticeParams lat = f.lattice();

    // coupling of every generator of one factor with each commuting variable,
    // indexed [t][t2][mu] and [t][s]
    std::vector<std::vector<std::vector<double>>> kx(h);
    std::vector<std::vector<double>> kz(h);
    for (std::size_t t = 0; t < h; ++t) {
        kx[t].resize(h);
        for (std::size_t t2 = 0; t2 < h; ++t2)
            for (std::size_t mu = 0; mu < full.p(t2); ++mu) kx[t][t2].push_back(to_double(table.with_coordinate(t, t2, mu)));
        for (std::size_t s = 0; s + 1 < h; ++s) kz[t].push_back(to_double(table.with_coupling(t, s)));
    }

    Evaluator ev = [f, g, full, h, lat, kx, kz](std::span<const Complex> z) {
        std::vector<Complex> fa, ga, fs, gs;
        Complex total = 0;
        for_each_split(full.degrees, f.degrees(), [&](const Selection& S, const Selection& T) {
            gather(z, full, S, fa);
            gather(z, full, T, ga);
            const Complex fv = f(fa), gv = g(ga);
            const auto df = f.gradient(fa), dg = g.gradient(ga);

            // generators against coefficients: {E_f, c_g} and -{E_g, c_f}
            Complex term = 0;
            for (std::size_t t2 = 0; t2 < h; ++t2)
                for (std::size_t mu = 0; mu < full.p(t2); ++mu) {
                    double cf = 0, cg = 0;
                    for (std::size_t t = 0; t < h; ++t) {
                        cf += double(f.degrees()[t]) * kx[t][t2][mu];
                        cg += double(g.degrees()[t]) * kx[t][t2][mu];
                    }
                    for (std::size_t k = 0; k < T[t2].size(); ++k) term += fv * cf * dg[sub_index(full, T, t2, k, mu)];
                    for (std::size_t k = 0; k < S[t2].size(); ++k) term -= gv * cg * df[sub_index(full, S, t2, k, mu)];
                }
            for (std::size_t s = 0; s + 1 < h; ++s) {
                double cf = 0, cg = 0;
                for (std::size_t t = 0; t < h; ++t) {
                    cf += double(f.degrees()[t]) * kz[t][s];
                    cg += double(g.degrees()[t]) * kz[t][s];
                }
                term += fv * cf * dg[sub_z_index(full, T, s)] - gv * cg * df[sub_z_index(full, S, s)];
            }

            // generators against generators
            Complex K = 0;
            for (std::size_t t = 0; t < h; ++t)
                for (std::size_t a = 0; a < S[t].size(); ++a) {
                    const std::size_t p = full.p(t);
                    std::span<const Complex> u(&fa[sub_index(full, S, t, a, 0)], p);
                    for (std::size_t t2 = 0; t2 < h; ++t2)
                        for (std::size_t b = 0; b < T[t2].size(); ++b) {
                            std::span<const Complex> v(&ga[sub_index(full, T, t2, b, 0)], full.p(t2));
                            if (t2 == t) {
                                K += GeneratorBracketTable::diagonal(u, v, lat);
                                for (std::size_t psi = 0; psi + 1 < p; ++psi) {
                                    // f keeps its tail and takes g's heads, and vice versa
                                    fs = fa;
                                    gs = ga;
                                    for (std::size_t j = 0; j <= psi; ++j) {
                                        fs[sub_index(full, S, t, a, j)] = v[j];
                                        gs[sub_index(full, T, t, b, j)] = u[j];
                                    }
                                    std::span<const Complex> um(&fs[sub_index(full, S, t, a, 0)], p);
                                    std::span<const Complex> vm(&gs[sub_index(full, T, t, b, 0)], p);
                                    term += GeneratorBracketTable::swap(um, vm, psi, lat) * f(fs) * g(gs);
                                }
                            } else if (t2 == t + 1) {
                                K += GeneratorBracketTable::adjacent(u[p - 1], v[0], z[full.z_index(t)], lat);
                            } else if (t2 + 1 == t) {
                                K -= GeneratorBracketTable::adjacent(v[v.size() - 1], u[0], z[full.z_index(t2)], lat);
                            }
                        }
                }
            total += term + K * fv * gv;
        });
        return total;
    };
    return TensorElement(f.seqs(), deg, lat, std::move(ev));
}

// --- formal words -------------------------------------------------------------

bool nilpotent(const Monomial& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            if (m[i].factor != m[j].factor) continue;
            for (std::size_t mu = 0; mu < m[i].labels.size(); ++mu)
                if (m[i].labels[mu] == m[j].labels[mu]) return true;
        }
    return false;
}

WordSum encode_X(const TensorElement& f, const LabelPoint& pt, const std::vector<int>& pool) {
    const TensorShape& sh = f.shape();
    if (sh.total_degree() > 4) throw DomainError("encode_X: total degree above 4");
    if (pool.size() != sh.h()) throw DomainError("encode_X: one pool size per factor");
    if (pt.values.size() != sh.h() || pt.z.size() + 1 != sh.h()) throw DomainError("encode_X: label point shape");
    for (std::size_t t = 0; t < sh.h(); ++t) {
        if (pool[t] < sh.degrees[t]) throw DomainError("encode_X: pool smaller than the degree");
        if (pt.values[t].size() != sh.p(t)) throw DomainError("encode_X: label point shape");
        for (auto& col : pt.values[t])
            if (col.size() < std::size_t(pool[t])) throw DomainError("encode_X: label point shape");
    }

    // all generators of each factor, in increasing order
    std::vector<std::vector<Generator>> gens(sh.h());
    for (std::size_t t = 0; t < sh.h(); ++t) {
        std::vector<int> lab(sh.p(t), 0);
        while (true) {
            gens[t].push_back({int(t), lab});
            std::size_t i = sh.p(t);
            while (i > 0 && lab[i - 1] == pool[t] - 1) lab[--i] = 0;
            if (i == 0) break;
            ++lab[i - 1];
        }
    }

    WordSum out;
    Monomial m;
    std::vector<Complex> args(sh.arity());
    std::function<void(std::size_t, std::size_t, std::size_t)> rec = [&](std::size_t t, std::size_t k,
                                                                          std::size_t from) {
        if (t == sh.h()) {
            if (nilpotent(m)) return;
            std::size_t pos = 0;
            for (const auto& gnr : m)
                for (std::size_t mu = 0; mu < gnr.labels.size(); ++mu)
                    args[pos++] = pt.values[std::size_t(gnr.factor)][mu][std::size_t(gnr.labels[mu])];
            for (std::size_t s = 0; s < pt.z.size(); ++s) args[pos++] = pt.z[s];
            out[m] = f(args);
            return;
        }
        if (k == std::size_t(sh.degrees[t])) {
            rec(t + 1, 0, 0);
            return;
        }
        for (std::size_t i = from; i < gens[t].size(); ++i) {
            m.push_back(gens[t][i]);
            rec(t, k + 1, i + 1);
            m.pop_back();
        }
    };
    rec(0, 0, 0);
    return out;
}

WordSum word_product(const WordSum& a, const WordSum& b) {
    WordSum out;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) {
            Monomial m = ma;
            m.insert(m.end(), mb.begin(), mb.end());
            std::sort(m.begin(), m.end());
            if (nilpotent(m)) continue;
            out[m] += ca * cb;
        }
    return out;
}

// --- membership conditions ----------------------------------------------------

std::vector<PoleLocus> tensor_loci(const TensorShape& s) {
    std::vector<PoleLocus> out;
    for (std::size_t t = 0; t < s.h(); ++t)
        for (std::size_t mu = 0; mu < s.p(t); ++mu) {
            std::vector<std::size_t> idx;
            for (int b = 0; b < s.degrees[t]; ++b) idx.push_back(s.index(t, std::size_t(b), mu));
            auto l = pairwise_loci(idx);
            out.insert(out.end(), l.begin(), l.end());
        }
    for (std::size_t t = 0; t + 1 < s.h(); ++t)
        for (int a = 0; a < s.degrees[t + 1]; ++a)
            for (int b = 0; b < s.degrees[t]; ++b) {
                PoleLocus l;
                l.terms = {{s.index(t + 1, std::size_t(a), 0), 1},
                           {s.index(t, std::size_t(b), s.p(t) - 1), -1},
                           {s.z_index(t), -1}};
                out.push_back(l);
            }
    return out;
}

std::vector<Complex> tensor_point(Sampler& smp, const TensorShape& s) { return smp.tuple(s.arity(), tensor_loci(s)); }

VerifyReport tensor_membership_check(const TensorElement& f, const SampleSpec& spec, double tol) {
    const TensorShape& sh = f.shape();
    const Complex eta = f.lattice().eta;
    Sampler smp(spec, eta);
    ResidualAccumulator sym, per, quasi;
    for (std::size_t it = 0; it < spec.count; ++it) {
        auto z = tensor_point(smp, sh);
        const Complex v = f(z);
        for (std::size_t t = 0; t < sh.h(); ++t) {
            for (int b = 1; b < sh.degrees[t]; ++b) {
                auto w = z;
                for (std::size_t mu = 0; mu < sh.p(t); ++mu)
                    std::swap(w[sh.index(t, 0, mu)], w[sh.index(t, std::size_t(b), mu)]);
                sym.add(f(w), v);
            }
            for (int b = 0; b < sh.degrees[t]; ++b)
                for (std::size_t mu = 0; mu < sh.p(t); ++mu) {
                    const std::size_t i = sh.index(t, std::size_t(b), mu);
                    auto w = z;
                    w[i] += 1.0;
                    per.add(f(w), v);
                    w[i] = z[i] + eta;
                    Complex e = double(sh.seqs[t][mu]) * z[i];
                    if (mu > 0) e -= z[i - 1];
                    if (mu + 1 < sh.p(t)) e -= z[i + 1];
                    quasi.add(f(w), std::exp(-two_pi_i * e) * v);
                }
        }
    }
    ResidualAccumulator all;
    all.merge(sym);
    all.merge(per);
    all.merge(quasi);
    VerifyReport r;
    r.suite = "tensor-membership";
    r.seed = spec.seed;
    r.count = spec.count;
    all.finish(r, tol);
    r.scalars["symmetry_max"] = sym.max();
    r.scalars["periodicity_max"] = per.max();
    r.scalars["quasi_periodicity_max"] = quasi.max();
    return r;
}

Complex theta_cleared(const TensorElement& f, std::span<const Complex> args) {
    const TensorShape& sh = f.shape();
    Complex c = 1;
    for (std::size_t t = 0; t + 1 < sh.h(); ++t)
        for (int a = 0; a < sh.degrees[t + 1]; ++a)
            for (int b = 0; b < sh.degrees[t]; ++b)
                c *= theta_eval(args[sh.index(t + 1, std::size_t(a), 0)] -
                                    args[sh.index(t, std::size_t(b), sh.p(t) - 1)] - args[sh.z_index(t)],
                                f.lattice());
    return c * f(args);
}

namespace {

// least-squares slope of log|v| against log eps
double loglog_slope(const std::vector<double>& eps, const std::vector<double>& v) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(v[i] > 0)) return std::numeric_limits<double>::infinity(); // vanishes identically
        const double x = std::log(eps[i]), y = std::log(v[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

const std::vector<double> ray_steps{1e-2, 1e-3, 1e-4, 1e-5};

} // namespace

VerifyReport condition3_check(const TensorElement& f, const SampleSpec& spec) {
    const TensorShape& sh = f.shape();
    VerifyReport r;
    r.suite = "condition3";
    r.seed = spec.seed;
    r.count = spec.count;
    std::vector<std::size_t> pairs;
    for (std::size_t t = 0; t + 1 < sh.h(); ++t)
        if (sh.degrees[t] > 0 && sh.degrees[t + 1] > 0) pairs.push_back(t);
    if (pairs.empty()) {
        r.tol = 0.1;
        r.pass = true;
        r.scalars["vacuous"] = std::string("no adjacent factors of positive degree");
        return r;
    }
    Sampler smp(spec, f.lattice().eta);
    ResidualAccumulator acc;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, coincident = lo;
    for (std::size_t it = 0; it < spec.count; ++it) {
        const auto base = tensor_point(smp, sh);
        for (std::size_t t : pairs) {
            const std::size_t a = smp.index(std::size_t(sh.degrees[t + 1]));
            const std::size_t b = smp.index(std::size_t(sh.degrees[t]));
            const Complex dir = std::polar(1.0, 2 * pi * smp.uniform());
            const std::size_t iy = sh.index(t + 1, a, 0), ix = sh.index(t, b, sh.p(t) - 1);
            std::vector<double> mag;
            for (double e : ray_steps) {
                auto w = base;
                w[iy] = w[ix] + w[sh.z_index(t)] + e * dir;
                mag.push_back(std::abs(theta_cleared(f, w)));
            }
            const double s = loglog_slope(ray_steps, mag);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
            acc.add(std::max(0.0, -s));
        }
        // measured only: coincident labels inside one factor
        for (std::size_t t = 0; t < sh.h(); ++t) {
            if (sh.degrees[t] < 2) continue;
            const std::size_t mu = smp.index(sh.p(t));
            const Complex dir = std::polar(1.0, 2 * pi * smp.uniform());
            std::vector<double> mag;
            for (double e : ray_steps) {
                auto w = base;
                w[sh.index(t, 1, mu)] = w[sh.index(t, 0, mu)] + e * dir;
                mag.push_back(std::abs(f(w)));
            }
            coincident = std::min(coincident, loglog_slope(ray_steps, mag));
        }
    }
    acc.finish(r, 0.1);
    r.scalars["min_slope"] = lo;
    r.scalars["max_slope"] = hi;
    if (coincident != std::numeric_limits<double>::infinity())
        r.scalars["coincident_label_min_slope"] = coincident;
    return r;
}

VerifyReport condition4_check(const TensorElement& f, const SampleSpec& spec, double tol) {
    const TensorShape& sh = f.shape();
    VerifyReport r;
    r.suite = "condition4";
    r.seed = spec.seed;
    r.count = spec.count;
    struct Locus {
        std::size_t t;
        bool two_on_right; // two blocks of factor t+1 meet one of factor t, or the reverse
    };
    std::vector<Locus> loci;
    for (std::size_t t = 0; t + 1 < sh.h(); ++t) {
        if (sh.degrees[t + 1] >= 2 && sh.degrees[t] >= 1) loci.push_back({t, true});
        if (sh.degrees[t] >= 2 && sh.degrees[t + 1] >= 1) loci.push_back({t, false});
    }
    if (loci.empty()) {
        r.tol = tol;
        r.pass = true;
        r.scalars["vacuous"] = std::string("no codimension-2 locus for these degrees");
        return r;
    }
    constexpr int M = 16;
    constexpr double rad = 0.05;
    Sampler smp(spec, f.lattice().eta);
    ResidualAccumulator acc;
    for (std::size_t it = 0; it < spec.count; ++it) {
        const auto base = tensor_point(smp, sh);
        for (const auto& L : loci) {
            const std::size_t t = L.t, pl = sh.p(t) - 1;
            std::size_t i1, i2;
            Complex centre;
            if (L.two_on_right) {
                // x_{1,m1,t+1} = x_{1,m2,t+1} = x_{p,m3,t} + z
                const std::size_t m1 = smp.index(std::size_t(sh.degrees[t + 1]));
                std::size_t m2 = smp.index(std::size_t(sh.degrees[t + 1]) - 1);
                if (m2 >= m1) ++m2;
                const std::size_t m3 = smp.index(std::size_t(sh.degrees[t]));
                i1 = sh.index(t + 1, m1, 0);
                i2 = sh.index(t + 1, m2, 0);
                centre = base[sh.index(t, m3, pl)] + base[sh.z_index(t)];
            } else {
                // x_{1,m1,t+1} = x_{p,m2,t} + z = x_{p,m3,t} + z
                const std::size_t m1 = smp.index(std::size_t(sh.degrees[t + 1]));
                const std::size_t m2 = smp.index(std::size_t(sh.degrees[t]));
                std::size_t m3 = smp.index(std::size_t(sh.degrees[t]) - 1);
                if (m3 >= m2) ++m3;
                i1 = sh.index(t, m2, pl);
                i2 = sh.index(t, m3, pl);
                centre = base[sh.index(t + 1, m1, 0)] - base[sh.z_index(t)];
            }
            Complex mean = 0;
            double scale = 0;
            auto w = base;
            for (int a = 0; a < M; ++a)
                for (int b = 0; b < M; ++b) {
                    w[i1] = centre + rad * std::polar(1.0, 2 * pi * (a + 0.5) / M);
                    w[i2] = centre + 2 * rad * std::polar(1.0, 2 * pi * (b + 0.25) / M);
                    const Complex v = theta_cleared(f, w);
                    mean += v;
                    scale = std::max(scale, std::abs(v));
                }
            mean /= double(M * M);
            acc.add(scale > 0 ? std::abs(mean) / scale : 0.0);
        }
    }
    acc.finish(r, tol);
    return r;
}

} // namespace ellipq
