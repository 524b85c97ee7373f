#include "ellipq/boson.hpp"

#include <algorithm>

namespace ellipq {

namespace {

double to_double(const Rational& r) { return double(r.numerator()) / double(r.denominator()); }

Complex T_kernel(Complex u, Complex nt, const LatticeParams& lat) {
    return theta_eval(u - nt, lat) / theta_guarded(u, lat);
}

} // namespace

void SiteConfig::validate() const {
    if (factors.empty()) throw DomainError("site config: no factors");
    lat.validate();
    for (const auto& f : factors) {
        if (f.seq.empty()) throw DomainError("site config: empty sequence");
        if (f.sites.size() != f.seq.size()) throw DomainError("site config: one site count per coordinate");
        for (int v : f.seq)
            if (v < 2) throw DomainError("site config: sequence entries must be >= 2");
        for (int s : f.sites)
            if (s < 1) throw DomainError("site config: site counts must be positive");
    }
}

std::vector<Seq> SiteConfig::seqs() const {
    std::vector<Seq> out;
    for (const auto& f : factors) out.push_back(f.seq);
    return out;
}

std::vector<Segment> segments(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw DomainError("segments: different lengths");
    std::vector<Segment> out;
    std::optional<Segment> cur;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j] != b[j]) {
            if (!cur) cur = Segment{j, j};
            else cur->second = j;
        } else if (cur) {
            out.push_back(*cur);
            cur.reset();
        }
    }
    if (cur) out.push_back(*cur);
    return out;
}

// --- coefficients ---------------------------------------------------------------

void Coefficient::multiply(std::shared_ptr<const Fn> fn) { atoms_.push_back({std::move(fn), {}}); }

void Coefficient::multiply(const Coefficient& o) {
    scalar_ *= o.scalar_;
    atoms_.insert(atoms_.end(), o.atoms_.begin(), o.atoms_.end());
}

void Coefficient::shift(const std::vector<Rational>& s) {
    for (auto& a : atoms_) {
        if (a.shift.empty()) a.shift.assign(s.size(), Rational(0));
        for (std::size_t i = 0; i < s.size(); ++i) a.shift[i] += s[i];
    }
}

Complex Coefficient::operator()(std::span<const Complex> y, Complex tau) const {
    Complex r = scalar_;
    std::vector<Complex> w;
    for (const auto& a : atoms_) {
        if (a.shift.empty()) {
            r *= (*a.fn)(y);
            continue;
        }
        w.assign(y.begin(), y.end());
        for (std::size_t i = 0; i < w.size(); ++i)
            if (a.shift[i].numerator() != 0) w[i] += to_double(a.shift[i]) * tau;
        r *= (*a.fn)(w);
    }
    return r;
}

// --- algebra --------------------------------------------------------------------

BosonAlgebra::BosonAlgebra(SiteConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    y_offsets_.resize(h());
    for (std::size_t t = 0; t < h(); ++t)
        for (std::size_t mu = 0; mu < p(t); ++mu) {
            y_offsets_[t].push_back(nvars_);
            nvars_ += std::size_t(cfg_.factors[t].sites[mu]);
        }
    nvars_ += h() - 1;
    for (const auto& g : generators()) shifts_[g] = compute_shift(g);
}

std::size_t BosonAlgebra::y_index(std::size_t t, std::size_t mu, std::size_t site) const {
    if (t >= h() || mu >= p(t) || site >= std::size_t(cfg_.factors[t].sites[mu]))
        throw DomainError("boson: variable index out of range");
    return y_offsets_[t][mu] + site;
}

std::size_t BosonAlgebra::z_index(std::size_t s) const {
    if (s + 1 >= h()) throw DomainError("boson: no such coupling variable");
    return nvars_ - (h() - 1) + s;
}

std::string BosonAlgebra::variable_name(std::size_t v) const {
    for (std::size_t t = 0; t < h(); ++t)
        for (std::size_t mu = 0; mu < p(t); ++mu) {
            const std::size_t o = y_offsets_[t][mu];
            if (v >= o && v < o + std::size_t(cfg_.factors[t].sites[mu]))
                return "y[" + std::to_string(t) + "," + std::to_string(mu) + "," + std::to_string(v - o) + "]";
        }
    return "z[" + std::to_string(v - (nvars_ - (h() - 1))) + "]";
}

void BosonAlgebra::check(const BosonGenerator& g) const {
    if (g.factor < 0 || std::size_t(g.factor) >= h()) throw DomainError("boson: generator factor out of range");
    const auto& f = cfg_.factors[std::size_t(g.factor)];
    if (g.sites.size() != f.seq.size()) throw DomainError("boson: generator needs one site per coordinate");
    for (std::size_t mu = 0; mu < g.sites.size(); ++mu)
        if (g.sites[mu] < 0 || g.sites[mu] >= f.sites[mu]) throw DomainError("boson: site out of range");
}

std::vector<BosonGenerator> BosonAlgebra::generators() const {
    std::vector<BosonGenerator> out;
    for (std::size_t t = 0; t < h(); ++t) {
        const auto& f = cfg_.factors[t];
        std::vector<int> s(f.seq.size(), 0);
        while (true) {
            out.push_back({int(t), s});
            std::size_t i = s.size();
            while (i > 0 && s[i - 1] == f.sites[i - 1] - 1) s[--i] = 0;
            if (i == 0) break;
            ++s[i - 1];
        }
    }
    return out;
}

Complex BosonAlgebra::step(std::size_t t) const {
    return cfg_.convention == ShiftConvention::absolute ? double(d(cfg_.factors[t].seq)) * cfg_.tau : cfg_.tau;
}

std::vector<Rational> BosonAlgebra::compute_shift(const BosonGenerator& gen) const {
    const bool ratio = cfg_.convention == ShiftConvention::ratio;
    const std::size_t g = std::size_t(gen.factor);
    const Seq& N = cfg_.factors[g].seq;
    const long long dn = d(N);
    std::vector<Rational> s(nvars_, Rational(0));
    for (std::size_t gv = 0; gv < h(); ++gv)
        for (std::size_t lam = 0; lam < p(gv); ++lam)
            for (int site = 0; site < cfg_.factors[gv].sites[lam]; ++site) {
                Rational v(0);
                if (gv == g) {
                    const long long D = d(N, 0, lam) + d(N, lam + 1, N.size());
                    const bool own = gen.sites[lam] == site;
                    if (ratio) v = own ? Rational(1) - Rational(D, dn) : -Rational(D, dn);
                    else v = own ? Rational(dn - D) : Rational(-D);
                } else if (gv == g + 1) {
                    const Seq& M = cfg_.factors[gv].seq;
                    v = Rational(d(M, lam + 1, M.size()), d(M));
                } else if (gv + 1 == g) {
                    const Seq& M = cfg_.factors[gv].seq;
                    v = Rational(d(M, 0, lam), d(M));
                }
                s[y_index(gv, lam, std::size_t(site))] = v;
            }
    if (ratio) {
        GeneratorBracketTable tab(cfg_.seqs(), cfg_.zcoupling);
        for (std::size_t gp = 0; gp + 1 < h(); ++gp) s[z_index(gp)] = tab.with_coupling(g, gp);
    }
    return s;
}

Rational BosonAlgebra::shift(const BosonGenerator& g, std::size_t var) const {
    if (var >= nvars_) throw DomainError("boson: variable out of range");
    return shift_vector(g)[var];
}

const std::vector<Rational>& BosonAlgebra::shift_vector(const BosonGenerator& g) const {
    auto it = shifts_.find(g);
    if (it == shifts_.end()) {
        check(g);
        throw DomainError("boson: unknown generator");
    }
    return it->second;
}

BosonSum BosonAlgebra::exchange(const BosonGenerator& A, const BosonGenerator& B, std::optional<Segment> seg) const {
    check(A);
    check(B);
    const LatticeParams lat = cfg_.lat;
    const Complex tau = cfg_.tau;
    auto term = [&](Coefficient::Fn fn, NCWord w) {
        BosonTerm t;
        t.coeff.multiply(std::make_shared<const Coefficient::Fn>(std::move(fn)));
        t.word = std::move(w);
        return t;
    };
    BosonSum out;
    if (A.factor == B.factor) {
        const std::size_t g = std::size_t(A.factor);
        const auto& a = A.sites;
        const auto& b = B.sites;
        const auto segs = segments(a, b);
        if (segs.empty()) {
            out.push_back({Coefficient(1.0), {A, B}});
            return out;
        }
        const auto [s0, s1] = seg ? *seg : segs.front();
        if (std::find(segs.begin(), segs.end(), Segment{s0, s1}) == segs.end())
            throw DomainError("exchange: not a segment of this pair");
        const Complex nt = step(g);
        std::vector<std::size_t> ia, ib;
        for (std::size_t mu = 0; mu < a.size(); ++mu) {
            ia.push_back(y_index(g, mu, std::size_t(a[mu])));
            ib.push_back(y_index(g, mu, std::size_t(b[mu])));
        }
        auto splice = [](const std::vector<int>& x, const std::vector<int>& y, std::size_t lo, std::size_t hi) {
            std::vector<int> r = x;
            for (std::size_t j = lo; j <= hi; ++j) r[j] = y[j];
            return r;
        };
        const Complex phase = std::exp(-two_pi_i * nt);
        out.push_back(term(
            [=](std::span<const Complex> Y) {
                const Complex u1 = Y[ib[s0]] - Y[ia[s0]], up = Y[ib[s1]] - Y[ia[s1]];
                return phase * theta_eval(u1, lat) * theta_eval(up + nt, lat) /
                       (theta_guarded(u1 - nt, lat) * theta_guarded(up, lat));
            },
            {BosonGenerator{A.factor, splice(a, b, s0, s1)}, BosonGenerator{A.factor, splice(b, a, s0, s1)}}));
        for (std::size_t t = s0; t < s1; ++t) {
            const std::vector<int> x1 = splice(a, b, s0, t), x2 = splice(b, a, s0, t);
            out.push_back(term(
                [=](std::span<const Complex> Y) {
                    const Complex u1 = Y[ib[s0]] - Y[ia[s0]];
                    const Complex ut = Y[ib[t]] - Y[ia[t]], ut1 = Y[ib[t + 1]] - Y[ia[t + 1]];
                    return phase * theta_eval(nt, lat) * theta_eval(u1, lat) / theta_guarded(u1 - nt, lat) *
                           theta_eval(ut + ut1, lat) / (theta_guarded(ut, lat) * theta_guarded(ut1, lat));
                },
                {BosonGenerator{A.factor, x1}, BosonGenerator{A.factor, x2}}));
        }
        return out;
    }
    const std::size_t ga = std::size_t(A.factor), gb = std::size_t(B.factor);
    if (ga + 1 != gb && gb + 1 != ga) {
        out.push_back({Coefficient(1.0), {B, A}});
        return out;
    }
    const bool forward = ga + 1 == gb;
    const std::size_t lo = forward ? ga : gb;
    const BosonGenerator& L = forward ? A : B;
    const BosonGenerator& H = forward ? B : A;
    const std::size_t iu = y_index(lo, p(lo) - 1, std::size_t(L.sites.back()));
    const std::size_t iv = y_index(lo + 1, 0, std::size_t(H.sites.front()));
    const std::size_t iz = z_index(lo);
    out.push_back(term(
        [=](std::span<const Complex> Y) {
            const Complex w = Y[iu] - Y[iv] + Y[iz];
            const Complex R = -std::exp(-two_pi_i * w) * theta_eval(w + tau / 2.0, lat) /
                              theta_guarded(-w + tau / 2.0, lat);
            return forward ? R : 1.0 / R;
        },
        {B, A}));
    return out;
}

bool BosonAlgebra::needs_rewrite(const BosonGenerator& A, const BosonGenerator& B) const {
    if (A.factor != B.factor) return A.factor > B.factor;
    return first_bad_segment(A, B).has_value();
}

std::optional<Segment> BosonAlgebra::first_bad_segment(const BosonGenerator& A, const BosonGenerator& B) const {
    if (A.factor != B.factor) return std::nullopt;
    for (const auto& s : segments(A.sites, B.sites))
        if (A.sites[s.first] > B.sites[s.first]) return s;
    return std::nullopt;
}

BosonSum BosonAlgebra::apply_at(const BosonTerm& t, std::size_t i, std::optional<Segment> seg) const {
    if (i + 1 >= t.word.size()) throw DomainError("apply_at: position out of range");
    std::vector<Rational> left(nvars_, Rational(0));
    bool any = false;
    for (std::size_t j = 0; j < i; ++j) {
        const auto& s = shift_vector(t.word[j]);
        for (std::size_t v = 0; v < nvars_; ++v) left[v] += s[v];
        any = true;
    }
    BosonSum out;
    for (auto& r : exchange(t.word[i], t.word[i + 1], seg)) {
        BosonTerm n;
        n.coeff = t.coeff;
        if (any) r.coeff.shift(left);
        n.coeff.multiply(r.coeff);
        n.word = t.word;
        n.word[i] = r.word[0];
        n.word[i + 1] = r.word[1];
        out.push_back(std::move(n));
    }
    return out;
}

BosonSum BosonAlgebra::normal_order(BosonSum terms, RewriteStrategy strat, std::size_t max_steps) const {
    BosonSum done;
    std::vector<BosonTerm> stack(std::make_move_iterator(terms.begin()), std::make_move_iterator(terms.end()));
    std::size_t steps = 0;
    while (!stack.empty()) {
        BosonTerm t = std::move(stack.back());
        stack.pop_back();
        std::optional<std::size_t> pos;
        for (std::size_t i = 0; i + 1 < t.word.size(); ++i)
            if (needs_rewrite(t.word[i], t.word[i + 1])) {
                pos = i;
                if (strat == RewriteStrategy::leftmost) break;
            }
        if (!pos) {
            done.push_back(std::move(t));
            continue;
        }
        if (++steps > max_steps) throw RewriteLimitError("normal_order: rewrite step limit reached");
        for (auto& n : apply_at(t, *pos, first_bad_segment(t.word[*pos], t.word[*pos + 1])))
            stack.push_back(std::move(n));
    }
    return done;
}

BosonSum BosonAlgebra::multiply(const BosonSum& a, const BosonSum& b) const {
    BosonSum out;
    for (const auto& ta : a) {
        std::vector<Rational> s(nvars_, Rational(0));
        for (const auto& g : ta.word) {
            const auto& v = shift_vector(g);
            for (std::size_t i = 0; i < nvars_; ++i) s[i] += v[i];
        }
        for (const auto& tb : b) {
            BosonTerm n;
            n.coeff = ta.coeff;
            Coefficient c = tb.coeff;
            if (!ta.word.empty()) c.shift(s);
            n.coeff.multiply(c);
            n.word = ta.word;
            n.word.insert(n.word.end(), tb.word.begin(), tb.word.end());
            out.push_back(std::move(n));
        }
    }
    return out;
}

BosonSum BosonAlgebra::x_embed(const SymElement& f, std::size_t factor) const {
    if (factor >= h()) throw DomainError("x_embed: factor out of range");
    if (f.n_vec() != cfg_.factors[factor].seq) throw DomainError("x_embed: element law differs from the factor");
    if (f.grade() != 1) throw DomainError("x_embed: grade-one elements only");
    BosonSum out;
    for (const auto& g : generators()) {
        if (std::size_t(g.factor) != factor) continue;
        std::vector<std::size_t> idx;
        for (std::size_t mu = 0; mu < g.sites.size(); ++mu) idx.push_back(y_index(factor, mu, std::size_t(g.sites[mu])));
        BosonTerm t;
        t.coeff.multiply(std::make_shared<const Coefficient::Fn>([f, idx](std::span<const Complex> Y) {
                             std::vector<Complex> a;
                             for (auto i : idx) a.push_back(Y[i]);
                             return f(a);
                         }));
        t.word = {g};
        out.push_back(std::move(t));
    }
    return out;
}

std::map<NCWord, Complex> BosonAlgebra::evaluate(const BosonSum& s, std::span<const Complex> y) const {
    if (y.size() != nvars_) throw DomainError("evaluate: wrong number of variables");
    std::map<NCWord, Complex> out;
    for (const auto& t : s) out[t.word] += t.coeff(y, cfg_.tau);
    return out;
}

std::vector<PoleLocus> BosonAlgebra::loci() const {
    std::vector<PoleLocus> out;
    for (std::size_t t = 0; t < h(); ++t)
        for (std::size_t mu = 0; mu < p(t); ++mu) {
            std::vector<std::size_t> idx;
            for (int s = 0; s < cfg_.factors[t].sites[mu]; ++s) idx.push_back(y_index(t, mu, std::size_t(s)));
            auto l = pairwise_loci(idx);
            out.insert(out.end(), l.begin(), l.end());
        }
    for (std::size_t t = 0; t + 1 < h(); ++t)
        for (int a = 0; a < cfg_.factors[t].sites.back(); ++a)
            for (int b = 0; b < cfg_.factors[t + 1].sites.front(); ++b) {
                PoleLocus l;
                l.terms = {{y_index(t, p(t) - 1, std::size_t(a)), 1},
                           {y_index(t + 1, 0, std::size_t(b)), -1},
                           {z_index(t), 1}};
                out.push_back(l);
            }
    return out;
}

std::vector<Complex> BosonAlgebra::point(Sampler& smp) const { return smp.tuple(nvars_, loci()); }

NCWord random_word(const BosonAlgebra& alg, std::size_t len, std::mt19937_64& rng) {
    const auto gens = alg.generators();
    std::uniform_int_distribution<std::size_t> u(0, gens.size() - 1);
    NCWord w;
    for (std::size_t i = 0; i < len; ++i) w.push_back(gens[u(rng)]);
    return w;
}

namespace {

double compare_maps(const std::map<NCWord, Complex>& a, const std::map<NCWord, Complex>& b) {
    double r = 0;
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        r = std::max(r, mixed_residual(v, it == b.end() ? Complex(0) : it->second));
    }
    for (const auto& [k, v] : b)
        if (!a.count(k)) r = std::max(r, mixed_residual(v, 0.0));
    return r;
}

} // namespace

double confluence_residual(const BosonAlgebra& alg, const NCWord& w, std::span<const Complex> y) {
    BosonSum start{{Coefficient(1.0), w}};
    auto l = alg.evaluate(alg.normal_order(start, RewriteStrategy::leftmost), y);
    auto r = alg.evaluate(alg.normal_order(start, RewriteStrategy::rightmost), y);
    return compare_maps(l, r);
}

double double_exchange_residual(const BosonAlgebra& alg, const BosonGenerator& A, const BosonGenerator& B,
                                std::span<const Complex> y) {
    BosonTerm start{Coefficient(1.0), {A, B}};
    BosonSum twice;
    for (const auto& t : alg.apply_at(start, 0))
        for (auto& u : alg.apply_at(t, 0)) twice.push_back(std::move(u));
    return compare_maps(alg.evaluate(twice, y), {{NCWord{A, B}, 1.0}});
}

HomomorphismResult homomorphism_residual(const BosonAlgebra& alg, const SymElement& f, const SymElement& g,
                                         std::span<const Complex> y) {
    const auto& cfg = alg.config();
    if (alg.h() != 1 || alg.p(0) != 1) throw DomainError("homomorphism: one factor with one coordinate");
    const int n = cfg.factors[0].seq[0];
    const Complex tau = cfg.tau, nt = double(n) * tau;
    const LatticeParams lat = cfg.lat;
    const SymElement hfg = star_product(f, g, tau);

    auto lhs = alg.evaluate(alg.normal_order(alg.multiply(alg.x_embed(f), alg.x_embed(g))), y);

    // the literal rule: x(h) = sum over ordered site pairs of h(z_a1, z_a2 - 2 tau) e_a1 e_a2
    const int sites = cfg.factors[0].sites[0];
    BosonSum lit;
    for (int a1 = 0; a1 < sites; ++a1)
        for (int a2 = 0; a2 < sites; ++a2) {
            BosonTerm t;
            const std::size_t i1 = std::size_t(a1), i2 = std::size_t(a2);
            t.coeff.multiply(std::make_shared<const Coefficient::Fn>([hfg, i1, i2, tau](std::span<const Complex> Y) {
                                 return hfg({Y[i1], Y[i2] - 2.0 * tau});
                             }));
            t.word = {BosonGenerator{0, {a1}}, BosonGenerator{0, {a2}}};
            lit.push_back(std::move(t));
        }
    auto literal = alg.evaluate(alg.normal_order(lit), y);

    HomomorphismResult r;
    for (const auto& [w, v] : lhs) {
        const std::size_t a1 = std::size_t(w[0].sites[0]), a2 = std::size_t(w[1].sites[0]);
        Complex expect;
        if (a1 == a2) expect = hfg({y[a1], y[a1] + nt}) / T_kernel(-nt, nt, lat);
        else expect = hfg({y[a1], y[a2]}) / T_kernel(y[a1] - y[a2], nt, lat);
        r.derived_max = std::max(r.derived_max, mixed_residual(v, expect));
    }
    r.literal_max = compare_maps(lhs, literal);
    return r;
}

ShiftComparison semiclassical_shift_check(const SiteConfig& cfg) {
    SiteConfig c = cfg;
    c.convention = ShiftConvention::ratio;
    BosonAlgebra alg(c);
    GeneratorBracketTable tab(c.seqs(), c.zcoupling);
    ShiftComparison out;
    std::optional<Rational> offset;
    for (const auto& g : alg.generators()) {
        const std::size_t t = std::size_t(g.factor);
        for (std::size_t t2 = 0; t2 < alg.h(); ++t2)
            for (std::size_t mu = 0; mu < alg.p(t2); ++mu)
                for (int s = 0; s < c.factors[t2].sites[mu]; ++s) {
                    const Rational sh = alg.shift(g, alg.y_index(t2, mu, std::size_t(s)));
                    const Rational tb = tab.with_coordinate(t, t2, mu);
                    if (t2 == t && g.sites[mu] == s) {
                        ++out.own_site_excluded;
                        if (!offset) offset = sh - tb;
                        else if (*offset != sh - tb) out.own_site_uniform = false;
                        continue;
                    }
                    ++out.compared;
                    if (sh != tb) ++out.mismatches;
                }
        for (std::size_t s = 0; s + 1 < alg.h(); ++s) {
            ++out.compared;
            if (alg.shift(g, alg.z_index(s)) != tab.with_coupling(t, s)) ++out.mismatches;
        }
    }
    if (offset) out.own_site_offset = *offset;
    return out;
}

std::vector<std::pair<Complex, Complex>> semiclassical_pairs(SiteConfig cfg, const BosonGenerator& A,
                                                             const BosonGenerator& B, std::span<const Complex> y,
                                                             double t) {
    auto sorted_key = [](NCWord w) {
        std::sort(w.begin(), w.end());
        return w;
    };
    const Complex dir = std::polar(1.0, 0.4);
    auto commutator = [&](Complex tau) {
        cfg.tau = tau;
        BosonAlgebra alg(cfg);
        auto ab = alg.evaluate(alg.normal_order({{Coefficient(1.0), {A, B}}}), y);
        auto ba = alg.evaluate(alg.normal_order({{Coefficient(1.0), {B, A}}}), y);
        std::map<NCWord, Complex> out;
        for (auto& [w, v] : ab) out[sorted_key(w)] += v / tau;
        for (auto& [w, v] : ba) out[sorted_key(w)] -= v / tau;
        return out;
    };
    auto sym = [&](double s) {
        auto plus = commutator(s * dir), minus = commutator(-s * dir);
        for (auto& [w, v] : minus) plus[w] += v;
        for (auto& [w, v] : plus) v *= 0.5;
        return plus;
    };
    auto S1 = sym(t), S2 = sym(t / 2);
    std::map<NCWord, Complex> est;
    for (auto& [w, v] : S2) est[w] += 4.0 * v / 3.0;
    for (auto& [w, v] : S1) est[w] -= v / 3.0;

    // prediction from the generator bracket table
    BosonAlgebra alg(cfg);
    const LatticeParams lat = cfg.lat;
    auto coords = [&](const BosonGenerator& g) {
        std::vector<Complex> v;
        for (std::size_t mu = 0; mu < g.sites.size(); ++mu)
            v.push_back(y[alg.y_index(std::size_t(g.factor), mu, std::size_t(g.sites[mu]))]);
        return v;
    };
    std::map<NCWord, Complex> pred;
    const auto u = coords(A), v = coords(B);
    if (A.factor == B.factor) {
        for (std::size_t mu = 0; mu < A.sites.size(); ++mu)
            if (A.sites[mu] == B.sites[mu]) throw DomainError("semiclassical_pairs: labels must differ everywhere");
        pred[sorted_key({A, B})] += GeneratorBracketTable::diagonal(u, v, lat);
        for (std::size_t psi = 0; psi + 1 < A.sites.size(); ++psi) {
            BosonGenerator A2 = A, B2 = B;
            for (std::size_t j = 0; j <= psi; ++j) std::swap(A2.sites[j], B2.sites[j]);
            pred[sorted_key({A2, B2})] += GeneratorBracketTable::swap(u, v, psi, lat);
        }
    } else if (A.factor + 1 == B.factor) {
        pred[sorted_key({A, B})] +=
            GeneratorBracketTable::adjacent(u.back(), v.front(), y[alg.z_index(std::size_t(A.factor))], lat);
    } else if (B.factor + 1 == A.factor) {
        pred[sorted_key({A, B})] -=
            GeneratorBracketTable::adjacent(v.back(), u.front(), y[alg.z_index(std::size_t(B.factor))], lat);
    }
    std::vector<std::pair<Complex, Complex>> out;
    for (auto& [w, e] : est) out.emplace_back(pred.count(w) ? pred[w] : Complex(0), e);
    for (auto& [w, pv] : pred)
        if (!est.count(w)) out.emplace_back(pv, 0.0);
    return out;
}

} // namespace ellipq
