#include "ellipq/verify.hpp"

#include <functional>

#include "json.hpp"

#include "ellipq/parallel.hpp"
#include "ellipq/seqcomb.hpp"

namespace ellipq {

std::string VerifyReport::to_json(int indent) const {
    using nlohmann::ordered_json;
    ordered_json sc = ordered_json::object();
    for (const auto& [k, v] : scalars)
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, Complex>) sc[k] = {{"re", x.real()}, {"im", x.imag()}};
                else sc[k] = x;
            },
            v);
    ordered_json j;
    j["suite"] = suite;
    j["seed"] = seed;
    j["count"] = count;
    j["tol"] = tol;
    j["max_residual"] = max_residual;
    j["mean_residual"] = mean_residual;
    j["pass"] = pass;
    j["scalars"] = sc;
    return j.dump(indent);
}

LatticeParams SuiteParams::lattice() const {
    LatticeParams lat = LatticeParams::make(eta);
    if (radius) {
        lat.radius = *radius;
        lat.validate();
    }
    return lat;
}

namespace {

using Suite = std::function<VerifyReport(const SuiteParams&)>;

// per-sample residuals by name, merged in sample order
struct Parts {
    std::map<std::string, ResidualAccumulator> acc;
    void add(const std::string& k, double r) { acc[k].add(r); }
    void merge(const Parts& o) {
        for (const auto& [k, a] : o.acc) acc[k].merge(a);
    }
    void finish(VerifyReport& r, double tol) const {
        ResidualAccumulator all;
        for (const auto& [k, a] : acc) {
            all.merge(a);
            r.scalars[k + "_max"] = a.max();
        }
        all.finish(r, tol);
    }
};

template <class Fn>
Parts over_samples(std::size_t n, const SuiteParams& p, Fn fn) {
    auto rows = parallel_map<Parts>(n, resolve_threads(p.threads), fn);
    Parts out;
    for (const auto& r : rows) out.merge(r);
    return out;
}

VerifyReport start(const std::string& name, const SuiteParams& p, std::size_t count) {
    VerifyReport r;
    r.suite = name;
    r.seed = p.seed;
    r.count = count;
    return r;
}

SampleSpec spec_of(const SuiteParams& p, std::size_t count) {
    SampleSpec s;
    s.seed = p.seed;
    s.count = count;
    s.validate();
    return s;
}

double jacobi_rel(Complex a, Complex b, Complex c) {
    return std::abs(a + b + c) / std::max({std::abs(a), std::abs(b), std::abs(c), 1.0});
}

// --- suites -------------------------------------------------------------------

VerifyReport theta_identities(const SuiteParams& p) {
    const std::size_t count = p.count.value_or(100);
    const auto lat = p.lattice();
    Sampler smp(spec_of(p, count), lat.eta);
    const auto pts = smp.tuples(1);
    auto parts = over_samples(count, p, [&](std::size_t i) {
        Parts r;
        const Complex z = pts[i][0], t = theta_eval(z, lat);
        r.add("periodicity", mixed_residual(theta_eval(z + 1.0, lat), t));
        r.add("quasi_periodicity", mixed_residual(theta_eval(z + lat.eta, lat), -std::exp(-two_pi_i * z) * t));
        r.add("reflection", mixed_residual(theta_eval(-z, lat), -std::exp(-two_pi_i * z) * t));
        return r;
    });
    parts.add("theta_zero", std::abs(theta_eval(0.0, lat)));
    auto rep = start("theta-identities", p, count);
    parts.finish(rep, p.tol.value_or(1e-10));
    rep.scalars["eta"] = lat.eta;
    rep.scalars["radius"] = (long long)lat.radius;
    return rep;
}

VerifyReport dimension_rank(const SuiteParams& p) {
    std::vector<Seq> seqs = p.seqs;
    if (seqs.empty()) seqs = {{2}, {3}, {2, 2}, {3, 2}, {2, 2, 2}};
    const auto lat = p.lattice();
    auto rep = start("dimension-rank", p, seqs.size());
    ResidualAccumulator acc;
    for (const auto& n : seqs) {
        auto b = multi_theta_basis(n, lat);
        SampleSpec s = spec_of(p, 1);
        Sampler smp(s, lat.eta);
        std::vector<std::vector<Complex>> pts;
        for (std::size_t i = 0; i < 3 * b.size() + 6; ++i) pts.push_back(smp.tuple(n.size()));
        const int rank = gram_rank(b, pts);
        rep.scalars["rank " + to_string(n)] = (long long)rank;
        rep.scalars["d " + to_string(n)] = d(n);
        acc.add(std::abs(double(rank - d(n))));
    }
    acc.finish(rep, p.tol.value_or(0.0));
    return rep;
}

VerifyReport poisson_axioms(const SuiteParams& p) {
    const Seq n = p.seqs.empty() ? Seq{3, 2} : p.seqs.front();
    const std::size_t count = p.count.value_or(10);
    const auto lat = p.lattice();
    std::vector<SymElement> b;
    for (auto& f : multi_theta_basis(n, lat)) b.push_back(SymElement::lift(f));
    const auto f = b[0], g = b[1 % b.size()], h = b.back();
    const std::size_t q = n.size();
    Sampler smp(spec_of(p, count), lat.eta);
    const auto pts2 = smp.tuples(2 * q, block_loci(q, 2));
    const auto pts3 = smp.tuples(3 * q, block_loci(q, 3));
    const auto fg = bracketN(f, g), gf = bracketN(g, f);
    const auto lhs = bracketN(f, sym_product(g, h));
    const auto r1 = sym_product(bracketN(f, g), h), r2 = sym_product(g, bracketN(f, h));
    const auto j1 = bracketN(f, bracketN(g, h)), j2 = bracketN(g, bracketN(h, f)), j3 = bracketN(h, bracketN(f, g));
    auto parts = over_samples(count, p, [&](std::size_t i) {
        Parts r;
        r.add("antisymmetry", mixed_residual(fg(pts2[i]), -gf(pts2[i])));
        const auto& z = pts3[i];
        r.add("leibniz", mixed_residual(lhs(z), r1(z) + r2(z)));
        r.add("jacobi", jacobi_rel(j1(z), j2(z), j3(z)));
        return r;
    });
    auto mem = membership_check(fg, spec_of(p, std::min<std::size_t>(count, 6)), std::nullopt, 1e-8);
    parts.add("membership", mem.max_residual);
    auto rep = start("poisson-axioms", p, count);
    parts.finish(rep, p.tol.value_or(1e-7));
    rep.scalars["n_vec"] = to_string(n);
    return rep;
}

VerifyReport star_associativity(const SuiteParams& p) {
    const int n = p.n.value_or(2);
    const std::size_t count = p.count.value_or(20);
    const auto lat = p.lattice();
    const Complex tau = p.tau;
    std::vector<SymElement> b, b0;
    for (auto& f : theta_basis(n, -double(n) * tau, lat)) b.push_back(SymElement::lift(f));
    for (auto& f : theta_basis(n, 0.0, lat)) b0.push_back(SymElement::lift(f));
    const auto f = b[0], g = b[1 % b.size()], h = b.back();
    const auto l = star_product(star_product(f, g, tau), h, tau);
    const auto r = star_product(f, star_product(g, h, tau), tau);
    const auto s0 = star_product(b0[0], b0.back(), 0.0), sp = sym_product(b0[0], b0.back());
    Sampler smp(spec_of(p, count), lat.eta);
    const auto pts2 = smp.tuples(2, block_loci(1, 2));
    const auto pts3 = smp.tuples(3, block_loci(1, 3));
    auto parts = over_samples(count, p, [&](std::size_t i) {
        Parts out;
        out.add("tau_zero", mixed_residual(s0(pts2[i]), sp(pts2[i])));
        const Complex a = l(pts3[i]), c = r(pts3[i]);
        out.add("associativity", std::abs(a - c) / std::max({std::abs(a), std::abs(c), 1.0}));
        return out;
    });
    auto mem = membership_check(star_product(f, g, tau), spec_of(p, std::min<std::size_t>(count, 10)), std::nullopt,
                                1e-8);
    parts.add("closure", mem.max_residual);
    auto rep = start("star-associativity", p, count);
    parts.finish(rep, p.tol.value_or(1e-8));
    rep.scalars["n"] = (long long)n;
    rep.scalars["tau"] = tau;
    return rep;
}

VerifyReport semiclassical(const SuiteParams& p) {
    const int n = p.n.value_or(3);
    const std::size_t count = p.count.value_or(50);
    const auto lat = p.lattice();
    std::vector<SymElement> b;
    for (auto& f : theta_basis(n, 0.0, lat)) b.push_back(SymElement::lift(f));
    const auto lim = commutator_limit(b[0], b[1 % b.size()]);
    const auto br = bracketN(b[0], b[1 % b.size()]);
    Sampler smp(spec_of(p, count), lat.eta);
    const auto pts = smp.tuples(2, block_loci(1, 2));
    auto u = parallel_map<Complex>(count, resolve_threads(p.threads), [&](std::size_t i) { return br(pts[i]); });
    auto v = parallel_map<Complex>(count, resolve_threads(p.threads), [&](std::size_t i) { return lim(pts[i]); });
    const auto fit = fit_scalar(u, v);
    auto rep = start("semiclassical", p, count);
    ResidualAccumulator acc;
    acc.add(fit.residual);
    acc.finish(rep, p.tol.value_or(1e-5));
    rep.mean_residual = fit.residual;
    rep.scalars["n"] = (long long)n;
    if (fit.degenerate) rep.scalars["scalar"] = std::string("undetermined: both sides vanish");
    else rep.scalars["scalar"] = fit.lambda;
    return rep;
}

VerifyReport boson_consistency(const SuiteParams& p) {
    const std::string fam = p.family.empty() ? "intro-3" : p.family;
    const std::size_t count = p.count.value_or(200);
    const auto lat = p.lattice();
    const BosonAlgebra alg(boson_family(fam, p.tau, lat, p.zcoupling));
    const BosonAlgebra flat(boson_family(fam, 0.0, lat, p.zcoupling));
    const auto gens = alg.generators();

    SampleSpec s = spec_of(p, count);
    Sampler smp(s, lat.eta);
    std::vector<std::vector<Complex>> pts;
    std::vector<NCWord> words;
    for (std::size_t i = 0; i < count; ++i) {
        pts.push_back(alg.point(smp));
        words.push_back(random_word(alg, 2 + smp.index(3), smp.engine()));
    }
    auto parts = over_samples(count, p, [&](std::size_t i) {
        Parts r;
        r.add("confluence", confluence_residual(alg, words[i], pts[i]));
        return r;
    });
    // every ordered pair of distinct generators, and its reduction at tau = 0
    const auto y = pts.front();
    auto pair_rows = over_samples(gens.size(), p, [&](std::size_t i) {
        Parts r;
        for (std::size_t j = 0; j < gens.size(); ++j) {
            if (i == j) continue;
            r.add("double_exchange", double_exchange_residual(alg, gens[i], gens[j], y));
            const auto& A = gens[i];
            const auto& B = gens[j];
            NCWord main{B, A};
            if (A.factor == B.factor) {
                const auto [s0, s1] = segments(A.sites, B.sites).front();
                BosonGenerator a2 = A, b2 = B;
                for (std::size_t k = s0; k <= s1; ++k) std::swap(a2.sites[k], b2.sites[k]);
                main = {a2, b2};
            }
            for (const auto& [w, c] : flat.evaluate(flat.exchange(A, B), y))
                r.add("tau_zero_relations", w == main ? mixed_residual(c, 1.0) : std::abs(c));
        }
        return r;
    });
    parts.merge(pair_rows);

    // commuting values e_a = prod E(mu, a_mu, a_mu+1) solve the tau = 0 relations
    std::map<std::tuple<int, int, int, int>, Complex> E;
    auto value = [&](const BosonGenerator& g) {
        Complex v = 1;
        for (std::size_t mu = 0; mu + 1 < g.sites.size(); ++mu) {
            const auto key = std::make_tuple(g.factor, int(mu), g.sites[mu], g.sites[mu + 1]);
            if (!E.count(key)) E[key] = Complex(0.5 + smp.uniform(), 0.5 + smp.uniform());
            v *= E[key];
        }
        if (g.sites.size() == 1) {
            const auto key = std::make_tuple(g.factor, 0, g.sites[0], -1);
            if (!E.count(key)) E[key] = Complex(0.5 + smp.uniform(), 0.5 + smp.uniform());
            v *= E[key];
        }
        return v;
    };
    for (std::size_t i = 0; i < std::min<std::size_t>(count, 50); ++i) {
        Complex direct = 1, reordered = 0;
        for (const auto& g : words[i]) direct *= value(g);
        for (const auto& [w, c] : flat.evaluate(flat.normal_order({{Coefficient(1.0), words[i]}}), pts[i])) {
            Complex v = c;
            for (const auto& g : w) v *= value(g);
            reordered += v;
        }
        parts.add("rational_parametrization", mixed_residual(direct, reordered));
    }
    auto rep = start("boson-consistency", p, count);
    parts.finish(rep, p.tol.value_or(1e-9));
    rep.scalars["family"] = fam;
    rep.scalars["generators"] = (long long)gens.size();
    return rep;
}

VerifyReport tensor_axioms(const SuiteParams& p) {
    std::vector<Seq> seqs = p.seqs;
    if (seqs.empty()) seqs = {{2}, {3, 2}};
    const std::size_t count = p.count.value_or(4);
    const auto lat = p.lattice();
    const std::size_t h = seqs.size();
    GeneratorBracketTable tab(seqs, p.zcoupling);
    auto element = [&](std::size_t t, std::size_t k) {
        auto b = multi_theta_basis(seqs[t], lat);
        return TensorElement::from_theta(b[k % b.size()], seqs, t);
    };
    const auto F = element(0, 0), G = element(std::min<std::size_t>(1, h - 1), 1), H = element(h - 1, 2);
    const auto FG = tensor_bracket(F, G, tab), GF = tensor_bracket(G, F, tab);
    const auto j1 = tensor_bracket(F, tensor_bracket(G, H, tab), tab);
    const auto j2 = tensor_bracket(G, tensor_bracket(H, F, tab), tab);
    const auto j3 = tensor_bracket(H, FG, tab);

    SampleSpec s = spec_of(p, count);
    Sampler smp(s, lat.eta);
    std::vector<std::vector<Complex>> p2, p3;
    for (std::size_t i = 0; i < count; ++i) {
        p2.push_back(tensor_point(smp, FG.shape()));
        p3.push_back(tensor_point(smp, j1.shape()));
    }
    auto parts = over_samples(count, p, [&](std::size_t i) {
        Parts r;
        r.add("antisymmetry", mixed_residual(FG(p2[i]), -GF(p2[i])));
        r.add("jacobi", jacobi_rel(j1(p3[i]), j2(p3[i]), j3(p3[i])));
        return r;
    });
    parts.add("membership", tensor_membership_check(FG, spec_of(p, count), 1e-8).max_residual);
    if (h >= 2) {
        const auto z = TensorElement::coupling(seqs, 0, lat);
        const auto fz = tensor_bracket(F, z, tab);
        const Rational c = tab.with_coupling(0, 0);
        const double cd = double(c.numerator()) / double(c.denominator());
        for (const auto& w : p2) {
            std::vector<Complex> a(w.begin(), w.begin() + long(seqs[0].size()));
            a.insert(a.end(), w.end() - long(h - 1), w.end());
            parts.add("coupling", mixed_residual(fz(a), cd * F(a)));
        }
        const auto prod = tensor_product(FG, H);
        auto c3 = condition3_check(prod, spec_of(p, count));
        auto c4 = condition4_check(prod, spec_of(p, count));
        auto rep = start("tensor-axioms", p, count);
        parts.finish(rep, p.tol.value_or(1e-7));
        rep.scalars["condition3_pass"] = std::string(c3.pass ? "true" : "false");
        rep.scalars["condition3_max"] = c3.max_residual;
        rep.scalars["condition4_pass"] = std::string(c4.pass ? "true" : "false");
        rep.scalars["condition4_max"] = c4.max_residual;
        rep.scalars["coupling_constant"] = std::to_string(c.numerator()) + "/" + std::to_string(c.denominator());
        if (!c3.pass || !c4.pass) rep.pass = false;
        rep.scalars["seqs"] = [&] {
            std::string out;
            for (const auto& q : seqs) out += to_string(q);
            return out;
        }();
        return rep;
    }
    auto rep = start("tensor-axioms", p, count);
    parts.finish(rep, p.tol.value_or(1e-7));
    return rep;
}

BigInt three_factor(long long A, long long B, long long C, int a, int b) {
    BigInt s = 0;
    for (int k = 0; k <= std::min(a, b); ++k)
        s += binomial(A + (a - k) - 1, a - k) * binomial(B + (b - k) - 1, b - k) * binomial(C + k - 1, k);
    return s;
}

VerifyReport hilbert_crosscheck(const SuiteParams& p) {
    const int cutoff = 6;
    std::vector<Seq> seqs = p.seqs;
    if (seqs.empty()) seqs = {{2}, {3, 2}, {2, 2}, {4}};
    std::size_t checked = 0, wrong = 0;
    for (const auto& N : seqs) {
        auto s = hilbert_tensor({N}, cutoff);
        for (int j = 0; j <= cutoff; ++j, ++checked)
            if (s.coefficient({j}) != dim_F(d(N), j)) ++wrong;
        for (const auto& M : seqs) {
            auto t = hilbert_tensor({N, M}, cutoff);
            const long long A = d(N), B = d(M), C = d(delta(N, M));
            for (int a = 0; a <= cutoff; ++a)
                for (int b = 0; b <= cutoff; ++b, ++checked)
                    if (t.coefficient({a, b}) != three_factor(A, B, C, a, b)) ++wrong;
        }
    }
    auto rep = start("hilbert-crosscheck", p, checked);
    ResidualAccumulator acc;
    acc.add(double(wrong));
    acc.finish(rep, p.tol.value_or(0.0));
    rep.scalars["coefficients_checked"] = (long long)checked;
    rep.scalars["mismatches"] = (long long)wrong;
    rep.scalars["(2)x(2) at (1,1)"] = (long long)hilbert_tensor({{2}, {2}}, 2).coefficient({1, 1}).convert_to<long long>();
    return rep;
}

VerifyReport homomorphism(const SuiteParams& p) {
    const int n = p.n.value_or(3);
    const std::size_t count = p.count.value_or(5);
    const auto lat = p.lattice();
    BosonAlgebra alg(boson_family("intro-" + std::to_string(n), p.tau, lat));
    auto b = theta_basis(n, -double(n) * p.tau, lat);
    const auto f = SymElement::lift(b[0]), g = SymElement::lift(b.back());
    Sampler smp(spec_of(p, count), lat.eta);
    std::vector<std::vector<Complex>> pts;
    for (std::size_t i = 0; i < count; ++i) pts.push_back(alg.point(smp));
    double literal = 0;
    auto parts = over_samples(count, p, [&](std::size_t i) {
        Parts r;
        auto h = homomorphism_residual(alg, f, g, pts[i]);
        r.add("derived_rule", h.derived_max);
        r.add("literal", h.literal_max);
        return r;
    });
    literal = parts.acc["literal"].max();
    parts.acc.erase("literal");
    auto rep = start("homomorphism", p, count);
    parts.finish(rep, p.tol.value_or(1e-8));
    rep.scalars["literal_rule_max"] = literal;
    rep.scalars["n"] = (long long)n;
    return rep;
}

VerifyReport shift_coherence(const SuiteParams& p) {
    const std::string fam = p.family.empty() ? "tensor-2" : p.family;
    const auto lat = p.lattice();
    SiteConfig cfg = boson_family(fam, p.tau, lat, p.zcoupling);
    const auto c = semiclassical_shift_check(cfg);
    auto rep = start("shift-coherence", p, c.compared);
    ResidualAccumulator acc;
    acc.add(double(c.mismatches));
    acc.finish(rep, p.tol.value_or(0.0));
    rep.scalars["compared"] = (long long)c.compared;
    rep.scalars["mismatches"] = (long long)c.mismatches;
    rep.scalars["own_site_excluded"] = (long long)c.own_site_excluded;
    rep.scalars["own_site_offset"] =
        std::to_string(c.own_site_offset.numerator()) + "/" + std::to_string(c.own_site_offset.denominator());
    rep.scalars["family"] = fam;
    return rep;
}

const std::vector<std::pair<std::string, Suite>>& registry() {
    static const std::vector<std::pair<std::string, Suite>> r{
        {"theta-identities", theta_identities},
        {"dimension-rank", dimension_rank},
        {"poisson-axioms", poisson_axioms},
        {"star-associativity", star_associativity},
        {"semiclassical", semiclassical},
        {"boson-consistency", boson_consistency},
        {"tensor-axioms", tensor_axioms},
        {"hilbert-crosscheck", hilbert_crosscheck},
        {"homomorphism", homomorphism},
        {"shift-coherence", shift_coherence},
    };
    return r;
}

} // namespace

std::vector<std::string> suite_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : registry()) out.push_back(k);
    return out;
}

VerifyReport run_suite(const std::string& name, const SuiteParams& params) {
    for (const auto& [k, fn] : registry())
        if (k == name) return fn(params);
    throw UnknownSuiteError("unknown suite: " + name);
}

std::vector<std::string> boson_family_names() {
    return {"intro-2", "intro-3", "single-3-2", "single-2-2-2", "tensor-2", "tensor-3"};
}

SiteConfig boson_family(const std::string& name, Complex tau, const LatticeParams& lat, ZCoupling z) {
    SiteConfig c;
    c.tau = tau;
    c.lat = lat;
    c.zcoupling = z;
    c.convention = ShiftConvention::absolute;
    if (name == "intro-2") c.factors = {{{2}, {3}}};
    else if (name == "intro-3") c.factors = {{{3}, {3}}};
    else if (name == "single-3-2") c.factors = {{{3, 2}, {3, 3}}};
    else if (name == "single-2-2-2") c.factors = {{{2, 2, 2}, {2, 2, 2}}};
    else {
        c.convention = ShiftConvention::ratio;
        if (name == "tensor-2") c.factors = {{{3, 2}, {2, 2}}, {{2}, {3}}};
        else if (name == "tensor-3") c.factors = {{{2}, {2}}, {{3}, {2}}, {{2}, {2}}};
        else throw DomainError("unknown relation family: " + name);
    }
    return c;
}

} // namespace ellipq
