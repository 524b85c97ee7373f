#include "ellipq/sampling.hpp"

#include "ellipq/theta.hpp"

namespace ellipq {

std::vector<PoleLocus> pairwise_loci(const std::vector<std::size_t>& idx) {
    std::vector<PoleLocus> out;
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = i + 1; j < idx.size(); ++j)
            out.push_back({{{idx[i], 1}, {idx[j], -1}}, {}});
    return out;
}

Sampler::Sampler(const SampleSpec& spec, Complex eta) : spec_(spec), eta_(eta), rng_(spec.seed) {
    spec_.validate();
    if (!(eta.imag() > 0)) throw DomainError("Im(eta) must be positive");
}

Complex Sampler::point() {
    std::uniform_real_distribution<double> ua(spec_.a_lo, spec_.a_hi), ub(spec_.b_lo, spec_.b_hi);
    const double a = ua(rng_);
    const double b = ub(rng_);
    return a + b * eta_;
}

std::vector<Complex> Sampler::tuple(std::size_t n, const std::vector<PoleLocus>& loci) {
    std::vector<Complex> v(n);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        for (auto& x : v) x = point();
        bool ok = true;
        for (const auto& l : loci) {
            Complex w = l.offset;
            for (auto [i, c] : l.terms) w += double(c) * v.at(i);
            if (lattice_distance(w, eta_) < spec_.guard) {
                ok = false;
                break;
            }
        }
        if (ok) return v;
    }
    throw DomainError("sampler: could not avoid the declared pole loci");
}

std::vector<std::vector<Complex>> Sampler::tuples(std::size_t n, const std::vector<PoleLocus>& loci) {
    std::vector<std::vector<Complex>> out;
    out.reserve(spec_.count);
    for (std::size_t i = 0; i < spec_.count; ++i) out.push_back(tuple(n, loci));
    return out;
}

} // namespace ellipq
