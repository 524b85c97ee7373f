#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "ellipq/core.hpp"

namespace ellipq {

struct SampleSpec {
    std::uint64_t seed = 1;
    std::size_t count = 20;
    double guard = 0.05;
    // z = a + b*eta with a in [a_lo, a_hi), b in [b_lo, b_hi)
    double a_lo = 0, a_hi = 1, b_lo = 0, b_hi = 1;

    void validate() const {
        if (count < 1) throw DomainError("sample count must be >= 1");
        if (!(guard > 0)) throw DomainError("guard must be positive");
    }
};

// a pole locus sum_i c_i v_i in Z + eta Z, with small integer c_i
struct PoleLocus {
    std::vector<std::pair<std::size_t, int>> terms;
    Complex offset{0.0, 0.0};
};

// loci v_i - v_j for all i < j in the given index list
std::vector<PoleLocus> pairwise_loci(const std::vector<std::size_t>& idx);

class Sampler {
public:
    Sampler(const SampleSpec& spec, Complex eta);

    Complex point();
    // one tuple of n values, redrawn until every locus is guard-far from the lattice
    std::vector<Complex> tuple(std::size_t n, const std::vector<PoleLocus>& loci = {});
    std::vector<std::vector<Complex>> tuples(std::size_t n, const std::vector<PoleLocus>& loci = {});
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    std::mt19937_64& engine() { return rng_; }

private:
    SampleSpec spec_;
    Complex eta_;
    std::mt19937_64 rng_;
};

} // namespace ellipq
