#pragma once

#include <doctest.h>

#include "ellipq/sampling.hpp"
#include "ellipq/theta.hpp"

namespace testing_support {

inline ellipq::LatticeParams lattice(ellipq::Complex eta = {0.3, 0.8}) {
    return ellipq::LatticeParams::make(eta);
}

inline std::vector<std::vector<ellipq::Complex>> points(std::size_t n, std::size_t count,
                                                        std::uint64_t seed = 7,
                                                        ellipq::Complex eta = {0.3, 0.8}) {
    ellipq::SampleSpec s;
    s.seed = seed;
    s.count = count;
    ellipq::Sampler smp(s, eta);
    return smp.tuples(n);
}

} // namespace testing_support
