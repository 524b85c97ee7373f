#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ellipq/boson.hpp"
#include "ellipq/report.hpp"

namespace ellipq {

struct UnknownSuiteError : DomainError {
    using DomainError::DomainError;
};

struct SuiteParams {
    std::uint64_t seed = 1;
    std::optional<std::size_t> count; // per-suite default when unset
    std::optional<double> tol;        // per-suite default when unset
    Complex eta{0.3, 0.8};
    std::optional<int> radius;
    Complex tau{0.031, 0.017};
    std::vector<Seq> seqs; // n_vec list, or the factors of a tensor product
    std::optional<int> n;
    std::string family; // boson relation family
    ZCoupling zcoupling = ZCoupling::printed;
    unsigned threads = 0; // 0: ELLIPQ_THREADS, then hardware

    LatticeParams lattice() const;
};

std::vector<std::string> suite_names();
// throws UnknownSuiteError for names not in suite_names()
VerifyReport run_suite(const std::string& name, const SuiteParams& params = {});

// relation families for boson-consistency: intro-2, intro-3, single-3-2,
// single-2-2-2, tensor-2, tensor-3
std::vector<std::string> boson_family_names();
SiteConfig boson_family(const std::string& name, Complex tau, const LatticeParams& lat,
                        ZCoupling z = ZCoupling::printed);

} // namespace ellipq
