#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <variant>

#include "ellipq/core.hpp"

namespace ellipq {

using Scalar = std::variant<double, Complex, long long, std::string>;

struct VerifyReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::size_t count = 0;
    double tol = 0;
    double max_residual = 0;
    double mean_residual = 0;
    bool pass = false;
    std::map<std::string, Scalar> scalars;

    std::string to_json(int indent = 2) const;
};

class ResidualAccumulator {
public:
    void add(double r) {
        // NaN must never look like a pass
        if (r != r) r = std::numeric_limits<double>::infinity();
        max_ = std::max(max_, r);
        sum_ += r;
        ++n_;
    }
    void add(Complex lhs, Complex rhs) { add(mixed_residual(lhs, rhs)); }
    void merge(const ResidualAccumulator& o) {
        max_ = std::max(max_, o.max_);
        sum_ += o.sum_;
        n_ += o.n_;
    }
    double max() const { return max_; }
    double mean() const { return n_ ? sum_ / double(n_) : 0.0; }
    std::size_t size() const { return n_; }

    // fills the residual fields; pass <=> max <= tol
    void finish(VerifyReport& r, double tol) const {
        r.tol = tol;
        r.max_residual = max_;
        r.mean_residual = mean();
        r.pass = n_ > 0 && max_ <= tol;
    }

private:
    double max_ = 0;
    double sum_ = 0;
    std::size_t n_ = 0;
};

} // namespace ellipq
