#pragma once

#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "ellipq/core.hpp"

namespace ellipq {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::rational<long long>;

struct Frac {
    long long n = 1;
    long long k = 1;
};

// continuant: determinant of the tridiagonal matrix (diagonal entries, -1 off it)
long long d(const Seq& seq);
// d of the sub-range [first, last)
long long d(const Seq& seq, std::size_t first, std::size_t last);

Seq cont_frac(Frac f);
Seq delta(const Seq& a, const Seq& b);
BigInt dim_F(long long n, long long alpha);
BigInt binomial(long long n, long long k);

class MultiSeries {
public:
    MultiSeries(std::size_t variables, int cutoff);

    std::size_t variables() const { return h_; }
    int cutoff() const { return cutoff_; }
    const std::map<std::vector<int>, BigInt>& coefficients() const { return coeff_; }
    BigInt coefficient(const std::vector<int>& exponent) const;

    // *this += c * t^e, ignoring exponents beyond the cutoff
    void add(const std::vector<int>& e, const BigInt& c);
    MultiSeries operator*(const MultiSeries& other) const;

private:
    std::size_t h_;
    int cutoff_;
    std::map<std::vector<int>, BigInt> coeff_;
};

struct HilbertFactor {
    int first = 0; // lambda, 0-based
    int last = 0;  // nu, 0-based, inclusive
    Seq merged;    // N_lambda Delta ... Delta N_nu
    long long exponent = 0;
};

std::vector<HilbertFactor> hilbert_factors(const std::vector<Seq>& seqs);
MultiSeries hilbert_tensor(const std::vector<Seq>& seqs, int cutoff);

std::string to_string(const Seq& s);

} // namespace ellipq
