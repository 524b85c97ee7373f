#include "ellipq/seqcomb.hpp"

#include <numeric>
#include <sstream>

namespace ellipq {

long long d(const Seq& seq, std::size_t first, std::size_t last) {
    long long cur = 1, prev = 0;
    for (std::size_t i = first; i < last; ++i) {
        long long next = seq[i] * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

long long d(const Seq& seq) { return d(seq, 0, seq.size()); }

Seq cont_frac(Frac f) {
    if (f.k < 1 || f.k >= f.n) throw DomainError("cont_frac: need 1 <= k < n");
    if (std::gcd(f.n, f.k) != 1) throw DomainError("cont_frac: n and k must be coprime");
    Seq out;
    long long n = f.n, k = f.k;
    while (k > 0) {
        const long long a = (n + k - 1) / k;
        out.push_back(int(a));
        const long long rest = a * k - n;
        n = k;
        k = rest;
    }
    return out;
}

Seq delta(const Seq& a, const Seq& b) {
    if (a.empty() || b.empty()) throw DomainError("delta: empty sequence");
    Seq out(a.begin(), a.end() - 1);
    out.push_back(a.back() + b.front());
    out.insert(out.end(), b.begin() + 1, b.end());
    return out;
}

BigInt binomial(long long n, long long k) {
    if (k < 0 || n < 0 || k > n) return 0;
    BigInt r = 1;
    for (long long i = 1; i <= k; ++i) {
        r *= (n - k + i);
        r /= i;
    }
    return r;
}

BigInt dim_F(long long n, long long alpha) {
    if (n < 1 || alpha < 0) throw DomainError("dim_F: need n >= 1, alpha >= 0");
    return binomial(n + alpha - 1, alpha);
}

MultiSeries::MultiSeries(std::size_t variables, int cutoff) : h_(variables), cutoff_(cutoff) {
    if (cutoff < 0) throw DomainError("negative cutoff");
}

BigInt MultiSeries::coefficient(const std::vector<int>& e) const {
    auto it = coeff_.find(e);
    return it == coeff_.end() ? BigInt(0) : it->second;
}

void MultiSeries::add(const std::vector<int>& e, const BigInt& c) {
    if (e.size() != h_) throw DomainError("exponent arity mismatch");
    for (int v : e)
        if (v < 0 || v > cutoff_) return;
    if (c == 0) return;
    BigInt& slot = coeff_[e];
    slot += c;
    if (slot == 0) coeff_.erase(e);
}

MultiSeries MultiSeries::operator*(const MultiSeries& o) const {
    if (o.h_ != h_) throw DomainError("series in different variables");
    MultiSeries r(h_, std::min(cutoff_, o.cutoff_));
    std::vector<int> e(h_);
    for (const auto& [ea, ca] : coeff_)
        for (const auto& [eb, cb] : o.coeff_) {
            bool inside = true;
            for (std::size_t i = 0; i < h_; ++i) {
                e[i] = ea[i] + eb[i];
                if (e[i] > r.cutoff_) inside = false;
            }
            if (inside) r.add(e, ca * cb);
        }
    return r;
}

std::vector<HilbertFactor> hilbert_factors(const std::vector<Seq>& seqs) {
    std::vector<HilbertFactor> out;
    for (std::size_t l = 0; l < seqs.size(); ++l) {
        Seq merged = seqs[l];
        for (std::size_t v = l; v < seqs.size(); ++v) {
            if (v > l) merged = delta(merged, seqs[v]);
            out.push_back({int(l), int(v), merged, d(merged)});
        }
    }
    return out;
}

MultiSeries hilbert_tensor(const std::vector<Seq>& seqs, int cutoff) {
    if (seqs.empty()) throw DomainError("hilbert_tensor: no sequences");
    if (cutoff < 1) throw DomainError("hilbert_tensor: cutoff must be positive");
    for (const auto& s : seqs) {
        if (s.empty()) throw DomainError("hilbert_tensor: empty sequence");
        for (int n : s)
            if (n < 2) throw DomainError("hilbert_tensor: entries must be >= 2");
    }
    const std::size_t h = seqs.size();
    MultiSeries acc(h, cutoff);
    acc.add(std::vector<int>(h, 0), 1);
    for (const auto& f : hilbert_factors(seqs)) {
        // (1 - t_l ... t_v)^{-D} = sum_j C(D+j-1, j) (t_l ... t_v)^j
        MultiSeries term(h, cutoff);
        for (int j = 0; j <= cutoff; ++j) {
            std::vector<int> e(h, 0);
            for (int i = f.first; i <= f.last; ++i) e[std::size_t(i)] = j;
            term.add(e, binomial(f.exponent + j - 1, j));
        }
        acc = acc * term;
    }
    return acc;
}

std::string to_string(const Seq& s) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ')';
    return os.str();
}

} // namespace ellipq
