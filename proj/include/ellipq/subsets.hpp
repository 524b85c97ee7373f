#pragma once

#include <vector>

namespace ellipq {

// fn(chosen, rest) for every k-subset of {0..n-1}; both lists ascending
template <class Fn>
void for_each_subset(int n, int k, Fn&& fn) {
    if (k < 0 || k > n) return;
    std::vector<int> pick(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) pick[std::size_t(i)] = i;
    std::vector<int> rest;
    while (true) {
        rest.clear();
        for (int i = 0, j = 0; i < n; ++i) {
            if (j < k && pick[std::size_t(j)] == i) ++j;
            else rest.push_back(i);
        }
        fn(static_cast<const std::vector<int>&>(pick), static_cast<const std::vector<int>&>(rest));
        int i = k - 1;
        while (i >= 0 && pick[std::size_t(i)] == n - k + i) --i;
        if (i < 0) return;
        ++pick[std::size_t(i)];
        for (int j = i + 1; j < k; ++j) pick[std::size_t(j)] = pick[std::size_t(j - 1)] + 1;
    }
}

inline long long factorial(int n) {
    long long r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

} // namespace ellipq
