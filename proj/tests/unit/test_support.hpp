#pragma once

#include <vector>

#include "numerics.hpp"

namespace selprop::testing {

inline Vector random_vector(std::size_t n, SeededRng& rng, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

inline void randomize(Tensor& t, SeededRng& rng, double lo = -1.0, double hi = 1.0) {
    for (auto& x : t.values()) x = rng.uniform(lo, hi);
}

inline std::vector<Vector> random_rows(std::size_t n, std::size_t d, SeededRng& rng, double lo = -1.0,
                                       double hi = 1.0) {
    std::vector<Vector> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(random_vector(d, rng, lo, hi));
    return rows;
}

inline void zero_all_grads(std::vector<Parameter*> ps) {
    for (auto* p : ps) p->zero_grad();
}

}  // namespace selprop::testing
