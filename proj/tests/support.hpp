#pragma once

#include <cmath>
#include <random>

#include "gpd/hilbert.hpp"

namespace gpd::testing {

inline CMatrix random_matrix(std::size_t dim, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    const auto d = static_cast<Eigen::Index>(dim);
    CMatrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = Complex{g(rng), g(rng)};
    return m;
}

inline CMatrix random_hermitian(std::size_t dim, std::mt19937_64& rng, double scale = 1.0) {
    const CMatrix m = random_matrix(dim, rng, scale);
    return 0.5 * (m + m.adjoint());
}

inline CVector random_state(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CVector v(static_cast<Eigen::Index>(dim));
    for (auto& x : v) x = Complex{g(rng), g(rng)};
    return v.normalized();
}

// Taylor series with a fixed number of terms after scaling by 2^-s.
inline CMatrix series_exp(const CMatrix& m, int terms = 40) {
    int s = 0;
    double n = m.norm();
    while (n > 0.25) {
        n *= 0.5;
        ++s;
    }
    const CMatrix a = m / std::pow(2.0, s);
    CMatrix term = CMatrix::Identity(m.rows(), m.cols());
    CMatrix sum = term;
    for (int k = 1; k < terms; ++k) {
        term = term * a / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace gpd::testing
