#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "onm/linalg.hpp"
#include "onm/oracles.hpp"
#include "onm/rng.hpp"

namespace test_support {

inline onm::linalg::SymMatrix make_sym(std::size_t n, const std::vector<double>& rows) {
  onm::linalg::SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) m.set(i, j, rows[i * n + j]);
  }
  return m;
}

// Random orthonormal basis: Gaussian matrix, columns orthonormalized by
// modified Gram-Schmidt with one re-orthogonalization pass.
inline std::vector<double> random_orthonormal(onm::rng::Stream& stream, std::size_t n) {
  std::vector<double> q(n * n);
  for (auto& x : q) x = stream.next_gaussian();
  for (std::size_t c = 0; c < n; ++c) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t prev = 0; prev < c; ++prev) {
        double proj = 0.0;
        for (std::size_t r = 0; r < n; ++r) proj += q[r * n + c] * q[r * n + prev];
        for (std::size_t r = 0; r < n; ++r) q[r * n + c] -= proj * q[r * n + prev];
      }
    }
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += q[r * n + c] * q[r * n + c];
    s = std::sqrt(s);
    for (std::size_t r = 0; r < n; ++r) q[r * n + c] /= s;
  }
  return q;
}

// Symmetric matrix Q diag(spectrum) Q^T with a fresh random Q.
inline onm::linalg::SymMatrix matrix_with_spectrum(onm::rng::Stream& stream,
                                                   const std::vector<double>& spectrum) {
  const std::size_t n = spectrum.size();
  const auto q = random_orthonormal(stream, n);
  onm::linalg::SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += q[i * n + k] * spectrum[k] * q[j * n + k];
      m.set(i, j, s);
    }
  }
  return m;
}

// Log-spaced magnitudes from 1 down to 1/cond with random signs.
inline std::vector<double> random_spectrum(onm::rng::Stream& stream, std::size_t n,
                                           double cond, bool allow_negative = true) {
  std::vector<double> spectrum(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double expo = (n == 1) ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    double mag = std::pow(cond, -expo);
    if (allow_negative && stream.next_coin()) mag = -mag;
    spectrum[i] = mag;
  }
  return spectrum;
}

inline std::pair<double, double> eig_2x2(double a, double b, double d) {
  const double mean = 0.5 * (a + d);
  const double r = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  return {mean - r, mean + r};
}

inline onm::linalg::Vector random_unit(onm::rng::Stream& stream, std::size_t n) {
  return onm::linalg::Vector(stream.next_unit_vector(n));
}

// g(y) = f(S y + shift) for symmetric nonsingular S, so gradient and Hessian
// transform by one and two factors of S.
class TransformedOracle : public onm::oracles::LossOracle {
 public:
  TransformedOracle(const onm::oracles::LossOracle& base, onm::linalg::SymMatrix s,
                    onm::linalg::Vector shift)
      : base_(base), s_(std::move(s)), shift_(std::move(shift)) {}
  std::size_t dimension() const override { return base_.dimension(); }
  int rounds() const override { return base_.rounds(); }
  double value(int t, const onm::linalg::Vector& y) const override {
    return base_.value(t, to_x(y));
  }
  onm::linalg::Vector gradient(int t, const onm::linalg::Vector& y) const override {
    return s_.matvec(base_.gradient(t, to_x(y)));
  }
  onm::linalg::SymMatrix hessian(int t, const onm::linalg::Vector& y) const override {
    const std::size_t n = dimension();
    const auto h = base_.hessian(t, to_x(y)).dense();
    const auto s = s_.dense();
    std::vector<double> hs(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += h[i * n + k] * s[k * n + j];
        hs[i * n + j] = acc;
      }
    }
    onm::linalg::SymMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        double ij = 0.0;
        double ji = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          ij += s[i * n + k] * hs[k * n + j];
          ji += s[j * n + k] * hs[k * n + i];
        }
        out.set(i, j, 0.5 * (ij + ji));
      }
    }
    return out;
  }

 private:
  onm::linalg::Vector to_x(const onm::linalg::Vector& y) const {
    return s_.matvec(y) + shift_;
  }
  const onm::oracles::LossOracle& base_;
  onm::linalg::SymMatrix s_;
  onm::linalg::Vector shift_;
};

}  // namespace test_support
