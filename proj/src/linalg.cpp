#include "onm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace onm::linalg {

namespace {

double neumaier_add(double& sum, double term, double comp) {
  const double t = sum + term;
  if (std::abs(sum) >= std::abs(term)) {
    comp += (sum - t) + term;
  } else {
    comp += (term - t) + sum;
  }
  sum = t;
  return comp;
}

}  // namespace

void Vector::require_finite() const {
  for (double x : e_) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("vector entry is not finite");
    }
  }
}

Vector operator+(const Vector& a, const Vector& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return Vector::unchecked(std::move(out));
}

Vector operator-(const Vector& a, const Vector& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return Vector::unchecked(std::move(out));
}

Vector operator*(double s, const Vector& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return Vector::unchecked(std::move(out));
}

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

double inf_norm(const Vector& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double distance(const Vector& a, const Vector& b) { return norm(a - b); }

SymMatrix SymMatrix::identity(std::size_t n) {
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
  SymMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d[i]);
  return m;
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("matrix entry is not finite");
  e_[index(i, j)] = v;
}

void SymMatrix::add(std::size_t i, std::size_t j, double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("matrix entry is not finite");
  e_[index(i, j)] += v;
}

Vector SymMatrix::matvec(const Vector& x) const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
    out[i] = s;
  }
  return Vector::unchecked(std::move(out));
}

void SymMatrix::add_outer(const Vector& u, double scale) {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) {
      e_[index(i, j)] += scale * u[i] * u[j];
    }
  }
}

void SymMatrix::add_scaled_identity(double scale) {
  for (std::size_t i = 0; i < n_; ++i) e_[index(i, i)] += scale;
}

double SymMatrix::inf_norm() const {
  double best = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n_; ++j) row += std::abs((*this)(i, j));
    best = std::max(best, row);
  }
  return best;
}

std::vector<double> SymMatrix::dense() const {
  std::vector<double> a(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) a[i * n_ + j] = (*this)(i, j);
  }
  return a;
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  SymMatrix out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i; j < a.size(); ++j) out.set(i, j, a(i, j) + b(i, j));
  }
  return out;
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  SymMatrix out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i; j < a.size(); ++j) out.set(i, j, a(i, j) - b(i, j));
  }
  return out;
}

SymMatrix operator*(double s, const SymMatrix& a) {
  SymMatrix out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i; j < a.size(); ++j) out.set(i, j, s * a(i, j));
  }
  return out;
}

std::vector<double> symmetric_eigenvalues(const SymMatrix& m) {
  const std::size_t n = m.size();
  if (n == 0) return {};
  std::vector<double> a = m.dense();
  if (n == 1) return {a[0]};

  double frob = 0.0;
  for (double x : a) frob += x * x;
  frob = std::sqrt(frob);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a[p * n + q] * a[p * n + q];
    }
    if (std::sqrt(off) <= 1e-15 * frob || off == 0.0) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r * n + p];
          const double arq = a[r * n + q];
          a[r * n + p] = a[p * n + r] = c * arp - s * arq;
          a[r * n + q] = a[q * n + r] = s * arp + c * arq;
        }
        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = a[q * n + p] = 0.0;
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
  std::sort(eig.begin(), eig.end());
  return eig;
}

double operator_norm(const SymMatrix& m) {
  const auto eig = symmetric_eigenvalues(m);
  if (eig.empty()) return 0.0;
  return std::max(std::abs(eig.front()), std::abs(eig.back()));
}

double min_singular_value(const SymMatrix& m) {
  const auto eig = symmetric_eigenvalues(m);
  double best = std::numeric_limits<double>::infinity();
  for (double l : eig) best = std::min(best, std::abs(l));
  return eig.empty() ? 0.0 : best;
}

namespace {

// LDL^T factorization with Bunch-Kaufman partial pivoting (1x1 and 2x2
// pivots), lower-triangular storage, following the classic unblocked
// algorithm.  pivot_[k] >= 0 encodes a 1x1 pivot swapped with that row;
// a 2x2 pivot spanning columns k,k+1 stores -(kp+1) in both slots.
class BunchKaufman {
 public:
  explicit BunchKaufman(const SymMatrix& m)
      : n_(m.size()), a_(m.dense()), pivot_(m.size(), 0) {
    tol_ = 1e-12 * m.inf_norm();
    factorize();
  }

  Vector solve(const Vector& b) const {
    std::vector<double> x(b.data());
    forward(x);
    backward(x);
    return Vector::unchecked(std::move(x));
  }

 private:
  double& at(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  void require_pivot(double magnitude, std::size_t k) const {
    if (!(magnitude > tol_)) {
      throw SingularMatrix("singular matrix: negligible pivot at column " + std::to_string(k), k);
    }
  }

  void factorize() {
    const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;
    std::size_t k = 0;
    while (k < n_) {
      std::size_t kstep = 1;
      std::size_t kp = k;
      const double absakk = std::abs(at(k, k));

      std::size_t imax = k;
      double colmax = 0.0;
      for (std::size_t i = k + 1; i < n_; ++i) {
        if (std::abs(at(i, k)) > colmax) {
          colmax = std::abs(at(i, k));
          imax = i;
        }
      }

      if (std::max(absakk, colmax) == 0.0) {
        require_pivot(0.0, k);
      }

      if (absakk >= alpha * colmax) {
        kp = k;
      } else {
        double rowmax = 0.0;
        for (std::size_t j = k; j < imax; ++j) rowmax = std::max(rowmax, std::abs(at(imax, j)));
        for (std::size_t i = imax + 1; i < n_; ++i) rowmax = std::max(rowmax, std::abs(at(i, imax)));
        if (absakk >= alpha * colmax * (colmax / rowmax)) {
          kp = k;
        } else if (std::abs(at(imax, imax)) >= alpha * rowmax) {
          kp = imax;
        } else {
          kp = imax;
          kstep = 2;
        }
      }

      const std::size_t kk = k + kstep - 1;
      if (kp != kk) {
        for (std::size_t i = kp + 1; i < n_; ++i) std::swap(at(i, kk), at(i, kp));
        for (std::size_t j = kk + 1; j < kp; ++j) std::swap(at(j, kk), at(kp, j));
        std::swap(at(kk, kk), at(kp, kp));
        if (kstep == 2) std::swap(at(k + 1, k), at(kp, k));
      }

      if (kstep == 1) {
        const double d = at(k, k);
        require_pivot(std::abs(d), k);
        const double r1 = 1.0 / d;
        for (std::size_t j = k + 1; j < n_; ++j) {
          const double cj = -r1 * at(j, k);
          for (std::size_t i = j; i < n_; ++i) at(i, j) += cj * at(i, k);
        }
        for (std::size_t i = k + 1; i < n_; ++i) at(i, k) *= r1;
        pivot_[k] = static_cast<long>(kp);
      } else {
        const double bkk = at(k, k);
        const double bk1k = at(k + 1, k);
        const double bk1k1 = at(k + 1, k + 1);
        require_pivot(block_min_abs_eig(bkk, bk1k, bk1k1), k);
        if (k + 2 < n_) {
          const double d21 = bk1k;
          const double d11 = bk1k1 / d21;
          const double d22 = bkk / d21;
          const double t = 1.0 / (d11 * d22 - 1.0);
          const double scale = t / d21;
          for (std::size_t j = k + 2; j < n_; ++j) {
            const double wk = scale * (d11 * at(j, k) - at(j, k + 1));
            const double wk1 = scale * (d22 * at(j, k + 1) - at(j, k));
            for (std::size_t i = j; i < n_; ++i) {
              at(i, j) -= at(i, k) * wk + at(i, k + 1) * wk1;
            }
            at(j, k) = wk;
            at(j, k + 1) = wk1;
          }
        }
        pivot_[k] = -static_cast<long>(kp) - 1;
        pivot_[k + 1] = -static_cast<long>(kp) - 1;
      }

      k += kstep;
    }
  }

  static double block_min_abs_eig(double a, double b, double d) {
    const double mean = 0.5 * (a + d);
    const double r = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
    return std::min(std::abs(mean - r), std::abs(mean + r));
  }

  // Apply inv(L * D) with interleaved row interchanges.
  void forward(std::vector<double>& b) const {
    std::size_t k = 0;
    while (k < n_) {
      if (pivot_[k] >= 0) {
        const auto kp = static_cast<std::size_t>(pivot_[k]);
        if (kp != k) std::swap(b[k], b[kp]);
        for (std::size_t i = k + 1; i < n_; ++i) b[i] -= at(i, k) * b[k];
        b[k] /= at(k, k);
        k += 1;
      } else {
        const auto kp = static_cast<std::size_t>(-pivot_[k] - 1);
        if (kp != k + 1) std::swap(b[k + 1], b[kp]);
        for (std::size_t i = k + 2; i < n_; ++i) {
          b[i] -= at(i, k) * b[k] + at(i, k + 1) * b[k + 1];
        }
        const double d21 = at(k + 1, k);
        const double d11 = at(k, k) / d21;
        const double d22 = at(k + 1, k + 1) / d21;
        const double denom = d11 * d22 - 1.0;
        const double bk = b[k] / d21;
        const double bk1 = b[k + 1] / d21;
        b[k] = (d22 * bk - bk1) / denom;
        b[k + 1] = (d11 * bk1 - bk) / denom;
        k += 2;
      }
    }
  }

  // Apply inv(L^T) with the interchanges undone in reverse order.
  void backward(std::vector<double>& b) const {
    std::size_t k = n_;
    while (k > 0) {
      const std::size_t kc = k - 1;
      if (pivot_[kc] >= 0) {
        double s = 0.0;
        for (std::size_t i = k; i < n_; ++i) s += at(i, kc) * b[i];
        b[kc] -= s;
        const auto kp = static_cast<std::size_t>(pivot_[kc]);
        if (kp != kc) std::swap(b[kc], b[kp]);
        k -= 1;
      } else {
        double s0 = 0.0;
        double s1 = 0.0;
        for (std::size_t i = k; i < n_; ++i) {
          s0 += at(i, kc - 1) * b[i];
          s1 += at(i, kc) * b[i];
        }
        b[kc - 1] -= s0;
        b[kc] -= s1;
        const auto kp = static_cast<std::size_t>(-pivot_[kc] - 1);
        if (kp != kc) std::swap(b[kc], b[kp]);
        k -= 2;
      }
    }
  }

  std::size_t n_;
  std::vector<double> a_;
  std::vector<long> pivot_;
  double tol_ = 0.0;
};

}  // namespace

Vector compensated_residual(const SymMatrix& m, const Vector& y, const Vector& b) {
  const std::size_t n = m.size();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = -b[i];
    double comp = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double mij = m(i, j);
      const double p = mij * y[j];
      const double perr = std::fma(mij, y[j], -p);
      comp = neumaier_add(sum, p, comp);
      comp += perr;
    }
    r[i] = -(sum + comp);
  }
  return Vector::unchecked(std::move(r));
}

Vector solve_symmetric(const SymMatrix& m, const Vector& b) {
  if (m.size() != b.size()) throw std::invalid_argument("dimension mismatch in solve");
  const BunchKaufman factor(m);
  Vector y = factor.solve(b);
  double best = norm(compensated_residual(m, y, b));
  Vector best_y = y;
  const double target = 1e-13 * std::max(1.0, norm(b));
  for (int iter = 0; iter < 3 && best > target; ++iter) {
    const Vector r = compensated_residual(m, y, b);
    y = y + factor.solve(r);
    const double res = norm(compensated_residual(m, y, b));
    if (res < best) {
      best = res;
      best_y = y;
    } else {
      break;
    }
  }
  return best_y;
}

}  // namespace onm::linalg
