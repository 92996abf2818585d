#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace onm::linalg {

// Thrown when a factorization meets a pivot with |pivot| <= 1e-12 * ||M||_inf.
class SingularMatrix : public std::runtime_error {
 public:
  SingularMatrix(const std::string& what, std::size_t pivot_index)
      : std::runtime_error(what), pivot_index_(pivot_index) {}
  std::size_t pivot_index() const { return pivot_index_; }

 private:
  std::size_t pivot_index_;
};

// Dense real vector.  Public constructors reject NaN/Inf entries; arithmetic
// helpers bypass the check only where the operands were already validated.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n) : e_(n, 0.0) {}
  Vector(std::initializer_list<double> xs) : e_(xs) { require_finite(); }
  explicit Vector(std::vector<double> xs) : e_(std::move(xs)) { require_finite(); }

  static Vector unchecked(std::vector<double> xs) {
    Vector v;
    v.e_ = std::move(xs);
    return v;
  }

  std::size_t size() const { return e_.size(); }
  double operator[](std::size_t i) const { return e_[i]; }
  double& operator[](std::size_t i) { return e_[i]; }
  const std::vector<double>& data() const { return e_; }

  auto begin() const { return e_.begin(); }
  auto end() const { return e_.end(); }

 private:
  void require_finite() const;
  std::vector<double> e_;
};

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& a);
double dot(const Vector& a, const Vector& b);
double norm(const Vector& a);
double inf_norm(const Vector& a);
double distance(const Vector& a, const Vector& b);

// Symmetric matrix in packed upper-triangular storage.  Each logical entry
// (i,j) and (j,i) share one stored value, so symmetry is exact by
// construction and cannot drift through updates.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n) : n_(n), e_(n * (n + 1) / 2, 0.0) {}

  static SymMatrix identity(std::size_t n);
  static SymMatrix diagonal(const Vector& d);

  std::size_t size() const { return n_; }

  double operator()(std::size_t i, std::size_t j) const { return e_[index(i, j)]; }
  void set(std::size_t i, std::size_t j, double v);
  void add(std::size_t i, std::size_t j, double v);

  Vector matvec(const Vector& x) const;
  void add_outer(const Vector& u, double scale);  // += scale * u u^T
  void add_scaled_identity(double scale);
  double inf_norm() const;

  // Row-major n*n copy for factorization and testing.
  std::vector<double> dense() const;

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + j;
  }
  std::size_t n_ = 0;
  std::vector<double> e_;
};

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator*(double s, const SymMatrix& a);

// Eigenvalues in ascending order (cyclic Jacobi).
std::vector<double> symmetric_eigenvalues(const SymMatrix& m);

// Spectral norm max_i |lambda_i|.
double operator_norm(const SymMatrix& m);

// Smallest singular value min_i |lambda_i|.
double min_singular_value(const SymMatrix& m);

// Solve M y = b via Bunch-Kaufman LDL^T with iterative refinement using a
// compensated residual.  Throws SingularMatrix on a negligible pivot.
Vector solve_symmetric(const SymMatrix& m, const Vector& b);

// Residual b - M y accumulated with FMA products and Neumaier summation,
// shared by the refinement loop and by tests that check solve quality.
Vector compensated_residual(const SymMatrix& m, const Vector& y, const Vector& b);

}  // namespace onm::linalg
