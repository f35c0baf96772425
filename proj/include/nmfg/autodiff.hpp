// Copyright 2026 The nmfg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NMFG_AUTODIFF_HPP_
#define NMFG_AUTODIFF_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace nmfg {

enum class OpTag : std::uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kExp,
  kLog,
  kMax0,
  kSigmoid,
  kTanh,
  kSquare,
  kAbs,
  kSqrt,
  kSelect,
  kDot,
  kSum,
};

class Var;

// Define-by-run reverse-mode tape. Nodes are appended in creation order, so
// the node list is always topologically sorted. Parent edges are stored in
// flat arrays (one contiguous slice per node) so that n-ary nodes such as dot
// products cost one node instead of a chain of binary ones.
//
// A tape is single-threaded. Use one tape per thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  // Registers a leaf (an input or a parameter).
  Var variable(double value);

  // Seeds d(root)/d(root) = 1 and accumulates d(root)/d(node) into every
  // node's grad. Calling twice without zero_grad() adds the gradient twice.
  void backward(const Var &root);

  void zero_grad();
  void clear();

  double grad(const Var &v) const;
  double value(std::uint32_t index) const { return values_[index]; }
  std::size_t size() const { return values_.size(); }
  std::size_t edge_count() const { return parents_.size(); }
  OpTag op(std::uint32_t index) const { return ops_[index]; }
  std::span<const std::uint32_t> parents(std::uint32_t index) const;
  std::span<const double> partials(std::uint32_t index) const;

  // Low-level node construction used by the primitive operations.
  std::uint32_t push(OpTag op, double value);
  void add_edge(std::uint32_t parent, double partial);

 private:
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<OpTag> ops_;
  std::vector<std::uint32_t> edge_begin_{0};
  std::vector<std::uint32_t> parents_;
  std::vector<double> partials_;
  std::vector<double> adjoint_;
};

// A scalar that is either a constant (no tape) or a node on a tape. Mixing a
// constant with a taped value records the result on that value's tape.
class Var {
 public:
  Var() = default;
  Var(double value) : value_(value) {}  // NOLINT: implicit constants
  Var(double value, Tape *tape, std::uint32_t index)
      : value_(value), tape_(tape), index_(index) {}

  double value() const { return value_; }
  Tape *tape() const { return tape_; }
  std::uint32_t index() const { return index_; }
  bool is_constant() const { return tape_ == nullptr; }
  double grad() const { return tape_ ? tape_->grad(*this) : 0.0; }

  Var &operator+=(const Var &o);
  Var &operator-=(const Var &o);
  Var &operator*=(const Var &o);
  Var &operator/=(const Var &o);

 private:
  double value_ = 0.0;
  Tape *tape_ = nullptr;
  std::uint32_t index_ = 0;
};

Var operator+(const Var &a, const Var &b);
Var operator-(const Var &a, const Var &b);
Var operator*(const Var &a, const Var &b);
Var operator/(const Var &a, const Var &b);
Var operator-(const Var &a);

inline bool operator<(const Var &a, const Var &b) { return a.value() < b.value(); }
inline bool operator>(const Var &a, const Var &b) { return a.value() > b.value(); }
inline bool operator<=(const Var &a, const Var &b) { return a.value() <= b.value(); }
inline bool operator>=(const Var &a, const Var &b) { return a.value() >= b.value(); }
inline bool operator==(const Var &a, const Var &b) { return a.value() == b.value(); }
inline bool operator!=(const Var &a, const Var &b) { return a.value() != b.value(); }

Var exp(const Var &x);
Var log(const Var &x);  // throws std::domain_error for x <= 0
Var sqrt(const Var &x);
Var abs(const Var &x);
Var max0(const Var &x);  // [x]_+
Var sigmoid(const Var &x);
Var tanh(const Var &x);
Var square(const Var &x);

// Piecewise selection: returns `on_true` if cond else `on_false`, passing the
// gradient to the selected branch only.
Var select(bool cond, const Var &on_true, const Var &on_false);
// Value clamped to [lo, hi] with an identity (straight-through) gradient.
Var clamp_straight_through(const Var &x, double lo, double hi);

Var dot(std::span<const Var> a, std::span<const Var> b);
Var sum(std::span<const Var> xs);

// Plain double overloads so generic code can be instantiated with either
// scalar type.
inline double max0(double x) { return x > 0.0 ? x : 0.0; }
inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
inline double square(double x) { return x * x; }
inline double select(bool cond, double t, double f) { return cond ? t : f; }
inline double clamp_straight_through(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

inline double value_of(double x) { return x; }
inline double value_of(const Var &x) { return x.value(); }

}  // namespace nmfg

namespace Eigen {

template <>
struct NumTraits<nmfg::Var> : NumTraits<double> {
  using Real = nmfg::Var;
  using NonInteger = nmfg::Var;
  using Nested = nmfg::Var;
  using Literal = nmfg::Var;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 3,
    MulCost = 3
  };
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<nmfg::Var, double, BinaryOp> {
  using ReturnType = nmfg::Var;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, nmfg::Var, BinaryOp> {
  using ReturnType = nmfg::Var;
};

}  // namespace Eigen

namespace nmfg {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline Eigen::VectorXd values_of(const Vector<Var> &v) {
  return v.unaryExpr([](const Var &x) { return x.value(); });
}
inline Eigen::VectorXd values_of(const Eigen::VectorXd &v) { return v; }

}  // namespace nmfg

#endif  // NMFG_AUTODIFF_HPP_
