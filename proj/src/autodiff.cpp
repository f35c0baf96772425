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

#include "nmfg/autodiff.hpp"

#include <algorithm>
#include <stdexcept>

namespace nmfg {

Var Tape::variable(double value) {
  const std::uint32_t index = push(OpTag::kLeaf, value);
  return Var(value, this, index);
}

std::uint32_t Tape::push(OpTag op, double value) {
  const auto index = static_cast<std::uint32_t>(values_.size());
  values_.push_back(value);
  grads_.push_back(0.0);
  ops_.push_back(op);
  edge_begin_.push_back(edge_begin_.back());
  return index;
}

void Tape::add_edge(std::uint32_t parent, double partial) {
  parents_.push_back(parent);
  partials_.push_back(partial);
  ++edge_begin_.back();
}

std::span<const std::uint32_t> Tape::parents(std::uint32_t index) const {
  return {parents_.data() + edge_begin_[index],
          edge_begin_[index + 1] - edge_begin_[index]};
}

std::span<const double> Tape::partials(std::uint32_t index) const {
  return {partials_.data() + edge_begin_[index],
          edge_begin_[index + 1] - edge_begin_[index]};
}

void Tape::backward(const Var &root) {
  if (root.tape() != this) return;
  const std::uint32_t n = root.index() + 1;
  adjoint_.assign(n, 0.0);
  adjoint_[root.index()] = 1.0;
  for (std::uint32_t i = n; i-- > 0;) {
    const double a = adjoint_[i];
    if (a == 0.0) continue;
    const std::uint32_t end = edge_begin_[i + 1];
    for (std::uint32_t e = edge_begin_[i]; e < end; ++e) {
      adjoint_[parents_[e]] += a * partials_[e];
    }
  }
  for (std::uint32_t i = 0; i < n; ++i) grads_[i] += adjoint_[i];
}

void Tape::zero_grad() { std::fill(grads_.begin(), grads_.end(), 0.0); }

void Tape::clear() {
  values_.clear();
  grads_.clear();
  ops_.clear();
  edge_begin_.assign(1, 0);
  parents_.clear();
  partials_.clear();
}

double Tape::grad(const Var &v) const {
  if (v.tape() != this) return 0.0;
  return grads_[v.index()];
}

namespace {

Tape *common_tape(const Var &a, const Var &b) {
  if (a.tape() && b.tape() && a.tape() != b.tape()) {
    throw std::invalid_argument("operands recorded on different tapes");
  }
  return a.tape() ? a.tape() : b.tape();
}

Var unary(OpTag op, const Var &x, double value, double partial) {
  if (x.is_constant()) return Var(value);
  Tape *tape = x.tape();
  const std::uint32_t index = tape->push(op, value);
  tape->add_edge(x.index(), partial);
  return Var(value, tape, index);
}

Var binary(OpTag op, const Var &a, const Var &b, double value, double da,
           double db) {
  Tape *tape = common_tape(a, b);
  if (tape == nullptr) return Var(value);
  const std::uint32_t index = tape->push(op, value);
  if (!a.is_constant()) tape->add_edge(a.index(), da);
  if (!b.is_constant()) tape->add_edge(b.index(), db);
  return Var(value, tape, index);
}

}  // namespace

Var operator+(const Var &a, const Var &b) {
  return binary(OpTag::kAdd, a, b, a.value() + b.value(), 1.0, 1.0);
}

Var operator-(const Var &a, const Var &b) {
  return binary(OpTag::kSub, a, b, a.value() - b.value(), 1.0, -1.0);
}

Var operator*(const Var &a, const Var &b) {
  return binary(OpTag::kMul, a, b, a.value() * b.value(), b.value(), a.value());
}

Var operator/(const Var &a, const Var &b) {
  if (b.value() == 0.0) throw std::domain_error("division by zero");
  const double inv = 1.0 / b.value();
  return binary(OpTag::kDiv, a, b, a.value() * inv, inv,
                -a.value() * inv * inv);
}

Var operator-(const Var &a) { return unary(OpTag::kNeg, a, -a.value(), -1.0); }

Var &Var::operator+=(const Var &o) { return *this = *this + o; }
Var &Var::operator-=(const Var &o) { return *this = *this - o; }
Var &Var::operator*=(const Var &o) { return *this = *this * o; }
Var &Var::operator/=(const Var &o) { return *this = *this / o; }

Var exp(const Var &x) {
  const double v = std::exp(x.value());
  return unary(OpTag::kExp, x, v, v);
}

Var log(const Var &x) {
  if (!(x.value() > 0.0)) throw std::domain_error("log of non-positive value");
  return unary(OpTag::kLog, x, std::log(x.value()), 1.0 / x.value());
}

Var sqrt(const Var &x) {
  if (x.value() < 0.0) throw std::domain_error("sqrt of negative value");
  const double v = std::sqrt(x.value());
  return unary(OpTag::kSqrt, x, v, v > 0.0 ? 0.5 / v : 0.0);
}

Var abs(const Var &x) {
  const double v = x.value();
  return unary(OpTag::kAbs, x, std::abs(v), v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
}

Var max0(const Var &x) {
  const double v = x.value();
  return unary(OpTag::kMax0, x, v > 0.0 ? v : 0.0, v > 0.0 ? 1.0 : 0.0);
}

Var sigmoid(const Var &x) {
  const double s = sigmoid(x.value());
  return unary(OpTag::kSigmoid, x, s, s * (1.0 - s));
}

Var tanh(const Var &x) {
  const double t = std::tanh(x.value());
  return unary(OpTag::kTanh, x, t, 1.0 - t * t);
}

Var square(const Var &x) {
  const double v = x.value();
  return unary(OpTag::kSquare, x, v * v, 2.0 * v);
}

Var select(bool cond, const Var &on_true, const Var &on_false) {
  const Var &chosen = cond ? on_true : on_false;
  return unary(OpTag::kSelect, chosen, chosen.value(), 1.0);
}

Var clamp_straight_through(const Var &x, double lo, double hi) {
  const double v = x.value();
  return unary(OpTag::kSelect, x, v < lo ? lo : (v > hi ? hi : v), 1.0);
}

Var dot(std::span<const Var> a, std::span<const Var> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  Tape *tape = nullptr;
  double value = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    value += a[i].value() * b[i].value();
    Tape *t = common_tape(a[i], b[i]);
    if (t != nullptr) {
      if (tape != nullptr && t != tape) {
        throw std::invalid_argument("operands recorded on different tapes");
      }
      tape = t;
    }
  }
  if (tape == nullptr) return Var(value);
  const std::uint32_t index = tape->push(OpTag::kDot, value);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_constant()) tape->add_edge(a[i].index(), b[i].value());
    if (!b[i].is_constant()) tape->add_edge(b[i].index(), a[i].value());
  }
  return Var(value, tape, index);
}

Var sum(std::span<const Var> xs) {
  Tape *tape = nullptr;
  double value = 0.0;
  for (const Var &x : xs) {
    value += x.value();
    if (!x.is_constant()) {
      if (tape != nullptr && x.tape() != tape) {
        throw std::invalid_argument("operands recorded on different tapes");
      }
      tape = x.tape();
    }
  }
  if (tape == nullptr) return Var(value);
  const std::uint32_t index = tape->push(OpTag::kSum, value);
  for (const Var &x : xs) {
    if (!x.is_constant()) tape->add_edge(x.index(), 1.0);
  }
  return Var(value, tape, index);
}

}  // namespace nmfg
