#ifndef STOKESHAPE_LBFGS_HPP
#define STOKESHAPE_LBFGS_HPP

#include <deque>
#include <functional>

#include "stokeshape/metrics.hpp"

namespace stokeshape {

using InnerProduct = std::function<double(const TangentVector&, const TangentVector&)>;

/// Ring buffer of curvature pairs for limited-memory BFGS on the shape
/// manifold. ρ is cached with the metric of the insertion iteration; the
/// two-loop recursion re-evaluates the other inner products with the
/// current metric (identity vector transport).
class LbfgsMemory {
 public:
  explicit LbfgsMemory(int m) : m_(m) {
    if (m < 0) throw std::invalid_argument("LbfgsMemory: capacity must be >= 0");
  }

  int capacity() const { return m_; }
  int size() const { return static_cast<int>(pairs_.size()); }
  void clear() { pairs_.clear(); }

  /// Admits the pair only under the curvature condition g(y, s) > 0.
  bool push(TangentVector s, TangentVector y, const InnerProduct& g) {
    if (m_ == 0) return false;
    const double ys = g(y, s);
    if (!(ys > 0.0)) return false;
    if (size() == m_) pairs_.pop_front();
    pairs_.push_back({std::move(s), std::move(y), 1.0 / ys});
    return true;
  }

  struct Pair {
    TangentVector s, y;
    double rho;
  };
  const std::deque<Pair>& pairs() const { return pairs_; }

 private:
  int m_;
  std::deque<Pair> pairs_;
};

/// Two-loop recursion; with empty memory the output equals the gradient
/// (steepest descent). The initial Hessian guess is the usual
/// g(y,s)/g(y,y) scaling from the most recent pair.
inline TangentVector lbfgs_direction(const TangentVector& gradient, const LbfgsMemory& memory,
                                     const InnerProduct& g) {
  TangentVector q = gradient;
  if (memory.size() == 0) return q;

  const auto& pairs = memory.pairs();
  std::vector<double> alpha(pairs.size());
  for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
    alpha[i] = pairs[i].rho * g(pairs[i].s, q);
    q = q.plus(pairs[i].y, -alpha[i]);
  }
  const auto& last = pairs.back();
  const double yy = g(last.y, last.y);
  const double ys = g(last.y, last.s);
  if (yy > 0.0) q = q.scaled(ys / yy);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double beta = pairs[i].rho * g(pairs[i].y, q);
    q = q.plus(pairs[i].s, alpha[i] - beta);
  }
  return q;
}

}  // namespace stokeshape

#endif  // STOKESHAPE_LBFGS_HPP
