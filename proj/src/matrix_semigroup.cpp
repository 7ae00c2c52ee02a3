// SPDX-License-Identifier: MIT
#include "semiboost/matrix_semigroup.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "semiboost/rng.hpp"

namespace semiboost {

void MatrixSemigroup::validate() const {
  if (generator.rows() < 2 || generator.rows() != generator.cols())
    throw std::invalid_argument("generator must be square with >= 2 states");
  const double scale = 1.0 + generator.cwiseAbs().maxCoeff();
  for (int i = 0; i < generator.rows(); ++i) {
    if (std::abs(generator.row(i).sum()) > 1e-12 * scale)
      throw std::invalid_argument("generator row " + std::to_string(i) + " does not sum to zero");
    for (int j = 0; j < generator.cols(); ++j)
      if (i != j && generator(i, j) < 0.0)
        throw std::invalid_argument("generator has a negative off-diagonal entry");
  }
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m) {
  const auto d = m.rows();
  double nrm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (nrm > 0.5) {
    nrm *= 0.5;
    ++squarings;
  }
  const Eigen::MatrixXd b = m / std::pow(2.0, squarings);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(d, d);
  for (int k = 1; k <= 30; ++k) {
    term = (term * b) / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int k = 0; k < squarings; ++k) sum = sum * sum;
  return sum;
}

Eigen::MatrixXd exact_transition(const MatrixSemigroup& sg, double t) {
  if (t < 0.0) throw std::invalid_argument("transition time must be >= 0");
  return matrix_exponential(t * sg.generator);
}

Eigen::MatrixXd base_step(const MatrixSemigroup& sg, double delta) {
  if (delta < 0.0) throw std::invalid_argument("step size must be >= 0");
  const double diag = sg.generator.diagonal().cwiseAbs().maxCoeff();
  if (delta * diag > 1.0 + 1e-12)
    throw std::invalid_argument("Euler step leaves the stochastic simplex: delta * max|A_ii| = " +
                                std::to_string(delta * diag) + " > 1");
  const auto d = sg.generator.rows();
  return Eigen::MatrixXd::Identity(d, d) + delta * sg.generator;
}

double tv_distance(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2) {
  if (p1.rows() != p2.rows() || p1.cols() != p2.cols())
    throw std::invalid_argument("matrix shape mismatch");
  return (p1 - p2).cwiseAbs().rowwise().sum().maxCoeff();
}

MatrixExpansionEvaluator::MatrixExpansionEvaluator(MatrixSemigroup sg, OrderParams params)
    : sg_(std::move(sg)), params_(std::move(params)) {
  sg_.validate();
  params_.validate();
}

const Eigen::MatrixXd& MatrixExpansionEvaluator::base_one(int level) {
  auto it = base_memo_.find(level);
  if (it == base_memo_.end())
    it = base_memo_.emplace(level, base_step(sg_, params_.grid.at_level(level).step())).first;
  return it->second;
}

Eigen::MatrixXd MatrixExpansionEvaluator::atom_matrix(const OperatorAtom& a) {
  if (a.t < a.s) throw std::invalid_argument("atom span reversed");
  const auto d = sg_.generator.rows();
  std::int64_t len = a.t - a.s;
  if (len == 0) return Eigen::MatrixXd::Identity(d, d);
  switch (a.kind) {
    case AtomKind::base: {
      // binary power of the one-step matrix
      Eigen::MatrixXd result = Eigen::MatrixXd::Identity(d, d);
      Eigen::MatrixXd pw = base_one(a.level);
      while (len > 0) {
        if (len & 1) result = result * pw;
        len >>= 1;
        if (len > 0) pw = pw * pw;
      }
      return result;
    }
    case AtomKind::boosted:
      if (len != 1)
        throw std::invalid_argument("boosted atoms must span exactly one step of their grid");
      return boosted_step(a.order, a.level);
    case AtomKind::exact:
      return exact_transition(sg_, static_cast<double>(len) * params_.grid.at_level(a.level).step());
  }
  throw std::logic_error("unreachable atom kind");
}

const Eigen::MatrixXd& MatrixExpansionEvaluator::boosted_step(int order, int level) {
  const auto key = std::make_pair(order, level);
  auto it = boosted_memo_.find(key);
  if (it != boosted_memo_.end()) return it->second;
  if (++depth_ > 64) throw std::runtime_error("boosted-step recursion exceeded depth bound");
  OrderParams sub = params_;
  sub.nu = order;
  const Eigen::MatrixXd value = evaluate(build_expansion(sub, level, 0));
  --depth_;
  return boosted_memo_.emplace(key, value).first->second;
}

Eigen::MatrixXd MatrixExpansionEvaluator::evaluate(const std::vector<ExpansionTerm>& terms) {
  const auto d = sg_.generator.rows();
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(d, d);
  for (const auto& term : terms) {
    Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(d, d);
    for (const auto& factor : term.factors) {
      Eigen::MatrixXd f = Eigen::MatrixXd::Zero(d, d);
      for (const auto& entry : factor) f += static_cast<double>(entry.sign) * atom_matrix(entry.atom);
      prod = prod * f;
    }
    total += static_cast<double>(term.sign) * prod;
  }
  return total;
}

Eigen::MatrixXd boosted_transition(const MatrixSemigroup& sg, const OrderParams& params) {
  MatrixExpansionEvaluator ev(sg, params);
  return ev.evaluate(build_expansion(params, 0, 0));
}

MatrixSemigroup random_generator(int states, std::uint64_t seed) {
  if (states < 2) throw std::invalid_argument("need at least two states");
  rng::Stream stream = rng::Stream::derive(seed, 0x6d61747278ull);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(states, states);
  const double hi = 1.5 / static_cast<double>(states - 1);
  for (int i = 0; i < states; ++i) {
    double row = 0.0;
    for (int j = 0; j < states; ++j) {
      if (i == j) continue;
      a(i, j) = 0.05 + (hi - 0.05) * stream.next_uniform();
      row += a(i, j);
    }
    a(i, i) = -row;
  }
  MatrixSemigroup sg{std::move(a)};
  sg.validate();
  return sg;
}

}  // namespace semiboost
