#pragma once

#include <initializer_list>

#include "qpl/model.hpp"

namespace qpl::test {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

inline ModelConfig cosine_model(int d, const ToeplitzKernel& S, double lambda) {
  ModelConfig cfg;
  cfg.kernel = S;
  cfg.potential = TrigPotential::cosine_sum(d);
  cfg.blocks = BlockStructure::ones(d);
  cfg.lambda = lambda;
  cfg.omega = Frequency(d);
  for (int i = 0; i < d; ++i) cfg.omega[i] = i == 0 ? kGoldenMean : 0.4142135623730951;
  cfg.validate();
  return cfg;
}

inline PointSet cube(int d, int N) { return PointSet::from_box(Box::cube(LatticePoint(d), N)); }

}  // namespace qpl::test
