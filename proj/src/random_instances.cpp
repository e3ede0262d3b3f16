#include "qdel/random_instances.hpp"

#include <cmath>

namespace qdel {

Ket random_ket(SplitMix64& rng, int dim) {
  Eigen::VectorXcd amps(dim);
  for (int i = 0; i < dim; ++i) amps[i] = cxd(rng.normal(), rng.normal());
  return Ket::normalized(std::move(amps), {dim});
}

OperatorMatrix random_unitary(SplitMix64& rng, Dims dims) {
  long n = dims_product(dims);
  Eigen::MatrixXcd u(n, n);
  long col = 0;
  while (col < n) {
    Eigen::VectorXcd v(n);
    for (long i = 0; i < n; ++i) v[i] = cxd(rng.normal(), rng.normal());
    for (int pass = 0; pass < 2; ++pass) {
      for (long j = 0; j < col; ++j) v -= u.col(j).dot(v) * u.col(j);
    }
    double r = v.norm();
    if (r < 1e-6) continue;  // essentially impossible; redraw
    u.col(col++) = v / r;
  }
  return OperatorMatrix(std::move(u), std::move(dims), true);
}

StateSet random_independent_set(SplitMix64& rng, int n, int dim, double max_overlap) {
  if (n > dim) {
    throw std::invalid_argument("random_independent_set: n states need n dimensions");
  }
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<Ket> states;
    for (int k = 0; k < n; ++k) states.push_back(random_ket(rng, dim));
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      for (int j = i + 1; j < n && ok; ++j)
        if (std::abs(inner(states[i], states[j])) > max_overlap) ok = false;
    if (!ok) continue;
    StateSet set(std::move(states));
    if (set.linearly_independent()) return set;
  }
  throw std::runtime_error("random_independent_set: could not draw a valid set");
}

std::vector<double> random_feasible_probabilities(SplitMix64& rng, const StateSet& set,
                                                  int probe_dim) {
  double p_max = max_uniform_probability(set);
  std::vector<double> p(set.size());
  for (double& v : p) v = rng.uniform() * p_max;
  Ket blank = Ket::basis(0, {set.dim()});
  for (int halving = 0; halving < 64; ++halving) {
    MachineSpec spec(set, p, blank, probe_dim);
    if (feasibility(spec).feasible) return p;
    for (double& v : p) v *= 0.5;
  }
  return std::vector<double>(set.size(), 0.0);
}

StateSet overlap_pair(double overlap, int dim) {
  if (overlap < 0.0 || overlap >= 1.0) {
    throw std::invalid_argument("overlap_pair: overlap must be in [0, 1)");
  }
  if (dim < 2) throw std::invalid_argument("overlap_pair: dim must be >= 2");
  Eigen::VectorXcd v0 = Eigen::VectorXcd::Zero(dim), v1 = Eigen::VectorXcd::Zero(dim);
  v0[0] = 1.0;
  v1[0] = overlap;
  v1[1] = std::sqrt(1.0 - overlap * overlap);
  return StateSet({Ket::normalized(std::move(v0), {dim}),
                   Ket::normalized(std::move(v1), {dim})});
}

StateSet equi_overlap_set(int n, double overlap) {
  if (overlap < 0.0 || overlap >= 1.0) {
    throw std::invalid_argument("equi_overlap_set: overlap must be in [0, 1)");
  }
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Constant(n, n, overlap);
  g.diagonal().setOnes();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
  Eigen::MatrixXcd root =
      es.eigenvectors() *
      es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      es.eigenvectors().adjoint();
  std::vector<Ket> states;
  for (int k = 0; k < n; ++k) {
    states.push_back(Ket::normalized(root.col(k), {n}));
  }
  return StateSet(std::move(states));
}

BipartiteEnsemble ensemble_for(StateSet bob_states) {
  const int n = bob_states.size();
  std::vector<Ket> alice;
  for (int k = 0; k < n; ++k) alice.push_back(Ket::basis(k, {n}));
  return BipartiteEnsemble(std::move(alice), std::move(bob_states));
}

BipartiteEnsemble random_ensemble(SplitMix64& rng, int n, int bob_dim, double max_overlap) {
  return ensemble_for(random_independent_set(rng, n, bob_dim, max_overlap));
}

}  // namespace qdel
