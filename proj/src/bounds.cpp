#include "qdel/bounds.hpp"

#include <cmath>
#include <sstream>

namespace qdel {

BipartiteEnsemble::BipartiteEnsemble(std::vector<Ket> alice_states, StateSet bob_states)
    : alice_states_(std::move(alice_states)), bob_states_(std::move(bob_states)) {
  const int n = static_cast<int>(alice_states_.size());
  if (n < 2) throw std::invalid_argument("BipartiteEnsemble: need at least 2 states");
  if (n != bob_states_.size()) {
    throw std::invalid_argument("BipartiteEnsemble: alice/bob state count mismatch");
  }
  for (const auto& u : alice_states_) {
    if (u.dims().size() != 1 || u.dim() != alice_states_[0].dim()) {
      throw std::invalid_argument("BipartiteEnsemble: alice states must share one space");
    }
  }
  if (alice_states_[0].dim() < n) {
    throw std::invalid_argument("BipartiteEnsemble: alice dimension below state count");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cxd ip = inner(alice_states_[i], alice_states_[j]);
      if (std::abs(ip - (i == j ? 1.0 : 0.0)) > 1e-10) {
        throw std::invalid_argument("BipartiteEnsemble: alice states not orthonormal");
      }
    }
  }
  if (!bob_states_.linearly_independent()) {
    throw std::invalid_argument("BipartiteEnsemble: bob states must be linearly independent");
  }
}

Ket ensemble_state(const BipartiteEnsemble& e) {
  const int n = e.n();
  const long da = e.alice_dim(), db = e.bob_dim();
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(da * db);
  for (int k = 0; k < n; ++k) {
    for (long a = 0; a < da; ++a) {
      amps.segment(a * db, db) += e.alice_state(k).amplitudes()[a] *
                                  e.bob_states().state(k).amplitudes();
    }
  }
  amps /= std::sqrt(static_cast<double>(n));
  return Ket::normalized(std::move(amps), {static_cast<int>(da), static_cast<int>(db)});
}

Ket deleted_state(const BipartiteEnsemble& e, const DeletionMachine& m) {
  if (m.spec().state_set.size() != e.n() || m.input_dim() != e.bob_dim()) {
    throw std::invalid_argument("deleted_state: machine not built on this ensemble");
  }
  for (int k = 0; k < e.n(); ++k) {
    if (std::abs(fidelity(m.spec().state_set.state(k), e.bob_states().state(k)) - 1.0) >
        1e-9) {
      throw std::invalid_argument(
          "deleted_state: machine state set differs from ensemble bob states");
    }
  }
  Ket psi = ensemble_state(e);
  Ket two = kron(psi, psi);                       // (A, B, A, B)
  two = permute_subsystems(two, {0, 2, 1, 3});    // (A, A, B, B)
  Ket with_probe = kron(two, Ket::basis(0, {m.probe_dim()}));
  return apply_to_subsystems(m.unitary(), with_probe, {2, 3, 4});
}

Ket zeta(const Ket& xi, const BipartiteEnsemble& e, int i) {
  if (i < 0 || i >= e.n()) throw std::out_of_range("zeta: index out of range");
  auto first = project(xi, 0, e.alice_state(i), false);
  auto second = project(first.branch, 0, e.alice_state(i), false);
  return second.branch;  // over (B, B, probe)
}

BoundReport bound_report_for_pair(const BipartiteEnsemble& e, const DeletionMachine& m,
                                  const Ket& xi, int i, int j) {
  const double n2 = static_cast<double>(e.n()) * e.n();
  double v_overlap =
      std::abs(inner(e.bob_states().state(i), e.bob_states().state(j)));
  if (v_overlap > 1.0 - kDuplicateTol) {
    std::ostringstream msg;
    msg << "check_bound: degenerate pair (" << i << ", " << j
        << "), |<v_i|v_j>| = " << v_overlap;
    throw std::invalid_argument(msg.str());
  }
  Ket zi = zeta(xi, e, i), zj = zeta(xi, e, j);
  double zeta_overlap = n2 * std::abs(inner(zi, zj));
  double lhs = 0.5 * (m.spec().probabilities[i] + m.spec().probabilities[j]);
  double rhs = (1.0 - zeta_overlap) / (1.0 - v_overlap);
  return BoundReport{i,   j,   lhs,       zeta_overlap,
                     v_overlap, rhs, rhs - lhs, lhs <= rhs + kBoundSlackTol};
}

std::vector<BoundReport> check_bound(const BipartiteEnsemble& e, const DeletionMachine& m) {
  Ket xi = deleted_state(e, m);
  std::vector<BoundReport> reports;
  for (int i = 0; i < e.n(); ++i)
    for (int j = i + 1; j < e.n(); ++j)
      reports.push_back(bound_report_for_pair(e, m, xi, i, j));
  return reports;
}

}  // namespace qdel
