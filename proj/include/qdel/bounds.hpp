// Deletion-probability bound from no-signalling: build the bipartite
// ensemble (1/sqrt(N)) sum_k |u_k>|v_k>, apply a deletion machine to two
// copies of Bob's side, project onto Alice's doubled basis to get the
// subnormalized zeta vectors, and compare the average success probability
// (p_i + p_j)/2 against (1 - N^2 |<zeta_i|zeta_j>|) / (1 - |<v_i|v_j>|).

#pragma once

#include <vector>

#include "qdel/machine.hpp"
#include "qdel/qcore.hpp"

namespace qdel {

inline constexpr double kBoundSlackTol = 1e-9;
inline constexpr double kDuplicateTol = 1e-10;

class BipartiteEnsemble {
 public:
  // alice_states must be orthonormal, at least as many dimensions as states;
  // bob_states must have full Gram rank.
  BipartiteEnsemble(std::vector<Ket> alice_states, StateSet bob_states);

  int n() const { return static_cast<int>(alice_states_.size()); }
  int alice_dim() const { return static_cast<int>(alice_states_[0].dim()); }
  int bob_dim() const { return bob_states_.dim(); }
  const Ket& alice_state(int k) const { return alice_states_.at(k); }
  const StateSet& bob_states() const { return bob_states_; }

 private:
  std::vector<Ket> alice_states_;
  StateSet bob_states_;
};

// (1/sqrt(N)) sum_k |u_k>|v_k> over (A, B).
Ket ensemble_state(const BipartiteEnsemble& e);

// Two copies of the ensemble state in (A, A, B, B) layout with the machine
// applied to (B, B, probe). Requires the machine to be built on
// e.bob_states, same states in the same order.
Ket deleted_state(const BipartiteEnsemble& e, const DeletionMachine& m);

// <u_i u_i| applied to the Alice factors of xi; subnormalized ket over
// (B, B, probe) with squared norm 1/N^2 for an exact machine.
Ket zeta(const Ket& xi, const BipartiteEnsemble& e, int i);

struct BoundReport {
  int i, j;
  double lhs;           // (p_i + p_j) / 2
  double zeta_overlap;  // N^2 |<zeta_i|zeta_j>|
  double v_overlap;     // |<v_i|v_j>|
  double rhs;           // (1 - zeta_overlap) / (1 - v_overlap)
  double slack;         // rhs - lhs
  bool satisfied;       // lhs <= rhs + 1e-9
};

// One report per unordered pair i < j, zeta overlaps taken from the
// simulated deleted state. Throws when a pair is degenerate
// (|<v_i|v_j>| > 1 - 1e-10), naming the pair.
std::vector<BoundReport> check_bound(const BipartiteEnsemble& e, const DeletionMachine& m);

// Single-pair report against a precomputed deleted state.
BoundReport bound_report_for_pair(const BipartiteEnsemble& e, const DeletionMachine& m,
                                  const Ket& xi, int i, int j);

}  // namespace qdel
