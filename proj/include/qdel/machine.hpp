// Probabilistic exact deletion machines for a finite set of candidate
// states: feasibility of a requested success-probability vector, the largest
// feasible uniform probability, and synthesis of an explicit unitary that
// maps |v_k>|v_k>|P0> to sqrt(p_k)|v_k>|Sigma>|P0> plus a heralded failure
// component, with cross inputs |v_k>|v_l> (k != l) never reaching P0.
//
// Feasibility criterion: a unitary with the pinned success components exists
// iff the residual Gram matrix
//     R = Gram(inputs) - Gram(pinned success components)
// is positive semidefinite. R is then realized as the Gram matrix of the
// failure components, which live in the probe sectors orthogonal to |P0>.

#pragma once

#include <string>
#include <vector>

#include "qdel/qcore.hpp"

namespace qdel {

inline constexpr double kFeasTol = 1e-10;
inline constexpr double kBisectTol = 1e-8;

// Candidate states over a single input space, with a Gram-rank record of
// linear independence.
class StateSet {
 public:
  explicit StateSet(std::vector<Ket> states, std::vector<std::string> labels = {});

  int size() const { return static_cast<int>(states_.size()); }
  int dim() const { return static_cast<int>(states_[0].dim()); }
  const Ket& state(int k) const { return states_.at(k); }
  const std::vector<Ket>& states() const { return states_; }
  const std::vector<std::string>& labels() const { return labels_; }
  int gram_rank() const { return gram_rank_; }
  bool linearly_independent() const { return gram_rank_ == size(); }

 private:
  std::vector<Ket> states_;
  std::vector<std::string> labels_;
  int gram_rank_;
};

// Entry (i, j) = <v_i|v_j>. Hermitian with unit diagonal.
Eigen::MatrixXcd gram(const StateSet& set);

struct MachineSpec {
  MachineSpec(StateSet state_set, std::vector<double> probabilities, Ket blank,
              int probe_dim = 4);

  StateSet state_set;
  std::vector<double> probabilities;  // success probability per state, in [0, 1]
  Ket blank;                          // standard state left in the deleted slot
  int probe_dim;                      // >= 2
};

struct FeasibilityReport {
  bool feasible;                   // min_eigenvalue >= -1e-10
  Eigen::MatrixXcd residual_gram;  // N^2 x N^2, indexed (k, l) -> k*N + l
  double min_eigenvalue;
};

FeasibilityReport feasibility(const MachineSpec& spec);

// Largest uniform p with a feasible residual, by bisection to absolute
// tolerance 1e-8. Feasibility is monotone in uniform p, so bisection is
// exact up to tolerance. Returns 0 when no positive p is feasible.
double max_uniform_probability(const StateSet& set);

enum class ProbeRole { success, diagonal_failure, cross_low, cross_high, spare };

std::string to_string(ProbeRole role);

class DeletionMachine {
 public:
  DeletionMachine(OperatorMatrix unitary, MachineSpec spec,
                  std::vector<ProbeRole> probe_labels);

  const OperatorMatrix& unitary() const { return unitary_; }
  const MachineSpec& spec() const { return spec_; }
  // Role of each probe basis index; index 0 is always the success flag.
  const std::vector<ProbeRole>& probe_labels() const { return probe_labels_; }

  int input_dim() const { return spec_.state_set.dim(); }
  int probe_dim() const { return spec_.probe_dim; }

  // |v_k>|v_k>|P0> for state k of the spec.
  Ket diagonal_input(int k) const;
  Ket cross_input(int k, int l) const;
  // U applied to an ordered-pair input.
  Ket image(int k, int l) const;
  // P0-orthogonal part of image(k, k); its Gram matrix over k reproduces the
  // diagonal block of the residual.
  Ket failure_component(int k) const;

 private:
  OperatorMatrix unitary_;
  MachineSpec spec_;
  std::vector<ProbeRole> probe_labels_;
};

// Builds the machine unitary. Throws when the spec is infeasible (message
// names the offending min eigenvalue) or when probe_dim cannot host the
// failure rank (message names the required dimension).
DeletionMachine synthesize(const MachineSpec& spec);

struct MachineVerification {
  double unitarity_defect;
  double max_probability_error;   // success probability vs requested p_k
  double max_fidelity_error;      // conditional state vs |v_k>|Sigma>
  double max_cross_leakage;       // P0 probability of cross inputs
  double max_gram_defect;         // inner products of images vs inputs

  bool pass(double tol = 1e-9) const;
};

MachineVerification verify_machine(const DeletionMachine& m);

}  // namespace qdel
