// Two-singlet no-signalling experiment: Alice holds particles 1 and 3, Bob
// holds 2 and 4 plus the deletion machine's probe. Applying the machine to
// Bob's side and tracing out Alice and the probe yields Bob's unconditional
// reduced state, which must not depend on Alice's basis choice.

#pragma once

#include <map>
#include <memory>
#include <string>

#include "qdel/machine.hpp"
#include "qdel/qcore.hpp"

namespace qdel {

inline constexpr double kSignalTol = 1e-8;

// (|psi>|psi_bar> - |psi_bar>|psi>) / sqrt(2) in the given basis.
Ket singlet(const BasisPair& basis);

// singlet on particles (1,2) tensor singlet on (3,4), in particle order
// 1,2,3,4.
Ket composite_state(const BasisPair& basis);

struct ProtocolBranch {
  DensityMatrix state;  // subnormalized over particles (2,4)
  double probability;
};

struct ProtocolResult {
  BasisPair alice_basis;
  DensityMatrix unconditional_bob;                // over particles (2,4)
  std::map<std::string, ProtocolBranch> branches;  // "P0", "P1", ...
  std::shared_ptr<const DeletionMachine> machine;
};

// Appends the probe in |P0>, applies the machine to (particle 2, particle 4,
// probe), and decomposes the result. Requires a qubit machine.
ProtocolResult run_protocol(std::shared_ptr<const DeletionMachine> machine,
                            const BasisPair& alice_basis);

struct SignallingVerdict {
  bool signalling;
  double distance;  // trace distance of the unconditional Bob states
};

// Requires both results to come from the same machine instance.
SignallingVerdict detect_signalling(const ProtocolResult& a, const ProtocolResult& b,
                                    double tol = kSignalTol);

// Machine spec for the basis-pair set {psi, psi_bar} with success
// probabilities (p, p_perp) and blank |0>.
MachineSpec basis_machine_spec(const BasisPair& basis, double p, double p_perp,
                               int probe_dim = 4);

// Bob's normalized conditional state over (2,4) given Alice's outcome pair
// (a1, a3, each 0 = psi or 1 = psi_bar in alice_basis) and probe outcome P0,
// with the joint outcome probability. These post-selected branches depend on
// Alice's basis even though the unconditional state does not; comparing them
// across bases is diagnostic only, not signalling.
std::pair<DensityMatrix, double> conditional_success_branch(
    const DeletionMachine& machine, const BasisPair& alice_basis, int a1, int a3);

// Demonstration-only seeded sampling of (Alice outcome, probe outcome)
// counts; the density-matrix statements above never sample.
std::map<std::string, long> sample_protocol(const DeletionMachine& machine,
                                            const BasisPair& alice_basis,
                                            std::uint64_t seed, long shots);

}  // namespace qdel
