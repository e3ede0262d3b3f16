#include "qdel/nosignal.hpp"

#include <cmath>

#include "qdel/rng.hpp"

namespace qdel {

Ket singlet(const BasisPair& basis) {
  Ket a = basis.psi(), b = basis.psi_bar();
  Eigen::VectorXcd amps = (kron(a, b).amplitudes() - kron(b, a).amplitudes()) / std::sqrt(2.0);
  return Ket::unit(std::move(amps), {2, 2});
}

Ket composite_state(const BasisPair& basis) {
  Ket s = singlet(basis);
  return kron(s, s);  // subsystems in particle order 1,2,3,4
}

ProtocolResult run_protocol(std::shared_ptr<const DeletionMachine> machine,
                            const BasisPair& alice_basis) {
  if (!machine) throw std::invalid_argument("run_protocol: null machine");
  if (machine->input_dim() != 2) {
    throw std::invalid_argument("run_protocol: machine input dimension must be 2");
  }
  const int probe = machine->probe_dim();

  Ket state = kron(composite_state(alice_basis), Ket::basis(0, {probe}));
  // Machine acts on (particle 2, particle 4, probe) = subsystems (1, 3, 4).
  state = apply_to_subsystems(machine->unitary(), state, {1, 3, 4});

  DensityMatrix rho = DensityMatrix::from_ket(state);
  DensityMatrix unconditional = partial_trace(rho, {1, 3});

  std::map<std::string, ProtocolBranch> branches;
  for (int s = 0; s < probe; ++s) {
    auto [branch_ket, prob] = project(state, 4, Ket::basis(s, {probe}), false);
    DensityMatrix branch_rho = partial_trace(DensityMatrix::from_ket(branch_ket), {1, 3});
    branches.emplace("P" + std::to_string(s), ProtocolBranch{std::move(branch_rho), prob});
  }

  return ProtocolResult{alice_basis, std::move(unconditional), std::move(branches),
                        std::move(machine)};
}

SignallingVerdict detect_signalling(const ProtocolResult& a, const ProtocolResult& b,
                                    double tol) {
  if (a.machine.get() != b.machine.get()) {
    throw std::invalid_argument("detect_signalling: results from different machines");
  }
  double distance = trace_distance(a.unconditional_bob, b.unconditional_bob);
  return {distance > tol, distance};
}

MachineSpec basis_machine_spec(const BasisPair& basis, double p, double p_perp,
                               int probe_dim) {
  StateSet set({basis.psi(), basis.psi_bar()}, {"psi", "psi_bar"});
  return MachineSpec(std::move(set), {p, p_perp}, Ket::basis(0, {2}), probe_dim);
}

std::pair<DensityMatrix, double> conditional_success_branch(
    const DeletionMachine& machine, const BasisPair& alice_basis, int a1, int a3) {
  if (machine.input_dim() != 2) {
    throw std::invalid_argument("conditional_success_branch: machine must be a qubit machine");
  }
  if ((a1 != 0 && a1 != 1) || (a3 != 0 && a3 != 1)) {
    throw std::invalid_argument("conditional_success_branch: outcomes must be 0 or 1");
  }
  const int probe = machine.probe_dim();
  Ket state = kron(composite_state(alice_basis), Ket::basis(0, {probe}));
  state = apply_to_subsystems(machine.unitary(), state, {1, 3, 4});

  Ket v1 = a1 == 0 ? alice_basis.psi() : alice_basis.psi_bar();
  Ket v3 = a3 == 0 ? alice_basis.psi() : alice_basis.psi_bar();
  auto first = project(state, 0, v1, false);              // drop particle 1
  auto second = project(first.branch, 1, v3, false);      // drop particle 3
  auto success = project(second.branch, 2, Ket::basis(0, {probe}), false);
  double probability = success.probability;
  if (probability < 1e-15) {
    throw std::invalid_argument("conditional_success_branch: outcome has zero probability");
  }
  Ket normalized = Ket::normalized(success.branch.amplitudes(), success.branch.dims());
  return {DensityMatrix::from_ket(normalized), probability};
}

std::map<std::string, long> sample_protocol(const DeletionMachine& machine,
                                            const BasisPair& alice_basis,
                                            std::uint64_t seed, long shots) {
  const int probe = machine.probe_dim();
  Ket state = kron(composite_state(alice_basis), Ket::basis(0, {probe}));
  state = apply_to_subsystems(machine.unitary(), state, {1, 3, 4});

  // Joint outcome distribution: Alice measures particles 1 and 3 in her
  // basis, Bob reads the probe.
  const Ket alice_vecs[2] = {alice_basis.psi(), alice_basis.psi_bar()};
  const char* alice_names[2] = {"psi", "psi_bar"};
  std::vector<std::string> labels;
  std::vector<double> probs;
  for (int a1 = 0; a1 < 2; ++a1) {
    for (int a3 = 0; a3 < 2; ++a3) {
      auto first = project(state, 0, alice_vecs[a1], false);
      auto second = project(first.branch, 1, alice_vecs[a3], false);
      for (int s = 0; s < probe; ++s) {
        auto outcome = project(second.branch, 2, Ket::basis(s, {probe}), false);
        labels.push_back(std::string(alice_names[a1]) + "," + alice_names[a3] +
                         ",P" + std::to_string(s));
        probs.push_back(outcome.probability);
      }
    }
  }

  SplitMix64 rng(seed);
  std::map<std::string, long> counts;
  for (long shot = 0; shot < shots; ++shot) {
    double u = rng.uniform(), acc = 0.0;
    size_t pick = probs.size() - 1;
    for (size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    ++counts[labels[pick]];
  }
  return counts;
}

}  // namespace qdel
