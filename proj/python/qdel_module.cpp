#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "qdel/bounds.hpp"
#include "qdel/machine.hpp"
#include "qdel/nosignal.hpp"
#include "qdel/qcore.hpp"
#include "qdel/random_instances.hpp"
#include "qdel/rng.hpp"

namespace py = pybind11;
using namespace qdel;

PYBIND11_MODULE(_qdel, m) {
  m.doc() = "probabilistic exact deletion machine simulator";

  py::class_<Ket>(m, "Ket")
      .def_static("normalized", &Ket::normalized, py::arg("amplitudes"), py::arg("dims"))
      .def_static("subnormalized", &Ket::subnormalized, py::arg("amplitudes"),
                  py::arg("dims"))
      .def_static("basis", &Ket::basis, py::arg("index"), py::arg("dims"))
      .def_property_readonly("amplitudes", &Ket::amplitudes)
      .def_property_readonly("dims", &Ket::dims)
      .def_property_readonly("weight", &Ket::weight)
      .def("__len__", &Ket::dim);

  py::class_<OperatorMatrix>(m, "OperatorMatrix")
      .def(py::init<Eigen::MatrixXcd, Dims, bool>(), py::arg("entries"), py::arg("dims"),
           py::arg("assert_unitary") = false)
      .def_static("identity", &OperatorMatrix::identity, py::arg("dims"))
      .def_property_readonly("entries", &OperatorMatrix::entries)
      .def_property_readonly("dims", &OperatorMatrix::dims)
      .def_property_readonly("unitary_flag", &OperatorMatrix::unitary_flag);

  py::class_<DensityMatrix>(m, "DensityMatrix")
      .def(py::init<Eigen::MatrixXcd, Dims, double>(), py::arg("entries"), py::arg("dims"),
           py::arg("weight") = 1.0)
      .def_static("from_ket", &DensityMatrix::from_ket, py::arg("psi"))
      .def_property_readonly("entries", &DensityMatrix::entries)
      .def_property_readonly("dims", &DensityMatrix::dims)
      .def_property_readonly("weight", &DensityMatrix::weight)
      .def("add", &DensityMatrix::add);

  py::class_<BasisPair>(m, "BasisPair")
      .def(py::init<double>(), py::arg("theta"))
      .def_property_readonly("theta", &BasisPair::theta)
      .def_property_readonly("psi", &BasisPair::psi)
      .def_property_readonly("psi_bar", &BasisPair::psi_bar);

  m.def("ket_new",
        [](const Eigen::VectorXcd& amps, const Dims& dims) {
          return Ket::normalized(amps, dims);
        },
        py::arg("amplitudes"), py::arg("dims"));
  m.def("kron", py::overload_cast<const Ket&, const Ket&>(&kron));
  m.def("kron_op", py::overload_cast<const OperatorMatrix&, const OperatorMatrix&>(&kron));
  m.def("permute_subsystems",
        py::overload_cast<const Ket&, const std::vector<int>&>(&permute_subsystems));
  m.def("permute_subsystems_dm",
        py::overload_cast<const DensityMatrix&, const std::vector<int>&>(&permute_subsystems));
  m.def("partial_trace", &partial_trace, py::arg("rho"), py::arg("keep"));
  m.def("project",
        [](const Ket& psi, int subsystem, const Ket& onto, bool keep_subsystem) {
          auto r = project(psi, subsystem, onto, keep_subsystem);
          return py::make_tuple(r.branch, r.probability);
        },
        py::arg("psi"), py::arg("subsystem"), py::arg("onto"),
        py::arg("keep_subsystem") = false);
  m.def("trace_distance", &trace_distance);
  m.def("is_unitary", &is_unitary, py::arg("u"), py::arg("tol") = 1e-10);
  m.def("inner", &inner);
  m.def("fidelity", &fidelity);
  m.def("apply_to_subsystems", &apply_to_subsystems);

  py::class_<StateSet>(m, "StateSet")
      .def(py::init<std::vector<Ket>, std::vector<std::string>>(), py::arg("states"),
           py::arg("labels") = std::vector<std::string>{})
      .def_property_readonly("size", &StateSet::size)
      .def_property_readonly("dim", &StateSet::dim)
      .def("state", &StateSet::state)
      .def_property_readonly("labels", &StateSet::labels)
      .def_property_readonly("gram_rank", &StateSet::gram_rank)
      .def_property_readonly("linearly_independent", &StateSet::linearly_independent);

  m.def("gram", &gram);

  py::class_<MachineSpec>(m, "MachineSpec")
      .def(py::init<StateSet, std::vector<double>, Ket, int>(), py::arg("state_set"),
           py::arg("probabilities"), py::arg("blank"), py::arg("probe_dim") = 4)
      .def_readonly("state_set", &MachineSpec::state_set)
      .def_readonly("probabilities", &MachineSpec::probabilities)
      .def_readonly("blank", &MachineSpec::blank)
      .def_readonly("probe_dim", &MachineSpec::probe_dim);

  py::class_<FeasibilityReport>(m, "FeasibilityReport")
      .def_readonly("feasible", &FeasibilityReport::feasible)
      .def_readonly("residual_gram", &FeasibilityReport::residual_gram)
      .def_readonly("min_eigenvalue", &FeasibilityReport::min_eigenvalue);

  m.def("feasibility", &feasibility);
  m.def("max_uniform_probability", &max_uniform_probability);

  py::class_<DeletionMachine, std::shared_ptr<DeletionMachine>>(m, "DeletionMachine")
      .def_property_readonly("unitary", &DeletionMachine::unitary)
      .def_property_readonly("spec", &DeletionMachine::spec)
      .def_property_readonly("probe_labels",
                             [](const DeletionMachine& dm) {
                               std::vector<std::string> labels;
                               for (auto role : dm.probe_labels())
                                 labels.push_back(to_string(role));
                               return labels;
                             })
      .def("image", &DeletionMachine::image)
      .def("failure_component", &DeletionMachine::failure_component);

  m.def("synthesize", [](const MachineSpec& spec) {
    return std::make_shared<DeletionMachine>(synthesize(spec));
  });

  py::class_<MachineVerification>(m, "MachineVerification")
      .def_readonly("unitarity_defect", &MachineVerification::unitarity_defect)
      .def_readonly("max_probability_error", &MachineVerification::max_probability_error)
      .def_readonly("max_fidelity_error", &MachineVerification::max_fidelity_error)
      .def_readonly("max_cross_leakage", &MachineVerification::max_cross_leakage)
      .def_readonly("max_gram_defect", &MachineVerification::max_gram_defect)
      .def("passes", &MachineVerification::pass, py::arg("tol") = 1e-9);

  m.def("verify_machine", &verify_machine);

  m.def("singlet", &singlet);
  m.def("composite_state", &composite_state);
  m.def("basis_machine_spec", &basis_machine_spec, py::arg("basis"), py::arg("p"),
        py::arg("p_perp"), py::arg("probe_dim") = 4);

  py::class_<ProtocolResult>(m, "ProtocolResult")
      .def_property_readonly("alice_basis",
                             [](const ProtocolResult& r) { return r.alice_basis; })
      .def_property_readonly("unconditional_bob",
                             [](const ProtocolResult& r) { return r.unconditional_bob; })
      .def_property_readonly("branches", [](const ProtocolResult& r) {
        py::dict d;
        for (const auto& [label, branch] : r.branches) {
          d[py::str(label)] = py::make_tuple(branch.state, branch.probability);
        }
        return d;
      });

  m.def("run_protocol",
        [](std::shared_ptr<DeletionMachine> machine, const BasisPair& basis) {
          return run_protocol(std::move(machine), basis);
        },
        py::arg("machine"), py::arg("alice_basis"));
  m.def("detect_signalling",
        [](const ProtocolResult& a, const ProtocolResult& b, double tol) {
          auto v = detect_signalling(a, b, tol);
          return py::make_tuple(v.signalling, v.distance);
        },
        py::arg("a"), py::arg("b"), py::arg("tol") = kSignalTol);
  m.def("sample_protocol", &sample_protocol, py::arg("machine"), py::arg("alice_basis"),
        py::arg("seed"), py::arg("shots"));

  py::class_<BipartiteEnsemble>(m, "BipartiteEnsemble")
      .def(py::init<std::vector<Ket>, StateSet>(), py::arg("alice_states"),
           py::arg("bob_states"))
      .def_property_readonly("n", &BipartiteEnsemble::n)
      .def("alice_state", &BipartiteEnsemble::alice_state)
      .def_property_readonly("bob_states", &BipartiteEnsemble::bob_states);

  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("i", &BoundReport::i)
      .def_readonly("j", &BoundReport::j)
      .def_readonly("lhs", &BoundReport::lhs)
      .def_readonly("zeta_overlap", &BoundReport::zeta_overlap)
      .def_readonly("v_overlap", &BoundReport::v_overlap)
      .def_readonly("rhs", &BoundReport::rhs)
      .def_readonly("slack", &BoundReport::slack)
      .def_readonly("satisfied", &BoundReport::satisfied);

  m.def("ensemble_state", &ensemble_state);
  m.def("deleted_state",
        [](const BipartiteEnsemble& e, const DeletionMachine& machine) {
          return deleted_state(e, machine);
        });
  m.def("zeta", &zeta, py::arg("xi"), py::arg("ensemble"), py::arg("i"));
  m.def("check_bound",
        [](const BipartiteEnsemble& e, const DeletionMachine& machine) {
          return check_bound(e, machine);
        });

  py::class_<SplitMix64>(m, "SplitMix64")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next", &SplitMix64::next)
      .def("uniform", &SplitMix64::uniform)
      .def("normal", &SplitMix64::normal);

  m.def("random_ket", &random_ket);
  m.def("random_independent_set", &random_independent_set, py::arg("rng"), py::arg("n"),
        py::arg("dim"), py::arg("max_overlap") = 0.9);
  m.def("random_feasible_probabilities", &random_feasible_probabilities, py::arg("rng"),
        py::arg("set"), py::arg("probe_dim") = 4);
  m.def("overlap_pair", &overlap_pair, py::arg("overlap"), py::arg("dim") = 2);
  m.def("equi_overlap_set", &equi_overlap_set, py::arg("n"), py::arg("overlap"));
  m.def("ensemble_for", &ensemble_for, py::arg("bob_states"));
  m.def("random_ensemble", &random_ensemble, py::arg("rng"), py::arg("n"),
        py::arg("bob_dim"), py::arg("max_overlap") = 0.9);
}
