// Acceptance suite: every release-gating property, one pass/fail line each.
// Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qdel/bounds.hpp"
#include "qdel/machine.hpp"
#include "qdel/nosignal.hpp"
#include "qdel/qcore.hpp"
#include "qdel/random_instances.hpp"
#include "qdel/rng.hpp"

using namespace qdel;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  std::printf("%s  criterion %d: %s (%s, %.2fs)\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str(), seconds);
  if (!pass) ++failures;
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

DensityMatrix predicted_success_branch(const BasisPair& basis, double p1, double p2) {
  auto proj = [](const Ket& k) {
    return Eigen::MatrixXcd(k.amplitudes() * k.amplitudes().adjoint());
  };
  Eigen::MatrixXcd bob = 0.25 * (p1 * proj(basis.psi()) + p2 * proj(basis.psi_bar()));
  Eigen::MatrixXcd sigma = proj(Ket::basis(0, {2}));
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) full.block(i * 2, j * 2, 2, 2) = bob(i, j) * sigma;
  return DensityMatrix(std::move(full), {2, 2}, 0.25 * (p1 + p2));
}

// 1. Success branch equals the machine-basis mixture on a 5x5 probability grid.
void criterion_success_branch() {
  Timer timer;
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      double p1 = i / 4.0, p2 = j / 4.0;
      auto machine = std::make_shared<const DeletionMachine>(
          synthesize(basis_machine_spec(BasisPair(0.0), p1, p2)));
      ProtocolResult result = run_protocol(machine, BasisPair(0.0));
      worst = std::max(worst,
                       std::abs(result.branches.at("P0").probability - 0.25 * (p1 + p2)));
      worst = std::max(worst, trace_distance(result.branches.at("P0").state,
                                             predicted_success_branch(BasisPair(0.0), p1, p2)));
    }
  }
  report(1, "success branch reproduces the machine-basis mixture (5x5 grid)",
         worst <= 1e-10, "max trace distance " + fmt(worst), timer.seconds());
}

// 2. Unconditional Bob state is Alice-basis independent for 20 random machines.
void criterion_no_signalling() {
  Timer timer;
  SplitMix64 rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    StateSet set = random_independent_set(rng, 2, 2, 0.9);
    std::vector<double> p = random_feasible_probabilities(rng, set);
    auto machine = std::make_shared<const DeletionMachine>(
        synthesize(MachineSpec(set, p, Ket::basis(0, {2}))));
    std::vector<ProtocolResult> runs;
    for (int g = 0; g < 7; ++g) {
      runs.push_back(run_protocol(machine, BasisPair(std::numbers::pi / 2 * g / 6)));
    }
    for (size_t a = 0; a < runs.size(); ++a)
      for (size_t b = a + 1; b < runs.size(); ++b)
        worst = std::max(worst, detect_signalling(runs[a], runs[b], 1e-8).distance);
  }
  report(2, "no-signalling invariance (20 machines x 7 bases)", worst <= 1e-10,
         "max trace distance " + fmt(worst), timer.seconds());
}

// 3. Linearly dependent four-state families admit no positive probability.
void criterion_linear_dependence() {
  Timer timer;
  bool pass = true;
  std::string detail;
  for (double theta : {std::numbers::pi / 12, std::numbers::pi / 6, std::numbers::pi / 4}) {
    BasisPair first(0.0), second(theta);
    StateSet family({first.psi(), first.psi_bar(), second.psi(), second.psi_bar()});
    double p = max_uniform_probability(family);
    if (p > kBisectTol) {
      pass = false;
      detail = "bisection returned " + fmt(p) + " at theta " + fmt(theta);
    }
    auto states = oracle::basis_pair_family(theta);
    Eigen::VectorXcd blank(2);
    blank << 1, 0;
    for (int i = 1; i <= 500; ++i) {
      if (oracle::feasible_general(states, std::vector<double>(4, i * 0.001), blank)) {
        pass = false;
        detail = "oracle found feasible p " + fmt(i * 0.001) + " at theta " + fmt(theta);
        break;
      }
    }
  }
  if (detail.empty()) detail = "bisection 0 within 1e-8, oracle grid all infeasible";
  report(3, "linear dependence forbids positive deletion probability", pass, detail,
         timer.seconds());
}

// 4 + 5. Bound holds and the simulated zeta overlap matches the closed form
// across 500 seeded instances.
void criterion_bound_and_overlap_identity() {
  Timer timer;
  SplitMix64 rng(404);
  double worst_slack = 1e9, worst_identity = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    int n = 2 + (trial % 2);
    BipartiteEnsemble ensemble = random_ensemble(rng, n, n, 0.9);
    const StateSet& bob = ensemble.bob_states();
    double p = max_uniform_probability(bob);
    DeletionMachine machine =
        synthesize(MachineSpec(bob, std::vector<double>(n, p), Ket::basis(0, {n})));
    Ket xi = deleted_state(ensemble, machine);
    const double n2 = static_cast<double>(n) * n;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        BoundReport r = bound_report_for_pair(ensemble, machine, xi, i, j);
        worst_slack = std::min(worst_slack, r.slack);
        cxd simulated = n2 * inner(zeta(xi, ensemble, i), zeta(xi, ensemble, j));
        cxd closed = std::sqrt(p * p) * inner(bob.state(i), bob.state(j)) +
                     inner(machine.failure_component(i), machine.failure_component(j));
        worst_identity = std::max(worst_identity, std::abs(simulated - closed));
      }
    }
  }
  double elapsed = timer.seconds();
  report(4, "deletion-probability bound holds across 500 seeded instances",
         worst_slack >= -1e-9, "min slack " + fmt(worst_slack), elapsed);
  report(5, "simulated zeta overlap matches the closed form", worst_identity <= 1e-9,
         "max deviation " + fmt(worst_identity), elapsed);
}

// 6. Every synthesized machine verifies at 1e-9.
void criterion_synthesis_soundness() {
  Timer timer;
  SplitMix64 rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int d = 2 + (trial % 2);
    int n = 2 + static_cast<int>(rng.next() % (d - 1));
    StateSet set = random_independent_set(rng, n, d, 0.9);
    std::vector<double> p = random_feasible_probabilities(rng, set);
    DeletionMachine machine = synthesize(MachineSpec(set, p, Ket::basis(0, {d})));
    MachineVerification v = verify_machine(machine);
    worst = std::max({worst, v.unitarity_defect, v.max_probability_error,
                      v.max_fidelity_error, v.max_cross_leakage, v.max_gram_defect});
  }
  report(6, "synthesis soundness (100 random feasible specs, d = 2, 3)", worst <= 1e-9,
         "max defect " + fmt(worst), timer.seconds());
}

// 7. Bisection equals the brute-force grid scan.
void criterion_oracle_equivalence() {
  Timer timer;
  double worst = 0.0;
  for (double s : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    double bisected = max_uniform_probability(overlap_pair(s));
    double scanned = oracle::pstar_grid_scan(s);
    worst = std::max(worst, std::abs(bisected - scanned));
  }
  report(7, "bisection matches the 1e-6 grid-scan oracle", worst <= 1e-6,
         "max difference " + fmt(worst), timer.seconds());
}

// 8. Singlet basis invariance.
void criterion_singlet_invariance() {
  Timer timer;
  SplitMix64 rng(808);
  Ket s0 = singlet(BasisPair(0.0));
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    double theta = rng.uniform() * std::numbers::pi;
    worst = std::max(worst, std::abs(fidelity(singlet(BasisPair(theta)), s0) - 1.0));
  }
  report(8, "singlet basis invariance (50 random bases)", worst <= 1e-12,
         "max fidelity deviation " + fmt(worst), timer.seconds());
}

// 9. CLI determinism: byte-identical CSV under a fixed seed.
void criterion_cli_determinism() {
  Timer timer;
  namespace fs = std::filesystem;
  auto tmp = [](const std::string& name) {
    return (fs::temp_directory_path() / ("qdel_acceptance_" + name)).string();
  };
  auto read = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto run = [](const std::string& args) {
    std::string cmd = std::string(QDEL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };

  bool pass = true;
  std::string detail = "bound and sweep CSV byte-identical";
  run("--seed 31 --out " + tmp("b1.csv") + " bound --n 3 --trials 3");
  run("--seed 31 --out " + tmp("b2.csv") + " bound --n 3 --trials 3");
  if (read(tmp("b1.csv")).empty() || read(tmp("b1.csv")) != read(tmp("b2.csv"))) {
    pass = false;
    detail = "bound CSV differs between runs";
  }
  run("--seed 31 --out " + tmp("s1.csv") + " sweep --variable overlap --start 0 --stop 0.8 --steps 6");
  run("--seed 31 --out " + tmp("s2.csv") + " sweep --variable overlap --start 0 --stop 0.8 --steps 6");
  if (read(tmp("s1.csv")).empty() || read(tmp("s1.csv")) != read(tmp("s2.csv"))) {
    pass = false;
    detail = "sweep CSV differs between runs";
  }
  report(9, "CLI bound/sweep determinism under a fixed seed", pass, detail, timer.seconds());
}

}  // namespace

int main() {
  criterion_success_branch();
  criterion_no_signalling();
  criterion_linear_dependence();
  criterion_bound_and_overlap_identity();
  criterion_synthesis_soundness();
  criterion_oracle_equivalence();
  criterion_singlet_invariance();
  criterion_cli_determinism();
  if (failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d acceptance criteria FAILED\n", failures);
  return 1;
}
