// qdel: probabilistic exact deletion machines at the command line.
//
// Subcommands:
//   feasible  decide whether a state set admits the requested probabilities
//   synth     synthesize the deletion unitary and print its verification
//   nosignal  two-singlet experiment across a grid of Alice bases
//   bound     deletion-probability bound reports as CSV
//   sweep     parameter sweeps (overlap, uniform p, Alice angle) as CSV
//
// Exit codes: 0 success / property holds, 1 property violated or infeasible,
// 2 usage or parse error.

#include <cmath>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qdel/bounds.hpp"
#include "qdel/machine.hpp"
#include "qdel/nosignal.hpp"
#include "qdel/qcore.hpp"
#include "qdel/random_instances.hpp"
#include "qdel/rng.hpp"
#include "qdel/stateset_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolated = 1;
constexpr int kExitUsage = 2;

struct GlobalOptions {
  double tol = qdel::kSignalTol;
  std::uint64_t seed = 12345;
  std::string out;
  bool degrees = false;

  double angle(double value) const {
    return degrees ? value * std::numbers::pi / 180.0 : value;
  }
};

std::vector<double> parse_probability_list(const std::string& text, int count) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t used = 0;
    values.push_back(std::stod(tok, &used));
    if (used != tok.size()) throw std::invalid_argument("bad probability: " + tok);
  }
  if (values.size() == 1) values.assign(count, values[0]);
  if (static_cast<int>(values.size()) != count) {
    throw std::invalid_argument("probability count " + std::to_string(values.size()) +
                                " does not match state count " + std::to_string(count));
  }
  return values;
}

// Output sink: --out file or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write to " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string fmt(double v) { return qdel::format_double(v); }

int run_feasible(const std::string& file, const std::string& p_text, int probe_dim) {
  qdel::StateSet set = qdel::read_state_set(file);
  std::vector<double> p = parse_probability_list(p_text, set.size());
  qdel::MachineSpec spec(set, p, qdel::Ket::basis(0, {set.dim()}), probe_dim);
  qdel::FeasibilityReport report = qdel::feasibility(spec);
  std::cout << (report.feasible ? "feasible" : "infeasible") << "\n"
            << "min eigenvalue: " << fmt(report.min_eigenvalue) << "\n"
            << "gram rank: " << set.gram_rank() << " of " << set.size() << "\n";
  return report.feasible ? kExitOk : kExitViolated;
}

int run_synth(const std::string& file, const std::string& p_text, int probe_dim,
              const std::string& out_path) {
  qdel::StateSet set = qdel::read_state_set(file);
  std::vector<double> p = parse_probability_list(p_text, set.size());
  qdel::MachineSpec spec(set, p, qdel::Ket::basis(0, {set.dim()}), probe_dim);
  qdel::FeasibilityReport report = qdel::feasibility(spec);
  if (!report.feasible) {
    std::cout << "infeasible\nmin eigenvalue: " << fmt(report.min_eigenvalue) << "\n";
    return kExitViolated;
  }
  qdel::DeletionMachine machine = qdel::synthesize(spec);
  qdel::MachineVerification v = qdel::verify_machine(machine);
  std::cout << "unitary dimension: " << machine.unitary().dim() << "\n"
            << "unitarity defect: " << fmt(v.unitarity_defect) << "\n"
            << "max probability error: " << fmt(v.max_probability_error) << "\n"
            << "max fidelity error: " << fmt(v.max_fidelity_error) << "\n"
            << "cross leakage into P0: " << fmt(v.max_cross_leakage) << "\n"
            << "gram defect: " << fmt(v.max_gram_defect) << "\n"
            << "verification: " << (v.pass() ? "pass" : "fail") << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write to " + out_path);
    const auto& u = machine.unitary().entries();
    out << "# unitary " << u.rows() << " x " << u.cols() << ", row per line, re im pairs\n";
    for (long r = 0; r < u.rows(); ++r) {
      for (long c = 0; c < u.cols(); ++c) {
        out << (c ? " " : "") << fmt(u(r, c).real()) << ' ' << fmt(u(r, c).imag());
      }
      out << '\n';
    }
  }
  return v.pass() ? kExitOk : kExitViolated;
}

qdel::DensityMatrix expected_success_branch(const qdel::BasisPair& basis, double p1,
                                            double p2, const qdel::Ket& blank) {
  auto proj = [](const qdel::Ket& k) {
    return k.amplitudes() * k.amplitudes().adjoint();
  };
  Eigen::MatrixXcd bob = 0.25 * (p1 * proj(basis.psi()) + p2 * proj(basis.psi_bar()));
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(4, 4);
  Eigen::MatrixXcd sigma = proj(blank);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      full.block(i * 2, j * 2, 2, 2) = bob(i, j) * sigma;
  return qdel::DensityMatrix(std::move(full), {2, 2}, 0.25 * (p1 + p2));
}

int run_nosignal(const GlobalOptions& global, double theta_m, double p1, double p2,
                 int grid, bool diagnostic, long sample_shots) {
  qdel::BasisPair machine_basis(global.angle(theta_m));
  qdel::MachineSpec spec = qdel::basis_machine_spec(machine_basis, p1, p2);
  qdel::FeasibilityReport report = qdel::feasibility(spec);
  if (!report.feasible) {
    std::cout << "infeasible machine parameters\nmin eigenvalue: "
              << fmt(report.min_eigenvalue) << "\n";
    return kExitViolated;
  }
  auto machine = std::make_shared<const qdel::DeletionMachine>(qdel::synthesize(spec));

  std::vector<qdel::ProtocolResult> results;
  for (int i = 0; i < grid; ++i) {
    double theta = (std::numbers::pi / 2.0) * i / (grid - 1);
    results.push_back(qdel::run_protocol(machine, qdel::BasisPair(theta)));
  }
  double max_distance = 0.0;
  for (size_t i = 0; i < results.size(); ++i) {
    for (size_t j = i + 1; j < results.size(); ++j) {
      auto verdict = qdel::detect_signalling(results[i], results[j], global.tol);
      max_distance = std::max(max_distance, verdict.distance);
    }
  }

  // Alice-outcome-conditioned success branches do depend on her basis; the
  // diagnostic reports how far they drift between the first and last basis.
  double max_branch_distance = 0.0;
  if (diagnostic) {
    qdel::BasisPair first(0.0), last(std::numbers::pi / 4.0);
    for (int a1 = 0; a1 < 2; ++a1) {
      for (int a3 = 0; a3 < 2; ++a3) {
        try {
          auto [state_a, prob_a] = qdel::conditional_success_branch(*machine, first, a1, a3);
          auto [state_b, prob_b] = qdel::conditional_success_branch(*machine, last, a1, a3);
          max_branch_distance =
              std::max(max_branch_distance, qdel::trace_distance(state_a, state_b));
        } catch (const std::invalid_argument&) {
          // zero-probability outcome at one of the bases; nothing to compare
        }
      }
    }
  }

  std::cout << "machine basis theta: " << fmt(machine_basis.theta())
            << ", p = (" << fmt(p1) << ", " << fmt(p2) << ")\n"
            << "alice bases: " << grid << " in [0, pi/2]\n"
            << "max pairwise trace distance of unconditional Bob states: "
            << fmt(max_distance) << "\n";

  // Success-branch comparison at the machine's own basis.
  qdel::ProtocolResult at_machine_basis = qdel::run_protocol(machine, machine_basis);
  qdel::DensityMatrix expected = expected_success_branch(machine_basis, p1, p2,
                                                         machine->spec().blank);
  const auto& p0 = at_machine_basis.branches.at("P0");
  std::cout << "success branch at machine basis: probability " << fmt(p0.probability)
            << ", trace distance to expected mixture "
            << fmt(qdel::trace_distance(p0.state, expected)) << "\n";

  if (diagnostic) {
    std::cout << "diagnostic: max Alice-conditioned success-branch trace distance "
                 "between theta=0 and theta=pi/4: "
              << fmt(max_branch_distance)
              << " (post-selected branches may differ; this is not signalling)\n";
  }
  if (sample_shots > 0) {
    auto counts = qdel::sample_protocol(*machine, qdel::BasisPair(0.0), global.seed,
                                        sample_shots);
    std::cout << "sampled outcomes (alice1,alice3,probe) at theta=0, " << sample_shots
              << " shots:\n";
    for (const auto& [label, count] : counts) {
      std::cout << "  " << label << ": " << count << "\n";
    }
  }

  bool ok = max_distance <= global.tol;
  std::cout << (ok ? "no signalling detected" : "SIGNALLING DISTANCE ABOVE TOLERANCE")
            << " at tol " << fmt(global.tol) << "\n";
  return ok ? kExitOk : kExitViolated;
}

int run_bound(const GlobalOptions& global, int n, double overlap, bool have_overlap,
              double overlap_max, const std::string& p_text, int trials, int bob_dim) {
  if (bob_dim < 0) bob_dim = n;
  Sink sink(global.out);
  std::ostream& out = sink.stream();
  out << "i,j,p_i,p_j,lhs,zeta_overlap,v_overlap,rhs,slack,status\n";

  qdel::SplitMix64 rng(global.seed);
  bool all_ok = true;
  for (int trial = 0; trial < trials; ++trial) {
    qdel::StateSet bob = [&] {
      if (have_overlap) {
        qdel::StateSet base = (n == 2) ? qdel::overlap_pair(overlap, bob_dim)
                                       : qdel::equi_overlap_set(n, overlap);
        // Random global rotation: overlaps are preserved, the embedding varies.
        qdel::OperatorMatrix w = qdel::random_unitary(rng, {base.dim()});
        std::vector<qdel::Ket> rotated;
        for (int k = 0; k < base.size(); ++k) {
          rotated.push_back(qdel::Ket::normalized(
              w.entries() * base.state(k).amplitudes(), base.state(k).dims()));
        }
        return qdel::StateSet(std::move(rotated));
      }
      return qdel::random_independent_set(rng, n, bob_dim, overlap_max);
    }();

    std::vector<double> p;
    if (p_text == "max") {
      p.assign(n, qdel::max_uniform_probability(bob));
    } else {
      p = parse_probability_list(p_text, n);
    }
    qdel::MachineSpec spec(bob, p, qdel::Ket::basis(0, {bob.dim()}), 4);
    qdel::FeasibilityReport report = qdel::feasibility(spec);
    if (!report.feasible) {
      std::cerr << "infeasible probabilities for trial " << trial
                << ", min eigenvalue " << fmt(report.min_eigenvalue) << "\n";
      return kExitViolated;
    }
    qdel::DeletionMachine machine = qdel::synthesize(spec);
    qdel::BipartiteEnsemble ensemble = qdel::ensemble_for(bob);
    qdel::Ket xi = qdel::deleted_state(ensemble, machine);

    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double v_overlap = std::abs(qdel::inner(bob.state(i), bob.state(j)));
        if (v_overlap > 1.0 - qdel::kDuplicateTol) {
          out << i << ',' << j << ',' << fmt(p[i]) << ',' << fmt(p[j]) << ','
              << fmt(0.5 * (p[i] + p[j])) << ",nan," << fmt(v_overlap)
              << ",nan,nan,degenerate\n";
          continue;
        }
        qdel::BoundReport r = qdel::bound_report_for_pair(ensemble, machine, xi, i, j);
        out << r.i << ',' << r.j << ',' << fmt(p[r.i]) << ',' << fmt(p[r.j]) << ','
            << fmt(r.lhs) << ',' << fmt(r.zeta_overlap) << ',' << fmt(r.v_overlap)
            << ',' << fmt(r.rhs) << ',' << fmt(r.slack) << ','
            << (r.satisfied ? "ok" : "violated") << "\n";
        if (!r.satisfied) all_ok = false;
      }
    }
  }
  return all_ok ? kExitOk : kExitViolated;
}

struct SweepRow {
  double value;
  double max_uniform_p;
  bool feasible;
  double bound_rhs;
  double nosignal_distance;
};

int run_sweep(const GlobalOptions& global, const std::string& variable, double start,
              double stop, int steps, double fixed_p, double fixed_overlap,
              double theta_m, double p1, double p2) {
  if (steps < 2) throw CLI::ValidationError("--steps must be >= 2");
  if (!(start < stop)) throw CLI::ValidationError("--start must be < --stop");
  if (variable == "theta") {
    // --degrees converts at parse time; all downstream values are radians.
    start = global.angle(start);
    stop = global.angle(stop);
  }

  auto point_value = [&](int idx) {
    return start + (stop - start) * idx / (steps - 1);
  };

  auto overlap_point = [&](double s) {
    qdel::StateSet set = qdel::overlap_pair(s);
    double pmax = qdel::max_uniform_probability(set);
    qdel::MachineSpec fixed_spec(set, {fixed_p, fixed_p}, qdel::Ket::basis(0, {2}), 4);
    bool feas = qdel::feasibility(fixed_spec).feasible;
    qdel::MachineSpec max_spec(set, {pmax, pmax}, qdel::Ket::basis(0, {2}), 4);
    qdel::DeletionMachine machine = qdel::synthesize(max_spec);
    qdel::BipartiteEnsemble ensemble = qdel::ensemble_for(set);
    qdel::Ket xi = qdel::deleted_state(ensemble, machine);
    double rhs = qdel::bound_report_for_pair(ensemble, machine, xi, 0, 1).rhs;
    auto shared = std::make_shared<const qdel::DeletionMachine>(std::move(machine));
    double max_dist = 0.0;
    std::vector<qdel::ProtocolResult> runs;
    for (int g = 0; g < 5; ++g) {
      runs.push_back(qdel::run_protocol(shared, qdel::BasisPair(std::numbers::pi / 2.0 * g / 4)));
    }
    for (size_t a = 0; a < runs.size(); ++a)
      for (size_t b = a + 1; b < runs.size(); ++b)
        max_dist = std::max(max_dist,
                            qdel::detect_signalling(runs[a], runs[b], global.tol).distance);
    return SweepRow{s, pmax, feas, rhs, max_dist};
  };

  auto p_point = [&](double p) {
    qdel::StateSet set = qdel::overlap_pair(fixed_overlap);
    double pmax = qdel::max_uniform_probability(set);
    qdel::MachineSpec spec(set, {p, p}, qdel::Ket::basis(0, {2}), 4);
    bool feas = qdel::feasibility(spec).feasible;
    double rhs = std::numeric_limits<double>::quiet_NaN();
    double max_dist = std::numeric_limits<double>::quiet_NaN();
    if (feas) {
      qdel::DeletionMachine machine = qdel::synthesize(spec);
      qdel::BipartiteEnsemble ensemble = qdel::ensemble_for(set);
      qdel::Ket xi = qdel::deleted_state(ensemble, machine);
      rhs = qdel::bound_report_for_pair(ensemble, machine, xi, 0, 1).rhs;
      auto shared = std::make_shared<const qdel::DeletionMachine>(std::move(machine));
      auto base = qdel::run_protocol(shared, qdel::BasisPair(0.0));
      auto other = qdel::run_protocol(shared, qdel::BasisPair(std::numbers::pi / 3.0));
      max_dist = qdel::detect_signalling(base, other, global.tol).distance;
    }
    return SweepRow{p, pmax, feas, rhs, max_dist};
  };

  // Fixed machine for the Alice-angle sweep; every row is compared against
  // the grid start.
  std::shared_ptr<const qdel::DeletionMachine> theta_machine;
  std::unique_ptr<qdel::ProtocolResult> theta_base;
  double theta_rhs = std::numeric_limits<double>::quiet_NaN();
  if (variable == "theta") {
    qdel::MachineSpec spec =
        qdel::basis_machine_spec(qdel::BasisPair(global.angle(theta_m)), p1, p2);
    theta_machine =
        std::make_shared<const qdel::DeletionMachine>(qdel::synthesize(spec));
    theta_base = std::make_unique<qdel::ProtocolResult>(
        qdel::run_protocol(theta_machine, qdel::BasisPair(start)));
    qdel::BipartiteEnsemble ensemble = qdel::ensemble_for(spec.state_set);
    qdel::Ket xi = qdel::deleted_state(ensemble, *theta_machine);
    theta_rhs = qdel::bound_report_for_pair(ensemble, *theta_machine, xi, 0, 1).rhs;
  }
  auto theta_point = [&](double theta) {
    auto run = qdel::run_protocol(theta_machine, qdel::BasisPair(theta));
    double dist = qdel::detect_signalling(*theta_base, run, global.tol).distance;
    return SweepRow{theta, qdel::max_uniform_probability(theta_machine->spec().state_set),
                    true, theta_rhs, dist};
  };

  auto compute_point = [&](double value) {
    if (variable == "overlap") return overlap_point(value);
    if (variable == "p") return p_point(value);
    if (variable == "theta") return theta_point(value);
    throw CLI::ValidationError("--variable must be overlap, p, or theta");
  };
  if (variable != "overlap" && variable != "p" && variable != "theta") {
    throw CLI::ValidationError("--variable must be overlap, p, or theta");
  }

  // Grid points are independent pure computations; run batches concurrently
  // and emit rows in grid order.
  const int batch = std::max(1u, std::thread::hardware_concurrency());
  std::vector<SweepRow> rows(steps);
  for (int base = 0; base < steps; base += batch) {
    std::vector<std::future<SweepRow>> futures;
    for (int idx = base; idx < std::min(steps, base + batch); ++idx) {
      futures.push_back(std::async(std::launch::async, compute_point, point_value(idx)));
    }
    for (size_t f = 0; f < futures.size(); ++f) rows[base + f] = futures[f].get();
  }

  Sink sink(global.out);
  std::ostream& out = sink.stream();
  out << "value,max_uniform_probability,feasible,bound_rhs,nosignal_max_distance\n";
  for (const SweepRow& row : rows) {
    out << fmt(row.value) << ',' << fmt(row.max_uniform_p) << ','
        << (row.feasible ? 1 : 0) << ',' << fmt(row.bound_rhs) << ','
        << fmt(row.nosignal_distance) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probabilistic exact deletion machine simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may appear after the subcommand

  GlobalOptions global;
  app.add_option("--tol", global.tol, "signalling tolerance")->capture_default_str();
  app.add_option("--seed", global.seed, "seed for randomized runs")->capture_default_str();
  app.add_option("--out", global.out, "output file (default stdout)");
  app.add_flag("--degrees", global.degrees, "angles given in degrees");

  std::string file, p_text = "1", synth_out;
  int probe_dim = 4;
  auto* feasible_cmd = app.add_subcommand("feasible", "feasibility of a state-set file");
  feasible_cmd->add_option("file", file, "state-set file")->required();
  feasible_cmd->add_option("--p", p_text, "probability list (single value broadcasts)");
  feasible_cmd->add_option("--probe-dim", probe_dim, "probe dimension");

  auto* synth_cmd = app.add_subcommand("synth", "synthesize and verify a machine");
  synth_cmd->add_option("file", file, "state-set file")->required();
  synth_cmd->add_option("--p", p_text, "probability list (single value broadcasts)");
  synth_cmd->add_option("--probe-dim", probe_dim, "probe dimension");
  synth_cmd->add_option("--unitary-out", synth_out, "write the unitary to a file");

  double theta_m = 0.0, p1 = 1.0, p2 = 1.0;
  int grid = 7;
  bool diagnostic = false;
  long sample_shots = 0;
  auto* nosignal_cmd = app.add_subcommand("nosignal", "two-singlet no-signalling run");
  nosignal_cmd->add_option("--theta-m", theta_m, "machine basis angle")->capture_default_str();
  nosignal_cmd->add_option("--p1", p1, "success probability for psi")->capture_default_str();
  nosignal_cmd->add_option("--p2", p2, "success probability for psi_bar")->capture_default_str();
  nosignal_cmd->add_option("--grid", grid, "number of Alice bases in [0, pi/2]")
      ->capture_default_str()
      ->check(CLI::Range(2, 1000));
  nosignal_cmd->add_flag("--diagnostic", diagnostic,
                         "also compare post-selected success branches across bases");
  nosignal_cmd->add_option("--sample", sample_shots, "demo sampling shot count");

  int bound_n = 2, trials = 1, bob_dim = -1;
  double overlap = 0.0, overlap_max = 0.9;
  bool have_overlap = false;
  std::string bound_p = "max";
  auto* bound_cmd = app.add_subcommand("bound", "deletion-probability bound CSV");
  bound_cmd->add_option("--n", bound_n, "ensemble size")->capture_default_str()
      ->check(CLI::Range(2, 6));
  auto* overlap_opt =
      bound_cmd->add_option("--overlap", overlap, "fixed pairwise overlap");
  bound_cmd->add_option("--overlap-max", overlap_max,
                        "max overlap for random instances")->capture_default_str();
  bound_cmd->add_option("--p", bound_p, "uniform probability or 'max'")->capture_default_str();
  bound_cmd->add_option("--trials", trials, "instance count")->capture_default_str()
      ->check(CLI::Range(1, 100000));
  bound_cmd->add_option("--bob-dim", bob_dim, "Bob space dimension (default n)");

  std::string variable;
  double start = 0.0, stop = 1.0, fixed_p = 0.5, fixed_overlap = 0.5;
  int steps = 10;
  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep CSV");
  sweep_cmd->add_option("--variable", variable, "overlap | p | theta")->required();
  sweep_cmd->add_option("--start", start, "range start")->required();
  sweep_cmd->add_option("--stop", stop, "range stop")->required();
  sweep_cmd->add_option("--steps", steps, "grid size")->required();
  sweep_cmd->add_option("--p", fixed_p, "fixed uniform probability")->capture_default_str();
  sweep_cmd->add_option("--overlap", fixed_overlap, "fixed overlap")->capture_default_str();
  sweep_cmd->add_option("--theta-m", theta_m, "machine basis angle")->capture_default_str();
  sweep_cmd->add_option("--p1", p1, "machine probability for psi")->capture_default_str();
  sweep_cmd->add_option("--p2", p2, "machine probability for psi_bar")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  have_overlap = overlap_opt->count() > 0;

  try {
    if (feasible_cmd->parsed()) return run_feasible(file, p_text, probe_dim);
    if (synth_cmd->parsed()) return run_synth(file, p_text, probe_dim, synth_out);
    if (nosignal_cmd->parsed()) {
      return run_nosignal(global, theta_m, p1, p2, grid, diagnostic, sample_shots);
    }
    if (bound_cmd->parsed()) {
      return run_bound(global, bound_n, overlap, have_overlap, overlap_max, bound_p,
                       trials, bob_dim);
    }
    if (sweep_cmd->parsed()) {
      return run_sweep(global, variable, start, stop, steps, fixed_p, fixed_overlap,
                       theta_m, p1, p2);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const qdel::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
