#include "qdel/machine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qdel {

namespace {

int hermitian_rank(const Eigen::MatrixXcd& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  int rank = 0;
  for (long i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()[i] > tol) ++rank;
  }
  return rank;
}

// Gram matrix of pinned success components: sqrt(p_k p_k') <v_k|v_k'> on
// diagonal-pair rows and columns, zero elsewhere.
Eigen::MatrixXcd pinned_gram(const Eigen::MatrixXcd& g, const std::vector<double>& p) {
  const int n = static_cast<int>(g.rows());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n * n, n * n);
  for (int k = 0; k < n; ++k)
    for (int kp = 0; kp < n; ++kp)
      out(k * n + k, kp * n + kp) = std::sqrt(p[k] * p[kp]) * g(k, kp);
  return out;
}

Eigen::MatrixXcd residual_gram(const Eigen::MatrixXcd& g, const std::vector<double>& p) {
  const int n = static_cast<int>(g.rows());
  Eigen::MatrixXcd full(n * n, n * n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      for (int kp = 0; kp < n; ++kp)
        for (int lp = 0; lp < n; ++lp)
          full(k * n + l, kp * n + lp) = g(k, kp) * g(l, lp);
  return full - pinned_gram(g, p);
}

// Modified Gram-Schmidt with one re-orthogonalization pass. Appends the
// orthonormalized residual of `v` to `basis` and returns the coefficient row
// (v = sum coeff[i] * basis_before[i] + r * new_vector); returns false when
// the residual norm is below `drop_tol`.
bool mgs_append(std::vector<Eigen::VectorXcd>& basis, Eigen::VectorXcd v,
                double drop_tol) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) v -= b.dot(v) * b;
  }
  double r = v.norm();
  if (r < drop_tol) return false;
  basis.push_back(v / r);
  return true;
}

}  // namespace

// --- StateSet ----------------------------------------------------------------

StateSet::StateSet(std::vector<Ket> states, std::vector<std::string> labels)
    : states_(std::move(states)), labels_(std::move(labels)) {
  if (states_.empty()) throw std::invalid_argument("StateSet: empty");
  for (const auto& s : states_) {
    if (s.dims().size() != 1 || s.dims()[0] != states_[0].dims()[0]) {
      throw std::invalid_argument("StateSet: states must share one input space");
    }
    if (std::abs(s.weight() - 1.0) > kNormTol) {
      throw std::invalid_argument("StateSet: states must be unit norm");
    }
  }
  if (labels_.empty()) {
    for (size_t k = 0; k < states_.size(); ++k) labels_.push_back("v" + std::to_string(k));
  }
  if (labels_.size() != states_.size()) {
    throw std::invalid_argument("StateSet: label count mismatch");
  }
  Eigen::MatrixXcd g(size(), size());
  for (int i = 0; i < size(); ++i)
    for (int j = 0; j < size(); ++j)
      g(i, j) = inner(states_[i], states_[j]);
  gram_rank_ = hermitian_rank(g, kFeasTol);
}

Eigen::MatrixXcd gram(const StateSet& set) {
  Eigen::MatrixXcd g(set.size(), set.size());
  for (int i = 0; i < set.size(); ++i)
    for (int j = 0; j < set.size(); ++j)
      g(i, j) = inner(set.state(i), set.state(j));
  return g;
}

// --- MachineSpec ----------------------------------------------------------------

MachineSpec::MachineSpec(StateSet set, std::vector<double> probs, Ket blank_state,
                         int probe)
    : state_set(std::move(set)), probabilities(std::move(probs)),
      blank(std::move(blank_state)), probe_dim(probe) {
  if (static_cast<int>(probabilities.size()) != state_set.size()) {
    throw std::invalid_argument("MachineSpec: probability count mismatch");
  }
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("MachineSpec: probabilities must be in [0, 1]");
    }
  }
  if (blank.dims().size() != 1 || blank.dims()[0] != state_set.dim()) {
    throw std::invalid_argument("MachineSpec: blank must live in the input space");
  }
  if (std::abs(blank.weight() - 1.0) > kNormTol) {
    throw std::invalid_argument("MachineSpec: blank must be unit norm");
  }
  if (probe_dim < 2) throw std::invalid_argument("MachineSpec: probe_dim must be >= 2");
}

// --- feasibility ----------------------------------------------------------------

FeasibilityReport feasibility(const MachineSpec& spec) {
  Eigen::MatrixXcd r = residual_gram(gram(spec.state_set), spec.probabilities);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r, Eigen::EigenvaluesOnly);
  double min_eig = es.eigenvalues().minCoeff();
  return {min_eig >= -kFeasTol, std::move(r), min_eig};
}

double max_uniform_probability(const StateSet& set) {
  Eigen::MatrixXcd g = gram(set);
  auto feasible_at = [&](double p) {
    Eigen::MatrixXcd r = residual_gram(g, std::vector<double>(set.size(), p));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -kFeasTol;
  };
  if (feasible_at(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > kBisectTol) {
    double mid = 0.5 * (lo + hi);
    (feasible_at(mid) ? lo : hi) = mid;
  }
  return lo;
}

// --- DeletionMachine ----------------------------------------------------------------

std::string to_string(ProbeRole role) {
  switch (role) {
    case ProbeRole::success: return "success";
    case ProbeRole::diagonal_failure: return "diagonal_failure";
    case ProbeRole::cross_low: return "cross_low";
    case ProbeRole::cross_high: return "cross_high";
    case ProbeRole::spare: return "spare";
  }
  return "unknown";
}

DeletionMachine::DeletionMachine(OperatorMatrix unitary, MachineSpec spec,
                                 std::vector<ProbeRole> probe_labels)
    : unitary_(std::move(unitary)), spec_(std::move(spec)),
      probe_labels_(std::move(probe_labels)) {}

Ket DeletionMachine::diagonal_input(int k) const { return cross_input(k, k); }

Ket DeletionMachine::cross_input(int k, int l) const {
  Ket probe0 = Ket::basis(0, {spec_.probe_dim});
  return kron(kron(spec_.state_set.state(k), spec_.state_set.state(l)), probe0);
}

Ket DeletionMachine::image(int k, int l) const {
  Ket in = cross_input(k, l);
  Eigen::VectorXcd out = unitary_.entries() * in.amplitudes();
  return Ket::normalized(std::move(out), in.dims());
}

Ket DeletionMachine::failure_component(int k) const {
  Ket img = image(k, k);
  const int d = input_dim();
  Eigen::VectorXcd amps = img.amplitudes();
  // Zero the P0 probe sector.
  for (long i = 0; i < d * d; ++i) amps[i * spec_.probe_dim] = 0.0;
  return Ket::subnormalized(std::move(amps), img.dims());
}

// --- synthesis ----------------------------------------------------------------

DeletionMachine synthesize(const MachineSpec& spec) {
  const int n = spec.state_set.size();
  const int d = spec.state_set.dim();
  const int probe = spec.probe_dim;
  const long dim_h = static_cast<long>(d) * d * probe;

  FeasibilityReport report = feasibility(spec);
  if (!report.feasible) {
    std::ostringstream msg;
    msg << "synthesize: infeasible spec, residual min eigenvalue "
        << report.min_eigenvalue;
    throw std::invalid_argument(msg.str());
  }

  // Orthonormalize the candidate states, tracking coefficients
  // w_m = sum_k coeff(m, k) v_k.
  std::vector<Eigen::VectorXcd> w;
  Eigen::MatrixXcd coeff;
  {
    Eigen::MatrixXcd basis_coeff = Eigen::MatrixXcd::Zero(n, n);
    int m = 0;
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXcd v = spec.state_set.state(k).amplitudes();
      Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
      c[k] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i < m; ++i) {
          cxd overlap = w[i].dot(v);
          v -= overlap * w[i];
          c -= overlap * basis_coeff.row(i).transpose();
        }
      }
      double r = v.norm();
      if (r < 1e-8) continue;  // linearly dependent state, spanned already
      w.push_back(v / r);
      basis_coeff.row(m) = (c / r).transpose();
      ++m;
    }
    coeff = basis_coeff.topRows(m);
  }
  const int rank_v = static_cast<int>(w.size());
  const int pairs = rank_v * rank_v;

  // Pinned success parts of the codomain pairs, expressed directly against
  // the orthonormal family: pw(m, m') = sum_k coeff(m,k) coeff(m',k)
  // sqrt(p_k) |v_k>|Sigma>|P0>. Working in this basis keeps all Gram
  // arithmetic at unit scale regardless of the state set's conditioning.
  std::vector<Eigen::VectorXcd> pinned_w(pairs, Eigen::VectorXcd::Zero(dim_h));
  for (int m = 0; m < rank_v; ++m) {
    for (int mp = 0; mp < rank_v; ++mp) {
      Eigen::VectorXcd& pw = pinned_w[static_cast<size_t>(m) * rank_v + mp];
      for (int k = 0; k < n; ++k) {
        cxd scale = coeff(m, k) * coeff(mp, k) * std::sqrt(spec.probabilities[k]);
        if (scale == cxd(0, 0)) continue;
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b)
            pw[(static_cast<long>(a) * d + b) * probe] +=
                scale * spec.state_set.state(k).amplitudes()[a] *
                spec.blank.amplitudes()[b];
      }
    }
  }

  // Failure Gram in the orthonormal pair basis: the domain pairs are
  // orthonormal, so the failure parts must supply I - Gram(pinned_w).
  Eigen::MatrixXcd residual_w = Eigen::MatrixXcd::Identity(pairs, pairs);
  for (int a = 0; a < pairs; ++a)
    for (int b = 0; b < pairs; ++b) residual_w(a, b) -= pinned_w[a].dot(pinned_w[b]);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(residual_w);
  std::vector<int> dirs;  // eigen indices, descending eigenvalue
  for (int i = pairs - 1; i >= 0; --i) {
    if (es.eigenvalues()[i] > 1e-13) dirs.push_back(i);
  }
  const int n_dirs = static_cast<int>(dirs.size());
  const long failure_slots = static_cast<long>(d) * d * (probe - 1);
  if (n_dirs > failure_slots) {
    std::ostringstream msg;
    msg << "synthesize: probe_dim " << probe << " cannot host failure rank "
        << n_dirs << "; requires probe_dim >= " << (n_dirs + d * d - 1) / (d * d) + 1;
    throw std::invalid_argument(msg.str());
  }

  // Role of each eigendirection, from which pairs load on it. For an
  // orthonormal state set the pairs coincide with the input pairs and each
  // direction lands in the sector named by its role.
  auto role_of = [&](int dir) {
    bool diag = false, low = false, high = false;
    for (int m = 0; m < rank_v; ++m) {
      for (int mp = 0; mp < rank_v; ++mp) {
        if (std::abs(es.eigenvectors()(m * rank_v + mp, dir)) <= 1e-9) continue;
        if (m == mp) diag = true;
        else if (m < mp) low = true;
        else high = true;
      }
    }
    if (diag && !low && !high) return ProbeRole::diagonal_failure;
    if (low && !diag && !high) return ProbeRole::cross_low;
    if (high && !diag && !low) return ProbeRole::cross_high;
    return ProbeRole::diagonal_failure;  // mixed directions start in P1
  };

  // Probe labels: P0 success, P1 diagonal failure, P2/P3 cross sectors,
  // anything beyond is spare capacity.
  std::vector<ProbeRole> probe_labels(probe, ProbeRole::spare);
  probe_labels[0] = ProbeRole::success;
  if (probe > 1) probe_labels[1] = ProbeRole::diagonal_failure;
  if (probe > 2) probe_labels[2] = ProbeRole::cross_low;
  if (probe > 3) probe_labels[3] = ProbeRole::cross_high;

  auto sector_of_role = [&](ProbeRole role) {
    for (int s = 1; s < probe; ++s)
      if (probe_labels[s] == role) return s;
    return 1;  // role has no sector of its own (probe_dim < 4): use P1
  };

  // Assign each eigendirection a basis slot |b>|P_s>, preferring the sector
  // matching its role and spilling deterministically to the next free slot.
  std::vector<int> used_in_sector(probe, 0);
  std::vector<long> slot_of_dir(n_dirs);
  for (int m = 0; m < n_dirs; ++m) {
    int s = sector_of_role(role_of(dirs[m]));
    while (used_in_sector[s] >= d * d) {
      s = (s % (probe - 1)) + 1;  // cycle over failure sectors 1..probe-1
    }
    long b = used_in_sector[s]++;
    slot_of_dir[m] = b * probe + s;
  }

  // Codomain pairs: pinned part plus failure coordinates from the Hermitian
  // square-root factorization of the pair-basis residual.
  std::vector<Eigen::VectorXcd> domain, codomain;
  for (int m = 0; m < rank_v; ++m) {
    for (int mp = 0; mp < rank_v; ++mp) {
      Eigen::VectorXcd dvec = Eigen::VectorXcd::Zero(dim_h);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          dvec[(static_cast<long>(a) * d + b) * probe] = w[m][a] * w[mp][b];
      domain.push_back(std::move(dvec));

      int pair_index = m * rank_v + mp;
      Eigen::VectorXcd cvec = pinned_w[pair_index];
      for (int dir = 0; dir < n_dirs; ++dir) {
        double lam = std::max(es.eigenvalues()[dirs[dir]], 0.0);
        cvec[slot_of_dir[dir]] +=
            std::sqrt(lam) * std::conj(es.eigenvectors()(pair_index, dirs[dir]));
      }
      codomain.push_back(std::move(cvec));
    }
  }

  // Symmetric orthogonalization of the codomain family absorbs the residual
  // clipped at the PSD boundary, keeping the final map unitary to machine
  // precision while perturbing each image by at most that clip.
  {
    Eigen::MatrixXcd overlap(pairs, pairs);
    for (int a = 0; a < pairs; ++a)
      for (int b = 0; b < pairs; ++b) overlap(a, b) = codomain[a].dot(codomain[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> os(overlap);
    Eigen::MatrixXcd correction =
        os.eigenvectors() *
        os.eigenvalues().cwiseMax(1e-12).cwiseSqrt().cwiseInverse().asDiagonal() *
        os.eigenvectors().adjoint();
    std::vector<Eigen::VectorXcd> polished(pairs, Eigen::VectorXcd::Zero(dim_h));
    for (int a = 0; a < pairs; ++a)
      for (int b = 0; b < pairs; ++b) polished[a] += correction(b, a) * codomain[b];
    codomain = std::move(polished);
  }

  // Complete both sides to full orthonormal bases with canonical candidates.
  std::vector<Eigen::VectorXcd> dom_basis = domain, cod_basis = codomain;
  for (long e = 0; e < dim_h; ++e) {
    Eigen::VectorXcd cand = Eigen::VectorXcd::Zero(dim_h);
    cand[e] = 1.0;
    mgs_append(dom_basis, cand, 1e-8);
  }
  for (long e = 0; e < dim_h; ++e) {
    Eigen::VectorXcd cand = Eigen::VectorXcd::Zero(dim_h);
    cand[e] = 1.0;
    mgs_append(cod_basis, cand, 1e-8);
  }
  if (static_cast<long>(dom_basis.size()) != dim_h ||
      static_cast<long>(cod_basis.size()) != dim_h) {
    throw std::runtime_error("synthesize: basis completion failed");
  }

  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim_h, dim_h);
  for (long j = 0; j < dim_h; ++j) u += cod_basis[j] * dom_basis[j].adjoint();

  OperatorMatrix unitary(std::move(u), Dims{d, d, probe}, true);
  return DeletionMachine(std::move(unitary), spec, std::move(probe_labels));
}

// --- verification ----------------------------------------------------------------

bool MachineVerification::pass(double tol) const {
  return unitarity_defect <= tol && max_probability_error <= tol &&
         max_fidelity_error <= tol && max_cross_leakage <= tol &&
         max_gram_defect <= tol;
}

MachineVerification verify_machine(const DeletionMachine& m) {
  const MachineSpec& spec = m.spec();
  const int n = spec.state_set.size();
  const int probe = spec.probe_dim;

  MachineVerification v{};
  Eigen::MatrixXcd defect =
      m.unitary().entries().adjoint() * m.unitary().entries() -
      Eigen::MatrixXcd::Identity(m.unitary().dim(), m.unitary().dim());
  v.unitarity_defect = defect.cwiseAbs().maxCoeff();

  std::vector<Ket> images;
  images.reserve(static_cast<size_t>(n) * n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) images.push_back(m.image(k, l));

  Ket probe0 = Ket::basis(0, {probe});
  for (int k = 0; k < n; ++k) {
    auto [branch, prob] = project(images[static_cast<size_t>(k) * n + k], 2, probe0, false);
    v.max_probability_error =
        std::max(v.max_probability_error, std::abs(prob - spec.probabilities[k]));
    if (spec.probabilities[k] > 1e-12) {
      Ket target = kron(spec.state_set.state(k), spec.blank);
      double fid = std::norm(inner(target, branch)) / prob;
      v.max_fidelity_error = std::max(v.max_fidelity_error, std::abs(1.0 - fid));
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      if (k == l) continue;
      auto [branch, prob] = project(images[static_cast<size_t>(k) * n + l], 2, probe0, false);
      v.max_cross_leakage = std::max(v.max_cross_leakage, prob);
    }
  }

  Eigen::MatrixXcd g = gram(spec.state_set);
  for (int a = 0; a < n * n; ++a) {
    for (int b = 0; b < n * n; ++b) {
      cxd expected = g(a / n, b / n) * g(a % n, b % n);
      v.max_gram_defect = std::max(
          v.max_gram_defect, std::abs(inner(images[a], images[b]) - expected));
    }
  }
  return v;
}

}  // namespace qdel
