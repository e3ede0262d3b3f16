#include "qdel/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qdel {

namespace {

std::vector<long> strides_for(const Dims& dims) {
  std::vector<long> strides(dims.size());
  long acc = 1;
  for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
    strides[i] = acc;
    acc *= dims[i];
  }
  return strides;
}

void decompose(long index, const Dims& dims, std::vector<int>& out) {
  out.resize(dims.size());
  for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
    out[i] = static_cast<int>(index % dims[i]);
    index /= dims[i];
  }
}

long compose(const std::vector<int>& multi, const std::vector<long>& strides) {
  long index = 0;
  for (size_t i = 0; i < multi.size(); ++i) index += multi[i] * strides[i];
  return index;
}

void check_dims(const Dims& dims, long expected_size, const char* what) {
  if (dims.empty()) throw std::invalid_argument(std::string(what) + ": empty dims");
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument(std::string(what) + ": nonpositive dim");
  }
  if (dims_product(dims) != expected_size) {
    throw std::invalid_argument(std::string(what) +
                                ": product of dims does not match size");
  }
}

void check_permutation(const std::vector<int>& order, size_t n) {
  if (order.size() != n) throw std::invalid_argument("permutation: wrong length");
  std::vector<bool> seen(n, false);
  for (int v : order) {
    if (v < 0 || static_cast<size_t>(v) >= n || seen[v]) {
      throw std::invalid_argument("permutation: not a permutation of 0..n-1");
    }
    seen[v] = true;
  }
}

}  // namespace

long dims_product(const Dims& dims) {
  long acc = 1;
  for (int d : dims) acc *= d;
  return acc;
}

// --- Ket ----------------------------------------------------------------

Ket::Ket(Eigen::VectorXcd amps, Dims dims, double weight, bool subnormalized)
    : amps_(std::move(amps)), dims_(std::move(dims)), weight_(weight),
      subnormalized_(subnormalized) {}

Ket Ket::normalized(Eigen::VectorXcd amplitudes, Dims dims) {
  check_dims(dims, amplitudes.size(), "Ket");
  double norm = amplitudes.norm();
  if (norm < 1e-14) throw std::invalid_argument("Ket: zero vector");
  amplitudes /= norm;
  return Ket(std::move(amplitudes), std::move(dims), 1.0, false);
}

Ket Ket::unit(Eigen::VectorXcd amplitudes, Dims dims) {
  check_dims(dims, amplitudes.size(), "Ket");
  if (std::abs(amplitudes.norm() - 1.0) > kNormTol) {
    throw std::invalid_argument("Ket::unit: norm differs from 1 beyond 1e-12");
  }
  return Ket(std::move(amplitudes), std::move(dims), 1.0, false);
}

Ket Ket::subnormalized(Eigen::VectorXcd amplitudes, Dims dims) {
  check_dims(dims, amplitudes.size(), "Ket");
  double w = amplitudes.squaredNorm();
  if (w > 1.0 + 1e-9) throw std::invalid_argument("Ket: subnormalized weight > 1");
  return Ket(std::move(amplitudes), std::move(dims), w, true);
}

Ket Ket::basis(long index, Dims dims) {
  long n = dims_product(dims);
  if (index < 0 || index >= n) throw std::out_of_range("Ket::basis: index out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
  v[index] = 1.0;
  return Ket(std::move(v), std::move(dims), 1.0, false);
}

// --- OperatorMatrix -------------------------------------------------------

OperatorMatrix::OperatorMatrix(Eigen::MatrixXcd entries, Dims dims, bool assert_unitary)
    : entries_(std::move(entries)), dims_(std::move(dims)) {
  if (entries_.rows() != entries_.cols()) {
    throw std::invalid_argument("OperatorMatrix: not square");
  }
  check_dims(dims_, entries_.rows(), "OperatorMatrix");
  if (assert_unitary) {
    Eigen::MatrixXcd defect =
        entries_.adjoint() * entries_ - Eigen::MatrixXcd::Identity(entries_.rows(), entries_.cols());
    if (defect.cwiseAbs().maxCoeff() > kHermTol) {
      throw std::invalid_argument("OperatorMatrix: unitary flag set but U†U != I at 1e-10");
    }
    unitary_flag_ = true;
  }
}

OperatorMatrix OperatorMatrix::identity(Dims dims) {
  long n = dims_product(dims);
  return OperatorMatrix(Eigen::MatrixXcd::Identity(n, n), std::move(dims), true);
}

// --- DensityMatrix --------------------------------------------------------

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries, Dims dims, double weight)
    : entries_(std::move(entries)), dims_(std::move(dims)), weight_(weight) {
  if (entries_.rows() != entries_.cols()) {
    throw std::invalid_argument("DensityMatrix: not square");
  }
  check_dims(dims_, entries_.rows(), "DensityMatrix");
  if (weight_ < -kHermTol || weight_ > 1.0 + 1e-8) {
    throw std::invalid_argument("DensityMatrix: weight outside [0, 1]");
  }
  if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > kHermTol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian at 1e-10");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTol) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond 1e-10");
  }
  if (std::abs(entries_.trace().real() - weight_) > kHermTol ||
      std::abs(entries_.trace().imag()) > kHermTol) {
    throw std::invalid_argument("DensityMatrix: trace does not equal weight at 1e-10");
  }
}

DensityMatrix DensityMatrix::from_ket(const Ket& psi) {
  Eigen::MatrixXcd m = psi.amplitudes() * psi.amplitudes().adjoint();
  return DensityMatrix(std::move(m), psi.dims(), psi.amplitudes().squaredNorm());
}

DensityMatrix DensityMatrix::add(const DensityMatrix& other) const {
  if (dims_ != other.dims_) throw std::invalid_argument("DensityMatrix::add: dims mismatch");
  return DensityMatrix(entries_ + other.entries_, dims_, weight_ + other.weight_);
}

// --- BasisPair -------------------------------------------------------------

Ket BasisPair::psi() const {
  Eigen::VectorXcd v(2);
  v << std::cos(theta_), std::sin(theta_);
  return Ket::unit(std::move(v), {2});
}

Ket BasisPair::psi_bar() const {
  Eigen::VectorXcd v(2);
  if (theta_ == 0.0) {
    v << 0.0, 1.0;
  } else {
    v << std::sin(theta_), -std::cos(theta_);
  }
  return Ket::unit(std::move(v), {2});
}

// --- tensor algebra ---------------------------------------------------------

Ket kron(const Ket& a, const Ket& b) {
  Eigen::VectorXcd out(a.dim() * b.dim());
  for (long i = 0; i < a.dim(); ++i) {
    out.segment(i * b.dim(), b.dim()) = a.amplitudes()[i] * b.amplitudes();
  }
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return (a.is_subnormalized() || b.is_subnormalized())
             ? Ket::subnormalized(std::move(out), std::move(dims))
             : Ket::normalized(std::move(out), std::move(dims));
}

OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b) {
  long na = a.dim(), nb = b.dim();
  Eigen::MatrixXcd out(na * nb, na * nb);
  for (long i = 0; i < na; ++i)
    for (long j = 0; j < na; ++j)
      out.block(i * nb, j * nb, nb, nb) = a.entries()(i, j) * b.entries();
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return OperatorMatrix(std::move(out), std::move(dims),
                        a.unitary_flag() && b.unitary_flag());
}

Ket permute_subsystems(const Ket& psi, const std::vector<int>& order) {
  check_permutation(order, psi.dims().size());
  Dims out_dims(order.size());
  for (size_t i = 0; i < order.size(); ++i) out_dims[i] = psi.dims()[order[i]];
  auto in_strides = strides_for(psi.dims());
  Eigen::VectorXcd out(psi.dim());
  std::vector<int> out_multi, in_multi(order.size());
  for (long idx = 0; idx < psi.dim(); ++idx) {
    decompose(idx, out_dims, out_multi);
    for (size_t i = 0; i < order.size(); ++i) in_multi[order[i]] = out_multi[i];
    out[idx] = psi.amplitudes()[compose(in_multi, in_strides)];
  }
  return psi.is_subnormalized() ? Ket::subnormalized(std::move(out), std::move(out_dims))
                                : Ket::normalized(std::move(out), std::move(out_dims));
}

DensityMatrix permute_subsystems(const DensityMatrix& rho, const std::vector<int>& order) {
  check_permutation(order, rho.dims().size());
  Dims out_dims(order.size());
  for (size_t i = 0; i < order.size(); ++i) out_dims[i] = rho.dims()[order[i]];
  auto in_strides = strides_for(rho.dims());
  long n = rho.dim();
  std::vector<long> map(n);
  std::vector<int> out_multi, in_multi(order.size());
  for (long idx = 0; idx < n; ++idx) {
    decompose(idx, out_dims, out_multi);
    for (size_t i = 0; i < order.size(); ++i) in_multi[order[i]] = out_multi[i];
    map[idx] = compose(in_multi, in_strides);
  }
  Eigen::MatrixXcd out(n, n);
  for (long r = 0; r < n; ++r)
    for (long c = 0; c < n; ++c) out(r, c) = rho.entries()(map[r], map[c]);
  return DensityMatrix(std::move(out), std::move(out_dims), rho.weight());
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  const int n_sub = static_cast<int>(rho.dims().size());
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  std::vector<bool> kept(n_sub, false);
  for (int k : keep) {
    if (k < 0 || k >= n_sub) throw std::invalid_argument("partial_trace: bad subsystem index");
    if (kept[k]) throw std::invalid_argument("partial_trace: duplicate subsystem index");
    kept[k] = true;
  }
  std::vector<int> traced;
  for (int i = 0; i < n_sub; ++i)
    if (!kept[i]) traced.push_back(i);

  Dims keep_dims, trace_dims;
  for (int k : keep) keep_dims.push_back(rho.dims()[k]);
  for (int t : traced) trace_dims.push_back(rho.dims()[t]);

  auto in_strides = strides_for(rho.dims());
  long nk = dims_product(keep_dims);
  long nt = trace_dims.empty() ? 1 : dims_product(trace_dims);

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nk, nk);
  std::vector<int> km_r, km_c, tm, full_r(n_sub), full_c(n_sub);
  for (long t = 0; t < nt; ++t) {
    if (!trace_dims.empty()) decompose(t, trace_dims, tm);
    for (long r = 0; r < nk; ++r) {
      decompose(r, keep_dims, km_r);
      for (size_t i = 0; i < keep.size(); ++i) full_r[keep[i]] = km_r[i];
      for (size_t i = 0; i < traced.size(); ++i) full_r[traced[i]] = tm[i];
      long row = compose(full_r, in_strides);
      for (long c = 0; c < nk; ++c) {
        decompose(c, keep_dims, km_c);
        for (size_t i = 0; i < keep.size(); ++i) full_c[keep[i]] = km_c[i];
        for (size_t i = 0; i < traced.size(); ++i) full_c[traced[i]] = tm[i];
        out(r, c) += rho.entries()(row, compose(full_c, in_strides));
      }
    }
  }
  return DensityMatrix(std::move(out), std::move(keep_dims), rho.weight());
}

ProjectionResult project(const Ket& psi, int subsystem, const Ket& onto,
                         bool keep_subsystem) {
  const int n_sub = psi.subsystem_count();
  if (subsystem < 0 || subsystem >= n_sub) {
    throw std::invalid_argument("project: bad subsystem index");
  }
  if (onto.dims().size() != 1 || onto.dims()[0] != psi.dims()[subsystem]) {
    throw std::invalid_argument("project: onto dimension does not match subsystem");
  }
  const int d_sub = psi.dims()[subsystem];

  Dims rest_dims;
  std::vector<int> rest_subs;
  for (int i = 0; i < n_sub; ++i) {
    if (i != subsystem) {
      rest_dims.push_back(psi.dims()[i]);
      rest_subs.push_back(i);
    }
  }
  bool scalar_rest = rest_dims.empty();
  long n_rest = scalar_rest ? 1 : dims_product(rest_dims);

  auto in_strides = strides_for(psi.dims());
  Eigen::VectorXcd contracted = Eigen::VectorXcd::Zero(n_rest);
  std::vector<int> rm, full(n_sub);
  for (long r = 0; r < n_rest; ++r) {
    if (!scalar_rest) decompose(r, rest_dims, rm);
    for (size_t i = 0; i < rest_subs.size(); ++i) full[rest_subs[i]] = rm[i];
    cxd acc = 0.0;
    for (int m = 0; m < d_sub; ++m) {
      full[subsystem] = m;
      acc += std::conj(onto.amplitudes()[m]) * psi.amplitudes()[compose(full, in_strides)];
    }
    contracted[r] = acc;
  }
  double probability = contracted.squaredNorm();

  if (!keep_subsystem) {
    Dims out_dims = scalar_rest ? Dims{1} : rest_dims;
    return {Ket::subnormalized(std::move(contracted), std::move(out_dims)), probability};
  }

  // Keep the subsystem, re-embedded in state |onto>.
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.dim());
  for (long r = 0; r < n_rest; ++r) {
    if (!scalar_rest) decompose(r, rest_dims, rm);
    for (size_t i = 0; i < rest_subs.size(); ++i) full[rest_subs[i]] = rm[i];
    for (int m = 0; m < d_sub; ++m) {
      full[subsystem] = m;
      out[compose(full, in_strides)] = contracted[r] * onto.amplitudes()[m];
    }
  }
  return {Ket::subnormalized(std::move(out), psi.dims()), probability};
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("trace_distance: dims mismatch");
  if (std::abs(a.weight() - b.weight()) > 1e-8) {
    throw std::invalid_argument("trace_distance: weight mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.entries() - b.entries(),
                                                     Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

bool is_unitary(const OperatorMatrix& u, double tol) {
  Eigen::MatrixXcd defect =
      u.entries().adjoint() * u.entries() -
      Eigen::MatrixXcd::Identity(u.dim(), u.dim());
  return defect.cwiseAbs().maxCoeff() <= tol;
}

cxd inner(const Ket& a, const Ket& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("inner: dims mismatch");
  return a.amplitudes().dot(b.amplitudes());  // Eigen dot conjugates the left side
}

double fidelity(const Ket& a, const Ket& b) { return std::norm(inner(a, b)); }

Ket apply_to_subsystems(const OperatorMatrix& u, const Ket& psi,
                        const std::vector<int>& targets) {
  const int n_sub = psi.subsystem_count();
  std::vector<bool> is_target(n_sub, false);
  Dims target_dims;
  for (int t : targets) {
    if (t < 0 || t >= n_sub) throw std::invalid_argument("apply_to_subsystems: bad index");
    if (is_target[t]) throw std::invalid_argument("apply_to_subsystems: duplicate index");
    is_target[t] = true;
    target_dims.push_back(psi.dims()[t]);
  }
  if (target_dims != u.dims()) {
    throw std::invalid_argument("apply_to_subsystems: operator dims do not match targets");
  }

  // Permute targets to the least significant positions, multiply, permute back.
  std::vector<int> order;
  for (int i = 0; i < n_sub; ++i)
    if (!is_target[i]) order.push_back(i);
  order.insert(order.end(), targets.begin(), targets.end());

  Ket moved = permute_subsystems(psi, order);
  long du = u.dim();
  long n_rest = psi.dim() / du;
  using RowMat = Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> in_mat(moved.amplitudes().data(), n_rest, du);
  RowMat out_mat = in_mat * u.entries().transpose();
  Eigen::VectorXcd out = Eigen::Map<Eigen::VectorXcd>(out_mat.data(), psi.dim());

  std::vector<int> inverse(n_sub);
  for (int i = 0; i < n_sub; ++i) inverse[order[i]] = i;
  Ket result = psi.is_subnormalized()
                   ? Ket::subnormalized(std::move(out), moved.dims())
                   : Ket::normalized(std::move(out), moved.dims());
  return permute_subsystems(result, inverse);
}

}  // namespace qdel
