// Dense complex linear algebra over small labelled tensor-product Hilbert
// spaces: kets, operators, density matrices, tensor products, subsystem
// permutation, partial trace, projective measurement, distance measures.
//
// Indexing convention (used everywhere): amplitudes are indexed by the
// mixed-radix expansion of the linear index with subsystem 0 as the most
// significant digit. For dims (d0, d1, ..., dn-1) the linear index of the
// multi-index (i0, i1, ..., in-1) is ((i0*d1 + i1)*d2 + i2)*...

#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qdel {

using cxd = std::complex<double>;
using Dims = std::vector<int>;

inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;

long dims_product(const Dims& dims);

// State vector over a labelled tensor factorization. Immutable after
// construction. `weight()` is the squared norm: 1 for states built through
// the normalizing path, the branch probability for subnormalized branches.
class Ket {
 public:
  // Normalizing constructor: rejects the zero vector, divides by the norm.
  static Ket normalized(Eigen::VectorXcd amplitudes, Dims dims);
  // Amplitudes kept verbatim; requires |norm - 1| <= 1e-12.
  static Ket unit(Eigen::VectorXcd amplitudes, Dims dims);
  // Keeps amplitudes as given; weight is their squared norm (must be <= 1 + 1e-9).
  static Ket subnormalized(Eigen::VectorXcd amplitudes, Dims dims);
  // Computational basis vector |index> over the given factorization.
  static Ket basis(long index, Dims dims);

  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  const Dims& dims() const { return dims_; }
  long dim() const { return amps_.size(); }
  int subsystem_count() const { return static_cast<int>(dims_.size()); }
  double weight() const { return weight_; }
  bool is_subnormalized() const { return subnormalized_; }

 private:
  Ket(Eigen::VectorXcd amps, Dims dims, double weight, bool subnormalized);

  Eigen::VectorXcd amps_;
  Dims dims_;
  double weight_ = 1.0;
  bool subnormalized_ = false;
};

// Square operator over a labelled tensor factorization; row and column
// factorizations are identical. The unitary flag, when set at construction,
// asserts U†U = I within 1e-10.
class OperatorMatrix {
 public:
  OperatorMatrix(Eigen::MatrixXcd entries, Dims dims, bool assert_unitary = false);

  static OperatorMatrix identity(Dims dims);

  const Eigen::MatrixXcd& entries() const { return entries_; }
  const Dims& dims() const { return dims_; }
  long dim() const { return entries_.rows(); }
  bool unitary_flag() const { return unitary_flag_; }

 private:
  Eigen::MatrixXcd entries_;
  Dims dims_;
  bool unitary_flag_ = false;
};

// Positive semidefinite matrix over a labelled tensor factorization with an
// explicit weight: trace == weight, weight == 1 for unconditional states,
// weight < 1 for intentionally subnormalized branches.
class DensityMatrix {
 public:
  DensityMatrix(Eigen::MatrixXcd entries, Dims dims, double weight = 1.0);

  static DensityMatrix from_ket(const Ket& psi);

  const Eigen::MatrixXcd& entries() const { return entries_; }
  const Dims& dims() const { return dims_; }
  long dim() const { return entries_.rows(); }
  double weight() const { return weight_; }

  // Weighted mixture: entries and weights add.
  DensityMatrix add(const DensityMatrix& other) const;

 private:
  Eigen::MatrixXcd entries_;
  Dims dims_;
  double weight_;
};

// Qubit basis {|psi>, |psi_bar>} at rotation angle theta from the reference
// computational basis:
//   psi(theta)     = cos(theta)|0> + sin(theta)|1>
//   psi_bar(theta) = sin(theta)|0> - cos(theta)|1>   (theta != 0)
// At theta == 0 the pair is the reference basis itself, psi_bar = |1>. The
// sign difference against the theta->0 limit of the formula is a global
// phase on the partner vector; all physical comparisons are fidelity-based.
class BasisPair {
 public:
  explicit BasisPair(double theta) : theta_(theta) {}

  double theta() const { return theta_; }
  Ket psi() const;
  Ket psi_bar() const;

 private:
  double theta_;
};

// --- tensor algebra ----------------------------------------------------

Ket kron(const Ket& a, const Ket& b);
OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b);

// Reindex so that subsystem i of the output is subsystem order[i] of the
// input. `order` must be a permutation of 0..n-1.
Ket permute_subsystems(const Ket& psi, const std::vector<int>& order);
DensityMatrix permute_subsystems(const DensityMatrix& rho, const std::vector<int>& order);

// Trace out every subsystem not listed in `keep`. Kept subsystems appear in
// the order given; passing 0..n-1 returns the input unchanged. Weight is
// preserved.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

struct ProjectionResult {
  Ket branch;          // subnormalized, weight == probability
  double probability;  // squared norm of the branch
};

// Apply <onto| to one subsystem. With keep_subsystem false the subsystem is
// removed from the factorization; with true it is kept in state |onto>.
ProjectionResult project(const Ket& psi, int subsystem, const Ket& onto,
                         bool keep_subsystem = false);

// Half the sum of absolute eigenvalues of a - b. Requires equal dims and
// equal weight (within 1e-8).
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// True iff max-abs entry of U†U - I is <= tol.
bool is_unitary(const OperatorMatrix& u, double tol);

// <a|b> over identical factorizations.
cxd inner(const Ket& a, const Ket& b);

// |<a|b>|^2, the phase-insensitive pure-state comparison.
double fidelity(const Ket& a, const Ket& b);

// Apply `u` to the listed subsystems (in the listed order, which must match
// u's factorization) and leave the rest untouched.
Ket apply_to_subsystems(const OperatorMatrix& u, const Ket& psi,
                        const std::vector<int>& targets);

}  // namespace qdel
