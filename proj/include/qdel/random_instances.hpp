// Seeded random instance builders shared by the sweep/bound commands and the
// randomized test suites. Everything is a pure function of the generator
// state, so a fixed seed reproduces a run exactly.

#pragma once

#include "qdel/bounds.hpp"
#include "qdel/machine.hpp"
#include "qdel/rng.hpp"

namespace qdel {

// Haar-ish random ket: complex standard normal amplitudes, normalized.
Ket random_ket(SplitMix64& rng, int dim);

// Random unitary: MGS orthonormalization of random Gaussian columns.
OperatorMatrix random_unitary(SplitMix64& rng, Dims dims);

// n random states in the given dimension, redrawn until linearly
// independent with every pairwise overlap magnitude <= max_overlap.
StateSet random_independent_set(SplitMix64& rng, int n, int dim, double max_overlap);

// Random probability vector scaled (by halving) into the feasible region.
std::vector<double> random_feasible_probabilities(SplitMix64& rng, const StateSet& set,
                                                  int probe_dim = 4);

// Two unit states with a fixed real overlap, optionally randomly rotated.
StateSet overlap_pair(double overlap, int dim = 2);

// n equi-overlap unit states (every pairwise inner product = overlap),
// realized through the Hermitian square root of the target Gram matrix.
StateSet equi_overlap_set(int n, double overlap);

// Ensemble with computational-basis Alice states and the given Bob states.
BipartiteEnsemble ensemble_for(StateSet bob_states);

// Random ensemble: Bob states drawn in dimension bob_dim with pairwise
// overlaps <= max_overlap.
BipartiteEnsemble random_ensemble(SplitMix64& rng, int n, int bob_dim, double max_overlap);

}  // namespace qdel
