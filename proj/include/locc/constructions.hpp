#pragma once

#include "locc/operators.hpp"
#include "locc/tree.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace locc {

long long smallest_prime_above(long long n);

// Parameters of the phase-state family: place values p_α are mixed-radix
// (p_1 = 1, p_α = d_1…d_{α−1}), D = Πd_α, and N is the smallest prime
// above D unless overridden.
struct AppendixAParams {
  std::vector<int> dims;
  long long d_total = 0;
  long long n_outcomes = 0;
  std::vector<long long> place_values;
};
AppendixAParams appendix_a_params(const std::vector<int>& dims,
                                  std::optional<long long> prime_override = {});

// N equal-weight products of phase states ψ_j^(α) = Σ_m e^{2πi·j·p_α·m/N}|m⟩/√d_α.
// Sums to the identity because every value Σ_α p_α m_α with 0 ≤ m_α < d_α
// is distinct (and N exceeds them all); N prime keeps the states of each
// party pairwise non-proportional, so every party contributes N extreme
// rays. Throws std::invalid_argument when the override is not a prime > D.
SeparableOperation appendix_a_sep(const std::vector<int>& dims,
                                  std::optional<long long> prime_override = {},
                                  const Tolerances& tols = {});

// Depth-P qubit protocol saturating the bound: party α measures at every
// level-α node with its own rank-one projector pair {|ξ⟩⟨ξ|, I−|ξ⟩⟨ξ|}.
// States of one party are resampled until pairwise overlaps stay clear of
// 0 and 1, so all 2^α labels are distinct extreme rays.
LoccTree appendix_d_tree(int parties, uint64_t seed);

// Drops the right-most k last-party measurements, turning those nodes into
// leaves. Keeps the certificate saturated: the k merged outcomes trade 2k
// extreme rays for one non-extreme identity class. Requires
// 0 ≤ k ≤ (#last-party measurements) − 1.
LoccTree appendix_d_omit(const LoccTree& t, int k);

// Two-qutrit orthonormal product basis of nine states (the domino states):
// |1,1⟩, |0,0±1⟩, |2,1±2⟩, |1±2,0⟩, |0±1,2⟩. Each party shows seven
// distinct rank-one rays, so the certificate is satisfied with margin −2
// even though the basis is known not to be exactly LOCC-implementable.
SeparableOperation domino_fixture(const Tolerances& tols = {});

}  // namespace locc
