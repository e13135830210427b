#pragma once

#include "qkfe/circuit.hpp"
#include "qkfe/model.hpp"
#include "qkfe/rng.hpp"

#include <vector>

namespace qkfe {

enum class AmplifyKind { RepeatCz, Subset, AnalogueFold };

/// RepeatCz: every CZ becomes `repeat` CZs (odd). Subset: the CZs at the
/// listed positions (0-based, counted in circuit order) are tripled.
/// AnalogueFold: each analogue block e^{-iHt} becomes
///   Q e^{-iHt/2} P e^{-iHt/2} P Q e^{-iHt}
/// in time order, with P anticommuting and Q commuting with H, which doubles
/// the evolution time and nets the original block.
struct AmplifySchedule {
  AmplifyKind kind = AmplifyKind::RepeatCz;
  int repeat = 3;
  std::vector<int> positions;
  std::vector<PauliOp> fold_p;
  std::vector<PauliOp> fold_q;
};

struct AmplifiedCircuit {
  Circuit circuit;
  double r_eff = 1.0;
};

AmplifiedCircuit amplify_noise(const Circuit& c, const AmplifySchedule& schedule);

/// (N_c + 2k) / N_c.
double subset_r_eff(int num_cz, int tripled);

/// k distinct positions out of n, ascending.
std::vector<int> random_subset(int n, int k, Rng& rng);

/// Fold layers for h: P runs over the two anticommuting sublattice patterns
/// and Q over {idle, global symmetry}; `count` of the four are returned.
std::vector<AmplifySchedule> fold_variants(const HamiltonianSpec& h, int count);

}  // namespace qkfe
