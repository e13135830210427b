#pragma once

#include "qkfe/circuit.hpp"
#include "qkfe/noise.hpp"
#include "qkfe/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace qkfe {

/// Largest register for which noisy circuits are run as density matrices.
inline constexpr int kDensityLimit = 10;

/// Exact outcome table of the circuit on |0...0>. Noiseless circuits (and
/// circuits whose only noise is the global channel) run on a statevector,
/// anything else on a density matrix.
Eigen::VectorXd exact_distribution(const Circuit& c, const NoiseModel& noise);

/// One noisy trajectory from |0...0> with Pauli insertions drawn from rng.
StateVector run_trajectory(const Circuit& c, const NoiseModel& noise, Rng& rng);

/// Computational-basis outcomes. Noiseless circuits are simulated once and
/// sampled; noisy circuits use one fresh trajectory per shot.
std::vector<std::uint64_t> sample_outcomes(const Circuit& c, const NoiseModel& noise, int shots, Rng& rng);

}  // namespace qkfe
