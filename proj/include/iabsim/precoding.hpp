#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace iabsim {

using ComplexMatrix = Eigen::MatrixXcd;

/// Gram matrices with a condition number above this are treated as singular.
inline constexpr double kMaxGramCondition = 1e12;

class SingularChannelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * \brief gNB zero-forcing beamformer and its power diagonal.
 *
 * Column m of `beams` is v_m. With H * V = I the useful amplitude at
 * reception point m is 1, so power_diag[m] is the useful received power at m
 * and the radiated power is sum_m power_diag[m] * ||v_m||^2.
 */
struct Precoder {
  ComplexMatrix beams;              // N_tx x M
  std::vector<double> power_diag;   // M

  std::vector<double> costs() const;
  double transmit_power() const;
};

/// Right pseudo-inverse H^* (H H^*)^{-1} of an M x N channel (rows = reception points).
ComplexMatrix build_lzfbf(const ComplexMatrix& h);

/// ||column m||^2 for every column.
std::vector<double> beam_cost(const ComplexMatrix& v);

/// Tr(P V^* V) = sum_m power[m] * cost[m].
double trace_power(std::span<const double> power, std::span<const double> costs);

/// Uniformly scales `power` down so that the trace meets `p_max` when it is exceeded.
std::vector<double> enforce_budget(std::span<const double> power, std::span<const double> costs,
                                   double p_max);

}  // namespace iabsim
