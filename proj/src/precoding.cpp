#include "iabsim/precoding.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace iabsim {

ComplexMatrix build_lzfbf(const ComplexMatrix& h) {
  const auto m = h.rows();
  const auto n = h.cols();
  if (m == 0) throw std::invalid_argument("channel matrix has no rows");
  if (m > n) {
    std::ostringstream os;
    os << "zero-forcing needs at least as many antennas as reception points (" << m << " > "
       << n << ")";
    throw std::invalid_argument(os.str());
  }
  const ComplexMatrix gram = h * h.adjoint();
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxGramCondition) {
    std::ostringstream os;
    os << "channel matrix is rank deficient (Gram condition number " << (lo > 0.0 ? hi / lo : 0.0)
       << ")";
    throw SingularChannelError(os.str());
  }
  const ComplexMatrix identity = ComplexMatrix::Identity(m, m);
  return h.adjoint() * gram.ldlt().solve(identity);
}

std::vector<double> beam_cost(const ComplexMatrix& v) {
  std::vector<double> out(static_cast<std::size_t>(v.cols()));
  for (Eigen::Index c = 0; c < v.cols(); ++c) out[static_cast<std::size_t>(c)] = v.col(c).squaredNorm();
  return out;
}

double trace_power(std::span<const double> power, std::span<const double> costs) {
  if (power.size() != costs.size()) throw std::invalid_argument("power/cost length mismatch");
  double total = 0.0;
  for (std::size_t m = 0; m < power.size(); ++m) total += power[m] * costs[m];
  return total;
}

std::vector<double> enforce_budget(std::span<const double> power, std::span<const double> costs,
                                   double p_max) {
  for (double p : power) {
    if (p < 0.0) throw std::invalid_argument("power entries must be non-negative");
  }
  std::vector<double> out(power.begin(), power.end());
  const double total = trace_power(power, costs);
  if (total <= p_max) return out;
  const double scale = p_max / total;
  for (double& p : out) p *= scale;
  // rounding in the product can leave the trace a few ulps above the budget
  while (trace_power(out, costs) > p_max) {
    for (double& p : out) p = std::nextafter(p, 0.0);
  }
  return out;
}

std::vector<double> Precoder::costs() const { return beam_cost(beams); }

double Precoder::transmit_power() const { return trace_power(power_diag, costs()); }

}  // namespace iabsim
