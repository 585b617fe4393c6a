// Simulates a linear trend that breaks halfway and runs the scan on it.

#include <cstdio>

#include "polybreak/polybreak.hpp"

int main() {
  using namespace polybreak;
  const int n = 200;
  Vector<double> before(2), after(2);
  before << 1.0, 1.0;
  after << 0.0, 0.0;
  const auto model = ChangeModel::single_change(before, after, n / 2);
  const Sample sample = generate(n, model, ErrorModel{}, 7);

  const ScanResult res = t_hat(sample, ScanRange::paper_default(n, 1));
  const GammaChoice gamma = default_gamma(1);
  const double crit = critical_value({n, 1, gamma.value, 0.05});
  std::printf("T = %.4f  k_hat = %d  c(0.05) = %.4f  p = %.4g  %s\n", res.statistic, res.k_hat, crit,
              p_value(res.statistic, n, 1, gamma.value), res.statistic > crit ? "reject" : "accept");

  const VariantResults v = t_variants(sample, ScanRange::paper_default(n, 1));
  std::printf("T1 = %.4f  T2 = %.4f  T3 = %.4f\n", v.t1.statistic, v.t2.statistic, v.t3.statistic);
  return 0;
}
