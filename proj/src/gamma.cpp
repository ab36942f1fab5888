#include "smatch/gamma.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace smatch {

void GammaSchedule::validate(std::int64_t total_supply) const {
  const int l0 = root_level();
  if (l0 < 0) throw std::invalid_argument("gamma schedule: empty");
  const double scale = std::ldexp(1.0, -d);
  for (int l = 0; l <= l0; ++l) {
    double g = gammas[static_cast<std::size_t>(l)];
    if (g < 0.0)
      throw std::invalid_argument("gamma schedule: gamma_" + std::to_string(l) +
                                  " negative");
    if (l < l0 && g > gammas[static_cast<std::size_t>(l + 1)] * scale + 1e-9)
      throw std::invalid_argument("gamma schedule: gamma_" + std::to_string(l) +
                                  " exceeds 2^-d gamma_" + std::to_string(l + 1));
  }
  if (total_supply >= 0 && gammas[static_cast<std::size_t>(l0)] >=
                               static_cast<double>(total_supply))
    throw std::invalid_argument("gamma schedule: root threshold >= supply");
}

namespace {

GammaSchedule derive(int d, std::vector<double> gammas, double beta) {
  GammaSchedule s;
  s.d = d;
  s.beta = beta;
  s.gammas = std::move(gammas);
  const int l0 = s.root_level();
  const double scale = std::ldexp(1.0, -d);
  s.lower_bounds.resize(s.gammas.size());
  for (int l = 0; l <= l0; ++l)
    s.lower_bounds[static_cast<std::size_t>(l)] = static_cast<std::int64_t>(
        std::floor(s.gammas[static_cast<std::size_t>(l)]));
  s.etas.resize(static_cast<std::size_t>(l0));
  s.upper_bounds.resize(static_cast<std::size_t>(l0));
  for (int l = 0; l < l0; ++l) {
    double eta = s.gammas[static_cast<std::size_t>(l + 1)] * scale;
    s.etas[static_cast<std::size_t>(l)] = eta;
    s.upper_bounds[static_cast<std::size_t>(l)] =
        static_cast<std::int64_t>(std::ceil(eta)) - 1;
  }
  return s;
}

}  // namespace

GammaSchedule gamma_schedule_zero(int d, int l0) {
  if (l0 < 0) throw std::invalid_argument("gamma_schedule_zero: l0 < 0");
  return derive(d, std::vector<double>(static_cast<std::size_t>(l0 + 1), 0.0),
                0.0);
}

GammaSchedule gamma_schedule_fully_dynamic(int d, std::int64_t m, int l0,
                                           double beta) {
  if (l0 < 0) throw std::invalid_argument("gamma schedule: l0 < 0");
  if (m < 2) throw std::invalid_argument("gamma schedule: m < 2");
  std::vector<double> gammas(static_cast<std::size_t>(l0 + 1));
  // Backward partial sums: S_l = beta^l + 2^{-d} S_{l+1}.
  double tail = 0.0;
  const double scale = std::ldexp(1.0, -d);
  for (int l = l0; l >= 0; --l) {
    tail = std::pow(beta, l) + scale * tail;
    double mass = static_cast<double>(m) * std::ldexp(1.0, -(l0 - l) * d);
    gammas[static_cast<std::size_t>(l)] = mass - tail;
    if (gammas[static_cast<std::size_t>(l)] < 0.0)
      throw std::invalid_argument(
          "gamma schedule: gamma_" + std::to_string(l) +
          " negative; m too small for l0=" + std::to_string(l0) +
          ", beta=" + std::to_string(beta));
  }
  GammaSchedule s = derive(d, std::move(gammas), beta);
  s.validate(m);
  return s;
}

int default_l0_fully_dynamic(int d, std::int64_t m) {
  if (d < 1) throw std::invalid_argument("default_l0: d < 1");
  if (m < 2) throw std::invalid_argument("default_l0: m < 2");
  double cap = (d >= 2) ? static_cast<double>(m) / 4.0
                        : static_cast<double>(m) /
                              (1.0 + std::log2(static_cast<double>(m)));
  int l0 = 0;
  while (std::ldexp(1.0, (l0 + 1) * d) <= cap) ++l0;
  if (std::ldexp(1.0, l0 * d) > cap) return 0;  // m too small: single cell
  return l0;
}

int default_l0_semi_dynamic(int d, std::int64_t n_periods) {
  if (d < 1) throw std::invalid_argument("default_l0: d < 1");
  if (n_periods < 1) throw std::invalid_argument("default_l0: N < 1");
  int l0 = 0;
  while (std::ldexp(1.0, (l0 + 1) * d) <= static_cast<double>(n_periods)) ++l0;
  return l0;
}

double default_beta(int d) { return d == 1 ? 2.0 : 2.01; }

}  // namespace smatch
