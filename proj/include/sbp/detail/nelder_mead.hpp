#ifndef SBP_DETAIL_NELDER_MEAD_HPP
#define SBP_DETAIL_NELDER_MEAD_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace sbp {

template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, double step, int max_evals, double ftol) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> s(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) s[i + 1][i] += step;
  std::vector<double> fv(n + 1);
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(s[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> c(n), xr(n), xe(n), xc(n);
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::abs(fv[worst] - fv[best]) <= ftol * (std::abs(fv[best]) + ftol)) {
      double spread = 0.0;
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t k = 0; k < n; ++k) spread = std::max(spread, std::abs(s[i][k] - s[best][k]));
      if (spread < 1e-10) break;
    }
    std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) c[k] += s[i][k] / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) xr[k] = c[k] + (c[k] - s[worst][k]);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      for (std::size_t k = 0; k < n; ++k) xe[k] = c[k] + 2.0 * (c[k] - s[worst][k]);
      const double fe = eval(xe);
      if (fe < fr) {
        s[worst] = xe;
        fv[worst] = fe;
      } else {
        s[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      s[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    for (std::size_t k = 0; k < n; ++k)
      xc[k] = outside ? c[k] + 0.5 * (xr[k] - c[k]) : c[k] + 0.5 * (s[worst][k] - c[k]);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      s[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) s[i][k] = s[best][k] + 0.5 * (s[i][k] - s[best][k]);
      fv[i] = eval(s[i]);
    }
  }
  const auto it = std::min_element(fv.begin(), fv.end());
  const auto bi = static_cast<std::size_t>(it - fv.begin());
  return {s[bi], fv[bi], evals};
}

}  // namespace sbp

#endif  // SBP_DETAIL_NELDER_MEAD_HPP
