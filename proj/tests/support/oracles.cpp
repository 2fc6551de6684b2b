#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace oracle {

oim::TabularMdp random_mdp(oim::Rng& rng, std::size_t n_states, std::size_t n_actions,
                           double gamma, double r0_max) {
  std::vector<double> p(n_states * n_actions * n_states, 0.0), r(p.size(), 0.0);
  for (std::size_t x = 0; x < n_states; ++x)
    for (std::size_t a = 0; a < n_actions; ++a) {
      const std::size_t base = (x * n_actions + a) * n_states;
      const std::size_t k = 1 + rng.below(n_states);
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t y = rng.below(n_states);
        const double w = 0.05 + rng.uniform();
        p[base + y] += w;
        total += w;
      }
      for (std::size_t y = 0; y < n_states; ++y) {
        p[base + y] /= total;
        r[base + y] = p[base + y] > 0.0 ? r0_max * rng.uniform() : 0.0;
      }
    }
  return oim::TabularMdp::from_dense(n_states, n_actions, gamma, r0_max, p, r);
}

double backup(const oim::TabularMdp& m, const std::vector<std::vector<double>>& q, StateId x,
              ActionId a) {
  double sum = 0.0;
  for (StateId y = 0; y < m.n_states(); ++y) {
    double best = q[y][0];
    for (ActionId b = 1; b < m.n_actions(); ++b) best = std::max(best, q[y][b]);
    sum += m.p(x, a, y) * (m.r(x, a, y) + m.gamma() * best);
  }
  return sum;
}

namespace {

std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    if (a[c][c] == 0.0) throw std::runtime_error("singular");
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return b;
}

}  // namespace

std::vector<std::vector<double>> evaluate(const oim::TabularMdp& m,
                                          const std::vector<std::vector<double>>& pi) {
  const std::size_t n = m.n_states(), k = m.n_actions();
  const double g = m.gamma();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  for (StateId x = 0; x < n; ++x) {
    a[x][x] = 1.0;
    for (ActionId u = 0; u < k; ++u)
      for (StateId y = 0; y < n; ++y) {
        const double w = pi[x][u] * m.p(x, u, y);
        a[x][y] -= g * w;
        b[x] += w * m.r(x, u, y);
      }
  }
  const auto v = solve(a, b);
  std::vector<std::vector<double>> q(n, std::vector<double>(k, 0.0));
  for (StateId x = 0; x < n; ++x)
    for (ActionId u = 0; u < k; ++u)
      for (StateId y = 0; y < n; ++y) q[x][u] += m.p(x, u, y) * (m.r(x, u, y) + g * v[y]);
  return q;
}

std::vector<std::vector<double>> deterministic(const std::vector<ActionId>& actions,
                                               std::size_t n_actions) {
  std::vector<std::vector<double>> pi(actions.size(), std::vector<double>(n_actions, 0.0));
  for (std::size_t x = 0; x < actions.size(); ++x) pi[x][actions[x]] = 1.0;
  return pi;
}

std::vector<double> brute_force_optimal_v(const oim::TabularMdp& m) {
  const std::size_t n = m.n_states(), k = m.n_actions();
  std::vector<double> best(n, -1e300);
  std::vector<ActionId> actions(n, 0);
  while (true) {
    const auto q = evaluate(m, deterministic(actions, k));
    for (StateId x = 0; x < n; ++x) best[x] = std::max(best[x], q[x][actions[x]]);
    std::size_t i = 0;
    while (i < n && ++actions[i] == k) actions[i++] = 0;
    if (i == n) break;
  }
  return best;
}

double finite_return(const oim::TabularMdp& m, const std::vector<ActionId>& policy, StateId start,
                     std::size_t steps) {
  std::vector<double> d(m.n_states(), 0.0), next(m.n_states());
  d[start] = 1.0;
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (StateId x = 0; x < m.n_states(); ++x) {
      if (d[x] == 0.0) continue;
      for (StateId y = 0; y < m.n_states(); ++y) {
        const double p = m.p(x, policy[x], y);
        total += d[x] * p * m.r(x, policy[x], y);
        next[y] += d[x] * p;
      }
    }
    d.swap(next);
  }
  return total;
}

double chi_square(const std::vector<std::uint64_t>& observed, const std::vector<double>& probs) {
  double n = 0.0;
  for (auto o : observed) n += static_cast<double>(o);
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (probs[i] == 0.0) continue;
    const double e = n * probs[i];
    stat += (static_cast<double>(observed[i]) - e) * (static_cast<double>(observed[i]) - e) / e;
  }
  return stat;
}

double chi_square_crit99(std::size_t k) {
  static constexpr double table[] = {6.6349, 9.2103, 11.3449, 13.2767, 15.0863,
                                     16.8119, 18.4753, 20.0902, 21.6660, 23.2093};
  if (k >= 1 && k <= 10) return table[k - 1];
  const double z = 2.326347874040841;
  const double kk = static_cast<double>(k);
  const double t = 1.0 - 2.0 / (9.0 * kk) + z * std::sqrt(2.0 / (9.0 * kk));
  return kk * t * t * t;
}

}  // namespace oracle
