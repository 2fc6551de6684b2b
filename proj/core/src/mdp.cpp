#include "oim/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "oim/errors.hpp"

namespace oim {

namespace {

constexpr double kRowTolerance = 1e-12;
constexpr std::size_t kDirectSolveLimit = 10'000;

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

void check_same_shape(const TabularMdp& mdp, const QTable& q) {
  require(q.n_states() == mdp.n_states() && q.n_actions() == mdp.n_actions(),
          "QTable shape does not match MDP");
}

void check_same_shape(const TabularMdp& mdp, const Policy& pi) {
  require(pi.n_states() == mdp.n_states() && pi.n_actions() == mdp.n_actions(),
          "policy shape does not match MDP");
}

std::vector<double> policy_state_values(const QTable& q, const Policy& pi) {
  std::vector<double> v(q.n_states(), 0.0);
  for (StateId x = 0; x < q.n_states(); ++x) {
    const auto probs = pi.row(x);
    const auto vals = q.row(x);
    double s = 0.0;
    for (ActionId a = 0; a < q.n_actions(); ++a) s += probs[a] * vals[a];
    v[x] = s;
  }
  return v;
}

QTable q_from_state_values(const TabularMdp& mdp, const std::vector<double>& v) {
  QTable q(mdp.n_states(), mdp.n_actions());
  const double g = mdp.gamma();
  for (StateId x = 0; x < mdp.n_states(); ++x)
    for (ActionId a = 0; a < mdp.n_actions(); ++a) {
      double s = 0.0;
      for (const Outcome& o : mdp.outcomes(x, a)) s += o.prob * (o.reward + g * v[o.next]);
      q(x, a) = s;
    }
  return q;
}

// max |Q - T^pi Q| over all entries.
double policy_residual(const TabularMdp& mdp, const Policy& pi, const QTable& q) {
  const QTable next = q_from_state_values(mdp, policy_state_values(q, pi));
  return next.sup_distance(q);
}

double value_scale(const QTable& q) {
  double m = 1.0;
  for (double v : q.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

// ---------------------------------------------------------------- QTable

QTable::QTable(std::size_t n_states, std::size_t n_actions, double fill)
    : n_states_(n_states), n_actions_(n_actions), values_(n_states * n_actions, fill) {}

double QTable::max(StateId x) const {
  const auto r = row(x);
  return *std::max_element(r.begin(), r.end());
}

ActionId QTable::argmax(StateId x) const {
  const auto r = row(x);
  ActionId best = 0;
  for (ActionId a = 1; a < r.size(); ++a)
    if (r[a] > r[best]) best = a;
  return best;
}

double QTable::sup_distance(const QTable& other) const {
  require(n_states_ == other.n_states_ && n_actions_ == other.n_actions_,
          "QTable shapes differ");
  double d = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    d = std::max(d, std::abs(values_[i] - other.values_[i]));
  return d;
}

// ---------------------------------------------------------------- Policy

Policy Policy::uniform(std::size_t n_states, std::size_t n_actions) {
  require(n_actions > 0, "policy needs at least one action");
  return Policy(n_states, n_actions,
                std::vector<double>(n_states * n_actions, 1.0 / static_cast<double>(n_actions)));
}

Policy Policy::deterministic(std::span<const ActionId> actions, std::size_t n_actions) {
  std::vector<double> probs(actions.size() * n_actions, 0.0);
  for (StateId x = 0; x < actions.size(); ++x) {
    require(actions[x] < n_actions, "policy action out of range");
    probs[x * n_actions + actions[x]] = 1.0;
  }
  return Policy(actions.size(), n_actions, std::move(probs));
}

Policy Policy::greedy(const QTable& q) {
  std::vector<ActionId> actions(q.n_states());
  for (StateId x = 0; x < q.n_states(); ++x) actions[x] = q.argmax(x);
  return deterministic(actions, q.n_actions());
}

Policy Policy::from_table(std::size_t n_states, std::size_t n_actions, std::vector<double> probs) {
  require(probs.size() == n_states * n_actions, "policy table has wrong size");
  for (StateId x = 0; x < n_states; ++x) {
    double s = 0.0;
    for (ActionId a = 0; a < n_actions; ++a) {
      const double p = probs[x * n_actions + a];
      require(p >= 0.0 && p <= 1.0, "policy probability outside [0,1]");
      s += p;
    }
    require(std::abs(s - 1.0) <= kRowTolerance, "policy row does not sum to 1");
  }
  return Policy(n_states, n_actions, std::move(probs));
}

std::optional<ActionId> Policy::action(StateId x) const {
  const auto r = row(x);
  for (ActionId a = 0; a < r.size(); ++a)
    if (r[a] == 1.0) return a;
  return std::nullopt;
}

// ---------------------------------------------------------------- TabularMdp

TabularMdp::Builder::Builder(std::size_t n_states, std::size_t n_actions, double gamma,
                             double r0_max)
    : n_states_(n_states), n_actions_(n_actions), gamma_(gamma), r0_max_(r0_max) {}

TabularMdp::Builder& TabularMdp::Builder::reward_floor(double floor) {
  floor_ = floor;
  return *this;
}

TabularMdp::Builder& TabularMdp::Builder::add(StateId x, ActionId a, StateId y, double prob,
                                              double reward) {
  require(x < n_states_ && y < n_states_ && a < n_actions_, "transition index out of range");
  require(prob >= 0.0, "negative transition probability");
  entries_.push_back({x, y, a, prob, reward});
  return *this;
}

TabularMdp::Builder& TabularMdp::Builder::terminal(StateId x) {
  require(x < n_states_, "terminal state out of range");
  terminals_.push_back(x);
  return *this;
}

TabularMdp TabularMdp::Builder::build() const {
  require(n_states_ > 0 && n_actions_ > 0, "MDP needs at least one state and one action");
  require(gamma_ >= 0.0 && gamma_ < 1.0, "discount must lie in [0,1)");
  require(r0_max_ > 0.0, "reward bound must be positive");

  std::vector<Entry> sorted = entries_;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Entry& l, const Entry& r) {
    if (l.x != r.x) return l.x < r.x;
    if (l.a != r.a) return l.a < r.a;
    return l.y < r.y;
  });

  TabularMdp m;
  m.n_states_ = n_states_;
  m.n_actions_ = n_actions_;
  m.gamma_ = gamma_;
  m.r0_max_ = r0_max_;
  m.reward_floor_ = floor_;
  m.row_begin_.assign(n_states_ * n_actions_ + 1, 0);

  std::size_t i = 0;
  for (std::size_t row = 0; row < n_states_ * n_actions_; ++row) {
    m.row_begin_[row] = m.outcomes_.size();
    const StateId x = row / n_actions_;
    const ActionId a = row % n_actions_;
    while (i < sorted.size() && sorted[i].x == x && sorted[i].a == a) {
      const StateId y = sorted[i].y;
      double p = 0.0, pr = 0.0;
      while (i < sorted.size() && sorted[i].x == x && sorted[i].a == a && sorted[i].y == y) {
        p += sorted[i].prob;
        pr += sorted[i].prob * sorted[i].reward;
        ++i;
      }
      if (p > 0.0) m.outcomes_.push_back({y, p, pr / p});
    }
  }
  m.row_begin_.back() = m.outcomes_.size();

  m.terminals_ = terminals_;
  std::sort(m.terminals_.begin(), m.terminals_.end());
  m.terminals_.erase(std::unique(m.terminals_.begin(), m.terminals_.end()), m.terminals_.end());
  m.validate();
  return m;
}

void TabularMdp::validate() const {
  const double reward_tol = 1e-12 * std::max(1.0, r0_max_);
  for (StateId x = 0; x < n_states_; ++x)
    for (ActionId a = 0; a < n_actions_; ++a) {
      double s = 0.0;
      for (const Outcome& o : outcomes(x, a)) {
        s += o.prob;
        require(o.reward <= r0_max_ + reward_tol,
                "reward above r0_max at (" + std::to_string(x) + "," + std::to_string(a) + ")");
        require(o.reward >= reward_floor_ - reward_tol,
                "reward below floor at (" + std::to_string(x) + "," + std::to_string(a) + ")");
      }
      require(std::abs(s - 1.0) <= kRowTolerance,
              "transition row (" + std::to_string(x) + "," + std::to_string(a) +
                  ") does not sum to 1");
    }
  for (StateId t : terminals_)
    for (ActionId a = 0; a < n_actions_; ++a) {
      const auto row = outcomes(t, a);
      require(row.size() == 1 && row[0].next == t && row[0].reward == 0.0,
              "terminal state " + std::to_string(t) + " is not a zero-reward self-loop");
    }
}

TabularMdp TabularMdp::from_dense(std::size_t n_states, std::size_t n_actions, double gamma,
                                  double r0_max, std::span<const double> transition,
                                  std::span<const double> reward) {
  const std::size_t n = n_states * n_actions * n_states;
  require(transition.size() == n && reward.size() == n, "dense tensors have wrong size");
  Builder b(n_states, n_actions, gamma, r0_max);
  for (StateId x = 0; x < n_states; ++x)
    for (ActionId a = 0; a < n_actions; ++a)
      for (StateId y = 0; y < n_states; ++y) {
        const std::size_t k = (x * n_actions + a) * n_states + y;
        if (transition[k] != 0.0) b.add(x, a, y, transition[k], reward[k]);
      }
  return b.build();
}

void TabularMdp::check_indices(StateId x, ActionId a) const {
  if (x >= n_states_ || a >= n_actions_)
    throw UsageError("state/action index out of range: (" + std::to_string(x) + "," +
                     std::to_string(a) + ")");
}

std::span<const Outcome> TabularMdp::outcomes(StateId x, ActionId a) const {
  check_indices(x, a);
  const std::size_t row = x * n_actions_ + a;
  return {outcomes_.data() + row_begin_[row], row_begin_[row + 1] - row_begin_[row]};
}

double TabularMdp::p(StateId x, ActionId a, StateId y) const {
  for (const Outcome& o : outcomes(x, a))
    if (o.next == y) return o.prob;
  return 0.0;
}

double TabularMdp::r(StateId x, ActionId a, StateId y) const {
  for (const Outcome& o : outcomes(x, a))
    if (o.next == y) return o.reward;
  return 0.0;
}

double TabularMdp::expected_reward(StateId x, ActionId a) const {
  double s = 0.0;
  for (const Outcome& o : outcomes(x, a)) s += o.prob * o.reward;
  return s;
}

TabularMdp TabularMdp::with_gamma(double gamma) const {
  require(gamma >= 0.0 && gamma < 1.0, "discount must lie in [0,1)");
  TabularMdp copy = *this;
  copy.gamma_ = gamma;
  return copy;
}

nlohmann::json TabularMdp::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (StateId x = 0; x < n_states_; ++x)
    for (ActionId a = 0; a < n_actions_; ++a)
      for (const Outcome& o : outcomes(x, a))
        rows.push_back({{"x", x}, {"a", a}, {"y", o.next}, {"p", o.prob}, {"r", o.reward}});
  return {{"n_states", n_states_},   {"n_actions", n_actions_},
          {"gamma", gamma_},         {"r0_max", r0_max_},
          {"reward_floor", reward_floor_}, {"terminal_states", terminals_},
          {"transitions", rows}};
}

TabularMdp TabularMdp::from_json(const nlohmann::json& j) {
  Builder b(j.at("n_states").get<std::size_t>(), j.at("n_actions").get<std::size_t>(),
            j.at("gamma").get<double>(), j.at("r0_max").get<double>());
  b.reward_floor(j.value("reward_floor", 0.0));
  for (const auto& t : j.at("transitions"))
    b.add(t.at("x").get<StateId>(), t.at("a").get<ActionId>(), t.at("y").get<StateId>(),
          t.at("p").get<double>(), t.at("r").get<double>());
  if (j.contains("terminal_states"))
    for (const auto& t : j.at("terminal_states")) b.terminal(t.get<StateId>());
  return b.build();
}

// ---------------------------------------------------------------- DP kernels

double bellman_backup(const TabularMdp& mdp, const QTable& q, StateId x, ActionId a) {
  check_same_shape(mdp, q);
  const double g = mdp.gamma();
  double s = 0.0;
  for (const Outcome& o : mdp.outcomes(x, a)) s += o.prob * (o.reward + g * q.max(o.next));
  return s;
}

QTable bellman_sweep(const TabularMdp& mdp, const QTable& q) {
  check_same_shape(mdp, q);
  std::vector<double> v(mdp.n_states());
  for (StateId y = 0; y < mdp.n_states(); ++y) v[y] = q.max(y);
  return q_from_state_values(mdp, v);
}

QTable value_iteration(const TabularMdp& mdp, double tol, std::size_t max_iters,
                       const QTable* warm_start) {
  require(tol > 0.0, "value iteration tolerance must be positive");
  QTable q = warm_start ? *warm_start : QTable(mdp.n_states(), mdp.n_actions());
  check_same_shape(mdp, q);
  double diff = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < max_iters; ++it) {
    QTable next = bellman_sweep(mdp, q);
    diff = next.sup_distance(q);
    q = std::move(next);
    if (diff <= tol) return q;
  }
  throw ConvergenceError("value iteration did not converge in " + std::to_string(max_iters) +
                             " sweeps",
                         diff);
}

QTable policy_evaluation_exact(const TabularMdp& mdp, const Policy& pi) {
  check_same_shape(mdp, pi);
  const std::size_t n = mdp.n_states();
  const double g = mdp.gamma();

  // V = r_pi + gamma P_pi V over states, then Q from V.
  std::vector<double> r_pi(n, 0.0);
  for (StateId x = 0; x < n; ++x)
    for (ActionId a = 0; a < mdp.n_actions(); ++a)
      if (pi.prob(x, a) > 0.0) r_pi[x] += pi.prob(x, a) * mdp.expected_reward(x, a);

  std::vector<double> v(n, 0.0);
  if (n * mdp.n_actions() <= kDirectSolveLimit) {
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                       static_cast<Eigen::Index>(n));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (StateId x = 0; x < n; ++x) {
      rhs(static_cast<Eigen::Index>(x)) = r_pi[x];
      for (ActionId a = 0; a < mdp.n_actions(); ++a) {
        const double pa = pi.prob(x, a);
        if (pa == 0.0) continue;
        for (const Outcome& o : mdp.outcomes(x, a))
          system(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(o.next)) -=
              g * pa * o.prob;
      }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    Eigen::VectorXd sol = lu.solve(rhs);
    // One round of iterative refinement.
    sol += lu.solve(rhs - system * sol);
    for (StateId x = 0; x < n; ++x) v[x] = sol(static_cast<Eigen::Index>(x));
  } else {
    const double stop = 1e-12 * (1.0 - g);
    for (std::size_t it = 0; it < 10'000'000; ++it) {
      double delta = 0.0, scale = 1.0;
      for (StateId x = 0; x < n; ++x) {
        double s = r_pi[x];
        for (ActionId a = 0; a < mdp.n_actions(); ++a) {
          const double pa = pi.prob(x, a);
          if (pa == 0.0) continue;
          for (const Outcome& o : mdp.outcomes(x, a)) s += g * pa * o.prob * v[o.next];
        }
        delta = std::max(delta, std::abs(s - v[x]));
        scale = std::max(scale, std::abs(s));
        v[x] = s;
      }
      if (delta <= stop * scale) break;
    }
  }

  QTable q = q_from_state_values(mdp, v);
  const double residual = policy_residual(mdp, pi, q);
  if (residual > 1e-10 * value_scale(q))
    throw ConvergenceError("exact policy evaluation missed its residual target", residual);
  return q;
}

QTable truncated_value(const TabularMdp& mdp, const Policy& pi, std::size_t h) {
  check_same_shape(mdp, pi);
  QTable q(mdp.n_states(), mdp.n_actions());
  for (StateId x = 0; x < mdp.n_states(); ++x)
    for (ActionId a = 0; a < mdp.n_actions(); ++a) q(x, a) = mdp.expected_reward(x, a);
  for (std::size_t k = 0; k < h; ++k) q = q_from_state_values(mdp, policy_state_values(q, pi));
  return q;
}

double expected_return(const TabularMdp& mdp, const Policy& pi, StateId start, std::size_t steps) {
  check_same_shape(mdp, pi);
  require(start < mdp.n_states(), "start state out of range");
  const std::size_t n = mdp.n_states();
  std::vector<double> immediate(n, 0.0);
  for (StateId x = 0; x < n; ++x)
    for (ActionId a = 0; a < mdp.n_actions(); ++a)
      immediate[x] += pi.prob(x, a) * mdp.expected_reward(x, a);

  std::vector<double> dist(n, 0.0), next(n);
  dist[start] = 1.0;
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (StateId x = 0; x < n; ++x) {
      if (dist[x] == 0.0) continue;
      total += dist[x] * immediate[x];
      for (ActionId a = 0; a < mdp.n_actions(); ++a) {
        const double w = dist[x] * pi.prob(x, a);
        if (w == 0.0) continue;
        for (const Outcome& o : mdp.outcomes(x, a)) next[o.next] += w * o.prob;
      }
    }
    dist.swap(next);
  }
  return total;
}

double optimal_finite_horizon_return(const TabularMdp& mdp, StateId start, std::size_t steps) {
  require(start < mdp.n_states(), "start state out of range");
  const std::size_t n = mdp.n_states();
  std::vector<double> v(n, 0.0), next(n);
  for (std::size_t k = 0; k < steps; ++k) {
    for (StateId x = 0; x < n; ++x) {
      double best = -std::numeric_limits<double>::infinity();
      for (ActionId a = 0; a < mdp.n_actions(); ++a) {
        double s = 0.0;
        for (const Outcome& o : mdp.outcomes(x, a)) s += o.prob * (o.reward + v[o.next]);
        best = std::max(best, s);
      }
      next[x] = best;
    }
    v.swap(next);
  }
  return v[start];
}

}  // namespace oim
