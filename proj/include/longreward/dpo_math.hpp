#pragma once

#include <cmath>
#include <concepts>
#include <stdexcept>

// Sequence-level DPO objective with a cross-entropy regulariser on the
// preferred response. Batch means are left to the caller.

namespace longreward::dpo {

template <std::floating_point T = double>
struct PolicyLogProbs {
  T policy_logp_winner{};
  T ref_logp_winner{};
  T policy_logp_loser{};
  T ref_logp_loser{};
};

template <std::floating_point T = double>
struct DpoConfig {
  T beta = T(0.15);
  T lambda = T(0.1);

  void validate() const {
    if (!(beta > T(0)) || !std::isfinite(beta)) throw std::invalid_argument("beta must be > 0");
    if (!(lambda >= T(0)) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be >= 0");
  }
};

template <std::floating_point T = double>
struct Gradients {
  T policy_logp_winner{};
  T ref_logp_winner{};
  T policy_logp_loser{};
  T ref_logp_loser{};
};

// log(1 + e^x) without overflow.
template <std::floating_point T>
T softplus(T x) {
  return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <std::floating_point T>
T logistic(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

// The scaled margin z = beta * [(pi_w - ref_w) - (pi_l - ref_l)].
template <std::floating_point T>
T preference_margin(const PolicyLogProbs<T>& lp, const DpoConfig<T>& cfg) {
  return cfg.beta * ((lp.policy_logp_winner - lp.ref_logp_winner) - (lp.policy_logp_loser - lp.ref_logp_loser));
}

// -log sigma(z), evaluated as softplus(-z).
template <std::floating_point T>
T dpo_loss(const PolicyLogProbs<T>& lp, const DpoConfig<T>& cfg) {
  return softplus(-preference_margin(lp, cfg));
}

template <std::floating_point T>
T ce_loss(T policy_logp_winner) {
  if (!std::isfinite(policy_logp_winner)) throw std::invalid_argument("log-probability must be finite");
  if (policy_logp_winner > T(0)) throw std::invalid_argument("log-probability must be <= 0");
  return -policy_logp_winner;
}

template <std::floating_point T>
T merged_loss(const PolicyLogProbs<T>& lp, const DpoConfig<T>& cfg) {
  return dpo_loss(lp, cfg) + cfg.lambda * ce_loss(lp.policy_logp_winner);
}

// Closed-form partial derivatives of merged_loss.
template <std::floating_point T>
Gradients<T> dpo_gradients(const PolicyLogProbs<T>& lp, const DpoConfig<T>& cfg) {
  // d softplus(-z)/dz = -sigma(-z)
  const T pull = cfg.beta * logistic(-preference_margin(lp, cfg));
  Gradients<T> g;
  g.policy_logp_winner = -pull - cfg.lambda;
  g.ref_logp_winner = pull;
  g.policy_logp_loser = pull;
  g.ref_logp_loser = -pull;
  return g;
}

}  // namespace longreward::dpo
