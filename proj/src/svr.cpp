#include "latproph/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "latproph/common.hpp"
#include "latproph/errors.hpp"

namespace latproph {

std::string_view to_string(SvrKernel k) {
  switch (k) {
    case SvrKernel::kLinear: return "linear";
    case SvrKernel::kPolynomial: return "polynomial";
    case SvrKernel::kSigmoid: return "sigmoid";
    case SvrKernel::kRbf: return "rbf";
  }
  return "?";
}

SvrKernel svr_kernel_from_string(const std::string& s) {
  if (s == "linear") return SvrKernel::kLinear;
  if (s == "polynomial") return SvrKernel::kPolynomial;
  if (s == "sigmoid") return SvrKernel::kSigmoid;
  if (s == "rbf") return SvrKernel::kRbf;
  throw ConfigError("unknown SVR kernel '" + s + "'");
}

double kernel_eval(const SvrConfig& cfg, const std::vector<double>& u,
                   const std::vector<double>& v) {
  if (u.size() != v.size())
    throw DimensionError("kernel_eval: dimension mismatch " + std::to_string(u.size()) +
                         " vs " + std::to_string(v.size()));
  switch (cfg.kernel) {
    case SvrKernel::kLinear: {
      double dot = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
      return dot;
    }
    case SvrKernel::kPolynomial: {
      double dot = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
      return std::pow(cfg.gamma * dot + cfg.coef0, cfg.degree);
    }
    case SvrKernel::kSigmoid: {
      double dot = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
      return std::tanh(cfg.gamma * dot + cfg.coef0);
    }
    case SvrKernel::kRbf: {
      double d2 = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        d2 += d * d;
      }
      return std::exp(-cfg.gamma * d2);
    }
  }
  return 0.0;
}

namespace {

void validate_config(const SvrConfig& cfg) {
  if (!(cfg.cost_c > 0.0)) throw ConfigError("SVR cost C must be > 0");
  if (!(cfg.epsilon >= 0.0)) throw ConfigError("SVR epsilon must be >= 0");
  if (!(cfg.tolerance > 0.0)) throw ConfigError("SVR tolerance must be > 0");
  if (cfg.kernel != SvrKernel::kLinear && !(cfg.gamma > 0.0))
    throw ConfigError("SVR gamma must be > 0");
  if (cfg.kernel == SvrKernel::kPolynomial && cfg.degree < 1)
    throw ConfigError("SVR polynomial degree must be >= 1");
}

}  // namespace

std::vector<double> svr_kkt_violations(const SvrConfig& cfg,
                                       const std::vector<std::vector<double>>& X,
                                       const std::vector<double>& y,
                                       const std::vector<double>& beta, double bias) {
  const std::size_t n = X.size();
  const double c = cfg.cost_c;
  const double eps = cfg.epsilon;
  // bound detection tolerance, relative to C
  const double at_bound = 1e-10 * c;

  std::vector<double> violations(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double f = bias;
    for (std::size_t j = 0; j < n; ++j) {
      if (beta[j] != 0.0) f += beta[j] * kernel_eval(cfg, X[j], X[i]);
    }
    const double e = f - y[i];  // prediction error
    const double b = beta[i];
    double v = 0.0;
    if (std::abs(b) <= at_bound) {
      v = std::max(0.0, std::abs(e) - eps);
    } else if (b >= c - at_bound) {
      v = std::max(0.0, e + eps);  // must sit at or below the lower tube edge
    } else if (b > 0.0) {
      v = std::abs(e + eps);  // interior upper-side SV: y - f == eps
    } else if (b <= -c + at_bound) {
      v = std::max(0.0, eps - e);
    } else {
      v = std::abs(e - eps);  // interior lower-side SV: f - y == eps
    }
    violations[i] = v;
  }
  return violations;
}

std::pair<SvrModel, SvrFitInfo> fit_svr(const SvrConfig& cfg,
                                        const std::vector<std::vector<double>>& X,
                                        const std::vector<double>& y) {
  validate_config(cfg);
  const std::size_t n = X.size();
  if (n != y.size()) throw DimensionError("fit_svr: |X| != |y|");
  if (n < 2) throw DegenerateError("fit_svr: need at least 2 samples");

  const double c = cfg.cost_c;
  const double tau = 1e-12;

  // full kernel matrix; training sets here stay well below ~2k rows
  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = kernel_eval(cfg, X[i], X[j]);
      K[i * n + j] = v;
      K[j * n + i] = v;
    }
  }

  // 2n-variable expansion: theta = (alpha, alpha*), d = (+1, -1), with
  // beta = alpha - alpha*. kbeta caches (K beta) so gradients are O(1):
  //   grad(alpha_i) = kbeta_i + eps - y_i, grad(alpha*_i) = -kbeta_i + eps + y_i
  std::vector<double> alpha(n, 0.0);
  std::vector<double> alpha_star(n, 0.0);
  std::vector<double> kbeta(n, 0.0);

  // -d_p * grad_p; b is bracketed by these values at optimality
  auto up_value = [&](std::size_t p) {
    return p < n ? y[p] - kbeta[p] - cfg.epsilon
                 : y[p - n] - kbeta[p - n] + cfg.epsilon;
  };
  // I_up: the variable can move up (d=+1: theta < C, d=-1: theta > 0);
  // I_low: it can move down (d=+1: theta > 0, d=-1: theta < C).
  auto in_up = [&](std::size_t p) { return p < n ? alpha[p] < c : alpha_star[p - n] > 0.0; };
  auto in_low = [&](std::size_t p) { return p < n ? alpha[p] > 0.0 : alpha_star[p - n] < c; };

  SvrFitInfo info;
  double gap = std::numeric_limits<double>::infinity();
  while (info.iterations < cfg.max_iterations) {
    // maximal violating pair over the 2n variables; ties keep the lowest index
    std::size_t best_up = 2 * n;
    std::size_t best_low = 2 * n;
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < 2 * n; ++p) {
      const double v = up_value(p);
      if (in_up(p) && v > m_up) {
        m_up = v;
        best_up = p;
      }
      if (in_low(p) && v < m_low) {
        m_low = v;
        best_low = p;
      }
    }
    if (best_up == 2 * n || best_low == 2 * n) {
      info.converged = true;  // no feasible direction left
      gap = 0.0;
      break;
    }
    gap = m_up - m_low;
    if (!(gap > cfg.tolerance)) {
      info.converged = true;
      break;
    }
    ++info.iterations;

    const std::size_t p = best_up;
    const std::size_t q = best_low;
    const std::size_t i = p < n ? p : p - n;
    const std::size_t j = q < n ? q : q - n;
    const double dp = p < n ? 1.0 : -1.0;
    const double dq = q < n ? 1.0 : -1.0;
    const double grad_p = -dp * up_value(p);
    const double grad_q = -dq * up_value(q);

    double quad = K[i * n + i] + K[j * n + j] - 2.0 * K[i * n + j];
    if (quad <= 0.0) {
      info.indefinite_kernel_detected = true;
      quad = tau;
    }

    double& theta_p = p < n ? alpha[p] : alpha_star[p - n];
    double& theta_q = q < n ? alpha[q] : alpha_star[q - n];
    const double old_p = theta_p;
    const double old_q = theta_q;

    if (dp != dq) {
      const double delta = (-grad_p - grad_q) / quad;
      const double diff = theta_p - theta_q;
      theta_p += delta;
      theta_q += delta;
      if (diff > 0.0 && theta_q < 0.0) {
        theta_q = 0.0;
        theta_p = diff;
      } else if (diff <= 0.0 && theta_p < 0.0) {
        theta_p = 0.0;
        theta_q = -diff;
      }
      if (theta_p > c) {
        theta_q -= theta_p - c;
        theta_p = c;
      }
      if (theta_q > c) {
        theta_p -= theta_q - c;
        theta_q = c;
      }
    } else {
      const double delta = (grad_p - grad_q) / quad;
      const double sum = theta_p + theta_q;
      theta_p -= delta;
      theta_q += delta;
      if (theta_p < 0.0) {
        theta_p = 0.0;
        theta_q = sum;
      } else if (theta_q < 0.0) {
        theta_q = 0.0;
        theta_p = sum;
      }
      if (theta_p > c) {
        theta_p = c;
        theta_q = sum - c;
      } else if (theta_q > c) {
        theta_q = c;
        theta_p = sum - c;
      }
    }

    const double delta_beta_i = dp * (theta_p - old_p);
    const double delta_beta_j = dq * (theta_q - old_q);
    if (delta_beta_i != 0.0)
      for (std::size_t r = 0; r < n; ++r) kbeta[r] += delta_beta_i * K[i * n + r];
    if (delta_beta_j != 0.0)
      for (std::size_t r = 0; r < n; ++r) kbeta[r] += delta_beta_j * K[j * n + r];
  }
  info.no_convergence_warning = !info.converged;
  info.kkt_gap = gap;
  if (info.no_convergence_warning)
    log_info("fit_svr: stopped at max_iterations (" + std::to_string(info.iterations) +
             ") with KKT gap " + format_double(gap));

  // bias from the final gap bracket
  double m_up = -std::numeric_limits<double>::infinity();
  double m_low = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < 2 * n; ++p) {
    const double v = up_value(p);
    if (in_up(p)) m_up = std::max(m_up, v);
    if (in_low(p)) m_low = std::min(m_low, v);
  }
  double bias;
  if (std::isfinite(m_up) && std::isfinite(m_low))
    bias = 0.5 * (m_up + m_low);
  else if (std::isfinite(m_up))
    bias = m_up;
  else
    bias = std::isfinite(m_low) ? m_low : 0.0;

  SvrModel model;
  model.config = cfg;
  model.bias = bias;
  info.beta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    info.beta[i] = alpha[i] - alpha_star[i];
    if (info.beta[i] != 0.0) {
      model.support_vectors.push_back(X[i]);
      model.dual_coefficients.push_back(info.beta[i]);
    }
  }

  const auto violations = svr_kkt_violations(cfg, X, y, info.beta, bias);
  info.max_kkt_violation = violations.empty() ? 0.0
                                              : *std::max_element(violations.begin(), violations.end());
  return {std::move(model), std::move(info)};
}

double predict_svr(const SvrModel& m, const std::vector<double>& x) {
  double out = m.bias;
  for (std::size_t s = 0; s < m.support_vectors.size(); ++s)
    out += m.dual_coefficients[s] * kernel_eval(m.config, m.support_vectors[s], x);
  return m.log_target ? std::exp(out) : out;
}

}  // namespace latproph
