#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace latproph {

enum class SvrKernel { kLinear, kPolynomial, kSigmoid, kRbf };

std::string_view to_string(SvrKernel k);
SvrKernel svr_kernel_from_string(const std::string& s);

struct SvrConfig {
  SvrKernel kernel = SvrKernel::kRbf;
  double gamma = 0.1;     // polynomial / sigmoid / rbf
  int degree = 3;         // polynomial
  double coef0 = 0.0;     // polynomial / sigmoid
  double cost_c = 1.0;
  double epsilon = 0.1;
  double tolerance = 1e-3;
  std::size_t max_iterations = 100000;
};

// Kernel expansion model; only nonzero dual coefficients are stored.
struct SvrModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coefficients;  // alpha - alpha*, in [-C, C]
  double bias = 0.0;
  SvrConfig config;
  bool log_target = false;
};

struct SvrFitInfo {
  bool converged = false;
  std::size_t iterations = 0;
  bool no_convergence_warning = false;
  bool indefinite_kernel_detected = false;
  double kkt_gap = 0.0;            // final maximal-violating-pair gap
  double max_kkt_violation = 0.0;  // max per-sample epsilon-KKT violation
  std::vector<double> beta;        // full dual vector over the training rows
};

double kernel_eval(const SvrConfig& cfg, const std::vector<double>& u,
                   const std::vector<double>& v);

// Solves the epsilon-insensitive dual by sequential minimal optimization:
// maximal violating pair, deterministic tie-breaks, full kernel cache.
// Throws DegenerateError for n < 2. A fit that hits max_iterations comes
// back with no_convergence_warning set; the model is still usable.
std::pair<SvrModel, SvrFitInfo> fit_svr(const SvrConfig& cfg,
                                        const std::vector<std::vector<double>>& X,
                                        const std::vector<double>& y);

double predict_svr(const SvrModel& m, const std::vector<double>& x);

// Per-sample epsilon-KKT violation of `beta`/`bias` on the training set;
// the optimality certificate asserted by the acceptance suite.
std::vector<double> svr_kkt_violations(const SvrConfig& cfg,
                                       const std::vector<std::vector<double>>& X,
                                       const std::vector<double>& y,
                                       const std::vector<double>& beta, double bias);

}  // namespace latproph
