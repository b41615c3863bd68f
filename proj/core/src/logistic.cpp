#include "tbm/logistic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <limits>

namespace tbm {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Objective {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXd& y;
  const Eigen::VectorXd& penalty;  // per-weight L2 coefficients

  double value(const Eigen::VectorXd& w) const {
    const Eigen::VectorXd z = x * w;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) loss += softplus(z(i)) - y(i) * z(i);
    return loss + 0.5 * w.dot(penalty.cwiseProduct(w));
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const {
    const Eigen::VectorXd z = x * w;
    Eigen::VectorXd residual(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) residual(i) = sigmoid(z(i)) - y(i);
    return x.transpose() * residual + penalty.cwiseProduct(w);
  }
};

}  // namespace

double logisticProbability(std::span<const double> weights, std::span<const double> x) {
  double z = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * x[i];
  return sigmoid(z);
}

LogisticFit fitLogistic(const DenseMatrix& features, std::span<const int> labels,
                        const LogisticOptions& options) {
  const auto n = static_cast<Eigen::Index>(features.rows());
  const auto p = static_cast<Eigen::Index>(features.cols());
  if (labels.size() != features.rows()) throw DimensionError("logistic regression: label count mismatch");
  if (n == 0 || p == 0) throw std::invalid_argument("logistic regression needs data");

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  std::size_t positives = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = features(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    const int label = labels[static_cast<std::size_t>(i)];
    if (label != 0 && label != 1) throw std::invalid_argument("logistic labels must be 0 or 1");
    y(i) = label;
    positives += static_cast<std::size_t>(label);
  }
  if (positives == 0 || positives == labels.size()) {
    throw DegenerateLabelsError("degenerate labels: every observation is in the same class");
  }

  Eigen::VectorXd penalty_diag = Eigen::VectorXd::Constant(p, options.l2Penalty);
  penalty_diag(0) = 0.0;
  const Objective objective{x, y, penalty_diag};

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  LogisticFit fit;
  double current = objective.value(w);
  Eigen::MatrixXd hessian(p, p);
  for (std::size_t it = 0; it < options.maxIterations; ++it) {
    const Eigen::VectorXd z = x * w;
    Eigen::VectorXd prob(n), curvature(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = sigmoid(z(i));
      curvature(i) = prob(i) * (1.0 - prob(i));
    }
    const Eigen::VectorXd gradient = x.transpose() * (prob - y) + penalty_diag.cwiseProduct(w);
    hessian = x.transpose() * curvature.asDiagonal() * x;
    hessian.diagonal() += penalty_diag;

    fit.iterations = it;
    fit.gradientNorm = gradient.norm();
    if (fit.gradientNorm < options.gradientTolerance) {
      fit.converged = true;
      break;
    }

    Eigen::VectorXd step = hessian.ldlt().solve(gradient);
    if (!step.allFinite()) {
      // The curvature underflowed (separated data); a small ridge keeps the
      // solve defined.
      Eigen::MatrixXd damped = hessian;
      damped.diagonal().array() += 1e-12 * (1.0 + hessian.diagonal().cwiseAbs().maxCoeff());
      step = damped.ldlt().solve(gradient);
    }

    // Differences below this are roundoff in the summed loss.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(current));
    double t = 1.0;
    Eigen::VectorXd candidate = w - step;
    double value = objective.value(candidate);
    if (value <= current + slack) value = std::min(value, current);
    while (value > current && t > 1e-10) {
      t *= 0.5;
      candidate = w - t * step;
      value = objective.value(candidate);
    }
    if (value > current) {
      // Near the optimum the objective change drops below roundoff; accept
      // the full Newton step when it still shrinks the gradient.
      candidate = w - step;
      if (!(objective.gradient(candidate).norm() < fit.gradientNorm)) break;
      value = objective.value(candidate);
    }
    w = candidate;
    current = value;
  }

  fit.weights.assign(w.data(), w.data() + p);
  fit.penalizedLoss = current;
  if (!fit.converged) {
    fit.gradientNorm = objective.gradient(w).norm();
    fit.converged = fit.gradientNorm < options.gradientTolerance;
  }

  // Wald statistic on the slope block of the inverse Hessian.
  if (p > 1) {
    const Eigen::MatrixXd cov = hessian.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd slope_cov = cov.bottomRightCorner(p - 1, p - 1);
    const Eigen::VectorXd slopes = w.tail(p - 1);
    fit.waldStatistic = slopes.dot(slope_cov.ldlt().solve(slopes));
  }

  if (!fit.converged) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "logistic regression did not converge (gradient norm %.3g)", fit.gradientNorm);
    throw FitConvergenceError(msg, fit);
  }
  return fit;
}

}  // namespace tbm
