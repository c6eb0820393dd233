#include "privscore/glm.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace privscore {

namespace {

double clamp_prob(double p) {
  const double eps = 1e-12;
  return std::min(1.0 - eps, std::max(eps, p));
}

double sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double binomial_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = clamp_prob(mu[i]);
    dev += -2.0 * (y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p));
  }
  return dev;
}

double gamma_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    dev += 2.0 * (-std::log(y[i] / mu[i]) + (y[i] - mu[i]) / mu[i]);
  }
  return dev;
}

void check_full_rank(const Eigen::MatrixXd& X, const FittedGlm& model,
                     const std::string& response_name) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    std::string names = "intercept";
    for (const auto& n : model.parent_names) names += ", " + n;
    throw std::runtime_error("singular design fitting '" + response_name +
                             "' on columns [" + names + "]");
  }
}

}  // namespace

double FittedGlm::linear_predictor(std::span<const double> row) const {
  double eta = coef[0];
  for (std::size_t j = 0; j < parent_cols.size(); ++j) {
    eta += coef[j + 1] * row[parent_cols[j]];
  }
  return eta;
}

double FittedGlm::mu(std::span<const double> row) const {
  const double eta = linear_predictor(row);
  return family == GlmFamily::binomial_logit ? sigmoid(eta) : std::exp(eta);
}

FittedGlm fit_glm(const DatasetTable& table, int response_col,
                  const std::vector<int>& parent_cols, GlmFamily family) {
  const std::size_t n = table.n_rows();
  const std::size_t p = parent_cols.size() + 1;

  FittedGlm model;
  model.family = family;
  model.parent_cols = parent_cols;
  for (int c : parent_cols) model.parent_names.push_back(table.column(c).name);
  model.coef.assign(p, 0.0);

  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = table.at(i, response_col);
  if (family == GlmFamily::gamma_log) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(y[i] > 0.0)) {
        throw std::runtime_error("gamma response must be strictly positive; column '" +
                                 table.column(response_col).name + "', row " +
                                 std::to_string(i + 1) + " has " + std::to_string(y[i]));
      }
    }
  }

  // Constant response: intercept-only fit, slopes exactly zero.
  const double y_min = y.minCoeff();
  const double y_max = y.maxCoeff();
  if (y_min == y_max) {
    model.coef[0] = family == GlmFamily::binomial_logit
                        ? std::log(clamp_prob(y_min) / (1.0 - clamp_prob(y_min)))
                        : std::log(y_min);
    model.dispersion = family == GlmFamily::gamma_log ? 0.0 : 1.0;
    return model;
  }

  Eigen::MatrixXd X(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (std::size_t j = 0; j < parent_cols.size(); ++j) {
      X(i, j + 1) = table.at(i, parent_cols[j]);
    }
  }
  check_full_rank(X, model, table.column(response_col).name);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (family == GlmFamily::gamma_log) beta[0] = std::log(y.mean());

  double dev_prev = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd muv(n), w(n), z(n);
    if (family == GlmFamily::binomial_logit) {
      for (std::size_t i = 0; i < n; ++i) {
        const double m = sigmoid(eta[i]);
        const double var = std::max(m * (1.0 - m), 1e-10);
        muv[i] = m;
        w[i] = var;
        z[i] = eta[i] + (y[i] - m) / var;
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const double m = std::exp(eta[i]);
        muv[i] = m;
        w[i] = 1.0;  // Fisher weight for gamma with log link
        z[i] = eta[i] + (y[i] - m) / m;
      }
    }
    Eigen::MatrixXd XtWX = X.transpose() * w.asDiagonal() * X;
    XtWX.diagonal().array() += 1e-10;  // numerical guard only
    Eigen::VectorXd XtWz = X.transpose() * (w.asDiagonal() * z);
    beta = XtWX.ldlt().solve(XtWz);

    Eigen::VectorXd mu_new(n);
    Eigen::VectorXd eta_new = X * beta;
    for (std::size_t i = 0; i < n; ++i) {
      mu_new[i] = family == GlmFamily::binomial_logit ? sigmoid(eta_new[i])
                                                      : std::exp(eta_new[i]);
    }
    const double dev = family == GlmFamily::binomial_logit ? binomial_deviance(y, mu_new)
                                                           : gamma_deviance(y, mu_new);
    if (std::isfinite(dev_prev) &&
        std::fabs(dev - dev_prev) < 1e-10 * (std::fabs(dev_prev) + 1e-10)) {
      dev_prev = dev;
      break;
    }
    dev_prev = dev;
  }

  for (std::size_t j = 0; j < p; ++j) model.coef[j] = beta[j];

  if (family == GlmFamily::gamma_log) {
    // Pearson dispersion: sum of squared scaled residuals over n - p.
    Eigen::VectorXd eta = X * beta;
    double pearson = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = std::exp(eta[i]);
      const double r = (y[i] - m) / m;
      pearson += r * r;
    }
    const double dof = static_cast<double>(n) - static_cast<double>(p);
    model.dispersion = dof > 0 ? pearson / dof : pearson;
  }
  return model;
}

}  // namespace privscore
