#include <algorithm>
#include <cmath>

#include "eea/error.hpp"
#include "eea/util.hpp"
#include "models_detail.hpp"

namespace eea {

namespace detail {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

constexpr double kJitter = 1e-8;     // added to the Hessian diagonal
constexpr double kWeightFloor = 1e-8;  // floor on p(1-p) in IRLS weights

struct Standardized {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<double> values;  // row-major, standardized copy
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;

  double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
};

Standardized standardize(const FeatureMatrix& X) {
  Standardized s;
  s.n_rows = X.n_rows;
  s.n_cols = X.n_cols();
  s.mean.assign(s.n_cols, 0.0);
  s.scale.assign(s.n_cols, 1.0);
  for (std::size_t r = 0; r < X.n_rows; ++r)
    for (std::size_t c = 0; c < s.n_cols; ++c) s.mean[c] += X.at(r, c);
  for (double& m : s.mean) m /= static_cast<double>(X.n_rows);
  std::vector<double> var(s.n_cols, 0.0);
  for (std::size_t r = 0; r < X.n_rows; ++r)
    for (std::size_t c = 0; c < s.n_cols; ++c) {
      const double d = X.at(r, c) - s.mean[c];
      var[c] += d * d;
    }
  for (std::size_t c = 0; c < s.n_cols; ++c) {
    const double sd = std::sqrt(var[c] / static_cast<double>(X.n_rows));
    s.scale[c] = sd > 0.0 ? sd : 1.0;  // constant columns stay centered
  }
  s.values.resize(X.n_rows * s.n_cols);
  for (std::size_t r = 0; r < X.n_rows; ++r)
    for (std::size_t c = 0; c < s.n_cols; ++c)
      s.values[r * s.n_cols + c] = (X.at(r, c) - s.mean[c]) / s.scale[c];
  return s;
}

// Cholesky solve of A x = b for symmetric positive definite A (row-major).
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b,
                                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (sum <= 0.0)
          throw Error(ErrorCode::NonConvergence,
                      "Hessian is not positive definite despite jitter");
        a[i * n + j] = std::sqrt(sum);
      } else {
        a[i * n + j] = sum / a[j * n + j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= a[i * n + k] * b[k];
    b[i] = sum / a[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double sum = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) sum -= a[k * n + ii] * b[k];
    b[ii] = sum / a[ii * n + ii];
  }
  return b;
}

double penalized_loss(const Standardized& sx, std::span<const double> y,
                      double intercept, std::span<const double> beta, double l2,
                      double l1) {
  const double n = static_cast<double>(sx.n_rows);
  double loss = 0.0;
  for (std::size_t r = 0; r < sx.n_rows; ++r) {
    double lin = intercept;
    for (std::size_t c = 0; c < sx.n_cols; ++c) lin += beta[c] * sx.at(r, c);
    // -log sigmoid(z) = log(1 + e^{-z}); stable at both tails
    loss += y[r] > 0.5 ? std::log1p(std::exp(-lin)) : std::log1p(std::exp(-lin)) + lin;
  }
  loss /= n;
  for (const double b : beta) loss += 0.5 * l2 * b * b + l1 * std::abs(b);
  return loss;
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Logistic regression: damped Newton on the L2-penalized log loss.

std::unique_ptr<LinearLogisticModel> LinearLogisticModel::fit_logistic(
    const ModelSpec& spec, const FeatureMatrix& X, std::span<const double> y) {
  const double l2 = spec.hyper("l2", 1e-6);
  const int max_iter = static_cast<int>(spec.hyper("max_iter", 500));
  const double tol = spec.hyper("tol", 1e-8);

  const Standardized sx = standardize(X);
  const std::size_t p = sx.n_cols;
  const std::size_t dim = p + 1;  // intercept first
  const double n = static_cast<double>(sx.n_rows);

  double ybar = 0.0;
  for (const double v : y) ybar += v;
  ybar /= n;

  std::vector<double> theta(dim, 0.0);
  theta[0] = std::log(ybar / (1.0 - ybar));

  std::vector<double> lin(sx.n_rows), prob(sx.n_rows), w(sx.n_rows);
  double loss = penalized_loss(sx, y, theta[0], {theta.data() + 1, p}, l2, 0.0);

  int iter = 0;
  double max_step = 0.0;
  for (iter = 1; iter <= max_iter; ++iter) {
    for (std::size_t r = 0; r < sx.n_rows; ++r) {
      double z = theta[0];
      for (std::size_t c = 0; c < p; ++c) z += theta[c + 1] * sx.at(r, c);
      lin[r] = z;
      prob[r] = sigmoid(z);
      w[r] = std::max(prob[r] * (1.0 - prob[r]), kWeightFloor);
    }
    // gradient of the penalized mean log loss
    std::vector<double> grad(dim, 0.0);
    for (std::size_t r = 0; r < sx.n_rows; ++r) {
      const double res = prob[r] - y[r];
      grad[0] += res;
      for (std::size_t c = 0; c < p; ++c) grad[c + 1] += res * sx.at(r, c);
    }
    for (double& g : grad) g /= n;
    for (std::size_t c = 0; c < p; ++c) grad[c + 1] += l2 * theta[c + 1];

    // Hessian = X~' W X~ / n + l2 on slopes + jitter; lower triangle built,
    // then mirrored
    std::vector<double> hess(dim * dim, 0.0);
    for (std::size_t r = 0; r < sx.n_rows; ++r) {
      const double wr = w[r];
      hess[0] += wr;
      for (std::size_t c = 0; c < p; ++c) {
        const double xc = sx.at(r, c) * wr;
        hess[(c + 1) * dim] += xc;
        for (std::size_t c2 = 0; c2 <= c; ++c2)
          hess[(c + 1) * dim + (c2 + 1)] += xc * sx.at(r, c2);
      }
    }
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < i; ++j) hess[j * dim + i] = hess[i * dim + j];
    for (double& hval : hess) hval /= n;
    for (std::size_t c = 1; c < dim; ++c) hess[c * dim + c] += l2;
    for (std::size_t i = 0; i < dim; ++i) hess[i * dim + i] += kJitter;

    std::vector<double> neg_grad(dim);
    for (std::size_t i = 0; i < dim; ++i) neg_grad[i] = -grad[i];
    const std::vector<double> step = cholesky_solve(std::move(hess), std::move(neg_grad), dim);

    // damping: halve until the penalized loss does not increase
    double scale = 1.0;
    std::vector<double> trial(dim);
    double trial_loss = 0.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      for (std::size_t i = 0; i < dim; ++i) trial[i] = theta[i] + scale * step[i];
      trial_loss = penalized_loss(sx, y, trial[0], {trial.data() + 1, p}, l2, 0.0);
      if (trial_loss <= loss + 1e-14) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;  // stationary within damping resolution

    max_step = 0.0;
    for (std::size_t i = 0; i < dim; ++i)
      max_step = std::max(max_step, std::abs(trial[i] - theta[i]));
    theta = trial;
    loss = trial_loss;
    if (max_step < tol) break;
  }
  if (iter > max_iter) {
    // report the gradient norm at the final iterate
    std::vector<double> grad(dim, 0.0);
    for (std::size_t r = 0; r < sx.n_rows; ++r) {
      double z = theta[0];
      for (std::size_t c = 0; c < p; ++c) z += theta[c + 1] * sx.at(r, c);
      const double res = sigmoid(z) - y[r];
      grad[0] += res;
      for (std::size_t c = 0; c < p; ++c) grad[c + 1] += res * sx.at(r, c);
    }
    double gnorm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) gnorm += (grad[i] / n) * (grad[i] / n);
    gnorm = std::sqrt(gnorm);
    throw Error(ErrorCode::NonConvergence,
                "IRLS did not converge in " + std::to_string(max_iter) +
                    " iterations (last step " + fmt_double(max_step) +
                    ", gradient norm " + fmt_double(gnorm) + ")");
  }

  auto model = std::make_unique<LinearLogisticModel>();
  model->spec_ = spec;
  model->schema_ = X.names;
  model->intercept = theta[0];
  model->beta.assign(theta.begin() + 1, theta.end());
  model->mean = sx.mean;
  model->scale = sx.scale;
  return model;
}

// ---------------------------------------------------------------------------
// Elastic-net logistic: outer IRLS quadratic approximation, inner cyclic
// coordinate descent with soft thresholding. Intercept is unpenalized.

std::unique_ptr<LinearLogisticModel> LinearLogisticModel::fit_elastic_net(
    const ModelSpec& spec, const FeatureMatrix& X, std::span<const double> y) {
  const double alpha = spec.hyper("alpha", 0.5);
  const double lambda = spec.hyper("lambda", 1e-3);
  const int max_iter = static_cast<int>(spec.hyper("max_iter", 500));
  const double tol = spec.hyper("tol", 1e-8);
  const double l1 = lambda * alpha;
  const double l2 = lambda * (1.0 - alpha);

  const Standardized sx = standardize(X);
  const std::size_t p = sx.n_cols;
  const double n = static_cast<double>(sx.n_rows);

  double ybar = 0.0;
  for (const double v : y) ybar += v;
  ybar /= n;

  double intercept = std::log(ybar / (1.0 - ybar));
  std::vector<double> beta(p, 0.0);
  std::vector<double> lin(sx.n_rows, 0.0), prob(sx.n_rows), w(sx.n_rows),
      resid(sx.n_rows);

  int iter = 0;
  double outer_step = 0.0;
  for (iter = 1; iter <= max_iter; ++iter) {
    for (std::size_t r = 0; r < sx.n_rows; ++r) {
      double z = intercept;
      for (std::size_t c = 0; c < p; ++c) z += beta[c] * sx.at(r, c);
      lin[r] = z;
      prob[r] = sigmoid(z);
      w[r] = std::max(prob[r] * (1.0 - prob[r]), kWeightFloor);
      // working residual relative to the current fit
      resid[r] = (y[r] - prob[r]) / w[r];
    }
    double w_total = 0.0;
    std::vector<double> wxx(p, 0.0);  // (1/n) sum w x_j^2, fixed per outer iter
    for (std::size_t r = 0; r < sx.n_rows; ++r) {
      w_total += w[r];
      for (std::size_t c = 0; c < p; ++c) {
        const double x = sx.at(r, c);
        wxx[c] += w[r] * x * x;
      }
    }
    for (double& v : wxx) v /= n;

    const double b0_prev = intercept;
    std::vector<double> beta_prev = beta;

    for (int sweep = 0; sweep < 200; ++sweep) {
      double sweep_max = 0.0;
      // intercept update
      {
        double wr = 0.0;
        for (std::size_t r = 0; r < sx.n_rows; ++r) wr += w[r] * resid[r];
        const double delta = wr / w_total;
        intercept += delta;
        for (std::size_t r = 0; r < sx.n_rows; ++r) resid[r] -= delta;
        sweep_max = std::max(sweep_max, std::abs(delta));
      }
      for (std::size_t c = 0; c < p; ++c) {
        if (wxx[c] == 0.0) continue;  // constant column
        double rho = 0.0;
        for (std::size_t r = 0; r < sx.n_rows; ++r)
          rho += w[r] * sx.at(r, c) * resid[r];
        rho = rho / n + wxx[c] * beta[c];
        const double updated = soft_threshold(rho, l1) / (wxx[c] + l2);
        const double delta = updated - beta[c];
        if (delta != 0.0) {
          beta[c] = updated;
          for (std::size_t r = 0; r < sx.n_rows; ++r)
            resid[r] -= delta * sx.at(r, c);
          sweep_max = std::max(sweep_max, std::abs(delta));
        }
      }
      if (sweep_max < 1e-10) break;
    }

    outer_step = std::abs(intercept - b0_prev);
    for (std::size_t c = 0; c < p; ++c)
      outer_step = std::max(outer_step, std::abs(beta[c] - beta_prev[c]));
    if (outer_step < tol) break;
  }
  if (iter > max_iter)
    throw Error(ErrorCode::NonConvergence,
                "coordinate descent did not converge in " + std::to_string(max_iter) +
                    " outer iterations (last step " + fmt_double(outer_step) + ")");

  auto model = std::make_unique<LinearLogisticModel>();
  model->spec_ = spec;
  model->schema_ = X.names;
  model->intercept = intercept;
  model->beta = beta;
  model->mean = sx.mean;
  model->scale = sx.scale;
  return model;
}

std::vector<double> LinearLogisticModel::predict_impl(const FeatureMatrix& X) const {
  std::vector<double> probs(X.n_rows);
  const std::size_t p = beta.size();
  for (std::size_t r = 0; r < X.n_rows; ++r) {
    double z = intercept;
    for (std::size_t c = 0; c < p; ++c)
      z += beta[c] * (X.at(r, c) - mean[c]) / scale[c];
    probs[r] = sigmoid(z);
  }
  return probs;
}

void LinearLogisticModel::serialize_parameters(void* json_object) const {
  json& params = *static_cast<json*>(json_object);
  params["intercept"] = hex_double(intercept);
  params["beta"] = vec_to_json(beta);
  params["mean"] = vec_to_json(mean);
  params["scale"] = vec_to_json(scale);
}

std::unique_ptr<TrainedModel> LinearLogisticModel::from_json(
    const ModelSpec& spec, std::vector<std::string> schema, const json& params) {
  auto model = std::make_unique<LinearLogisticModel>();
  model->spec_ = spec;
  model->schema_ = std::move(schema);
  model->intercept = unhex_double(params.at("intercept").get<std::string>());
  model->beta = vec_from_json(params.at("beta"));
  model->mean = vec_from_json(params.at("mean"));
  model->scale = vec_from_json(params.at("scale"));
  return model;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Unpenalized mean log loss and its gradient in theta = (intercept, beta...),
// on raw (unstandardized) features. The finite-difference checks exercise
// this exact code path.

double log_loss_value(const FeatureMatrix& X, std::span<const double> y,
                      std::span<const double> theta) {
  if (theta.size() != X.n_cols() + 1)
    throw Error(ErrorCode::MisalignedPair, "theta must have n_features + 1 entries");
  double loss = 0.0;
  for (std::size_t r = 0; r < X.n_rows; ++r) {
    double z = theta[0];
    for (std::size_t c = 0; c < X.n_cols(); ++c) z += theta[c + 1] * X.at(r, c);
    loss += y[r] > 0.5 ? std::log1p(std::exp(-z)) : std::log1p(std::exp(-z)) + z;
  }
  return loss / static_cast<double>(X.n_rows);
}

std::vector<double> log_loss_gradient(const FeatureMatrix& X, std::span<const double> y,
                                      std::span<const double> theta) {
  if (theta.size() != X.n_cols() + 1)
    throw Error(ErrorCode::MisalignedPair, "theta must have n_features + 1 entries");
  std::vector<double> grad(theta.size(), 0.0);
  for (std::size_t r = 0; r < X.n_rows; ++r) {
    double z = theta[0];
    for (std::size_t c = 0; c < X.n_cols(); ++c) z += theta[c + 1] * X.at(r, c);
    const double res = detail::sigmoid(z) - y[r];
    grad[0] += res;
    for (std::size_t c = 0; c < X.n_cols(); ++c) grad[c + 1] += res * X.at(r, c);
  }
  for (double& g : grad) g /= static_cast<double>(X.n_rows);
  return grad;
}

}  // namespace eea
