#include "sgpnp/gmm.hpp"

#include "sgpnp/error.hpp"
#include "sgpnp/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace sgpnp {

namespace {

constexpr double kWeightTolerance = 1e-12;

bool is_diagonal(Eigen::MatrixXd const &m)
{
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (r != c && m(r, c) != 0.0) {
        return false;
      }
    }
  }
  return true;
}

double log_sum_exp(Eigen::VectorXd const &v)
{
  double const m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

} // namespace

struct GmmPrior::Terms
{
  double log_p = 0.0;
  Eigen::VectorXd r;                   // responsibilities
  std::vector<Eigen::VectorXd> coeff;  // eigenbasis coordinates of x - mu_i
  std::vector<Eigen::VectorXd> inv;    // 1 / (lambda + sigma^2)
};

GmmPrior::GmmPrior(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
                   std::vector<Eigen::MatrixXd> covariances)
  : weights_(std::move(weights))
  , means_(std::move(means))
{
  if (weights_.empty()) {
    throw DomainError("mixture needs at least one component");
  }
  if (means_.size() != weights_.size() || covariances.size() != weights_.size()) {
    throw ShapeError("mixture weights, means and covariances differ in count");
  }
  dim_ = std::size_t(means_.front().size());
  if (dim_ == 0) {
    throw ShapeError("mixture dimension must be positive");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw DomainError("mixture weights must be positive");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw DomainError("mixture weights sum to " + std::to_string(total) + ", expected 1");
  }
  for (double w : weights_) {
    log_weights_.push_back(std::log(w));
  }

  bool all_diagonal = true;
  bool all_isotropic = true;
  for (std::size_t i = 0; i < covariances.size(); ++i) {
    auto const &m = means_[i];
    auto const &s = covariances[i];
    if (std::size_t(m.size()) != dim_ || std::size_t(s.rows()) != dim_ || std::size_t(s.cols()) != dim_) {
      throw ShapeError("mixture component " + std::to_string(i) + " has inconsistent dimension");
    }
    if (!m.allFinite() || !s.allFinite()) {
      throw DomainError("mixture component " + std::to_string(i) + " has non-finite parameters");
    }
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, s.cwiseAbs().maxCoeff())) {
      throw DomainError("covariance " + std::to_string(i) + " is not symmetric");
    }
    if (Eigen::LLT<Eigen::MatrixXd>(s).info() != Eigen::Success) {
      throw DomainError("covariance " + std::to_string(i) + " is not positive definite");
    }
    bool const diag = is_diagonal(s);
    all_diagonal = all_diagonal && diag;
    all_isotropic = all_isotropic && diag && (s.diagonal().array() == s(0, 0)).all();
  }
  type_ = all_isotropic ? CovarianceType::Isotropic : all_diagonal ? CovarianceType::Diagonal : CovarianceType::Full;

  for (auto const &s : covariances) {
    if (type_ == CovarianceType::Full) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()));
      if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
        throw DomainError("covariance eigendecomposition failed");
      }
      lambda_.push_back(eig.eigenvalues());
      basis_.push_back(eig.eigenvectors());
    } else {
      lambda_.push_back(s.diagonal());
    }
  }
}

GmmPrior GmmPrior::isotropic(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
                             std::vector<double> variances)
{
  std::vector<Eigen::MatrixXd> covs;
  for (std::size_t i = 0; i < variances.size(); ++i) {
    std::size_t const d = i < means.size() ? std::size_t(means[i].size()) : 0;
    covs.push_back(variances[i] * Eigen::MatrixXd::Identity(Eigen::Index(d), Eigen::Index(d)));
  }
  return GmmPrior(std::move(weights), std::move(means), std::move(covs));
}

GmmPrior GmmPrior::diagonal(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
                            std::vector<Eigen::VectorXd> variances)
{
  std::vector<Eigen::MatrixXd> covs;
  for (auto const &v : variances) {
    covs.push_back(v.asDiagonal());
  }
  return GmmPrior(std::move(weights), std::move(means), std::move(covs));
}

Eigen::MatrixXd GmmPrior::covariance(std::size_t i) const
{
  if (basis_.empty()) {
    return lambda_[i].asDiagonal();
  }
  return basis_[i] * lambda_[i].asDiagonal() * basis_[i].transpose();
}

Eigen::VectorXd GmmPrior::global_mean() const
{
  Eigen::VectorXd m = Eigen::VectorXd::Zero(Eigen::Index(dim_));
  for (std::size_t i = 0; i < components(); ++i) {
    m += weights_[i] * means_[i];
  }
  return m;
}

Eigen::VectorXd GmmPrior::to_basis(std::size_t i, Eigen::VectorXd const &v) const
{
  return basis_.empty() ? v : Eigen::VectorXd(basis_[i].transpose() * v);
}

Eigen::VectorXd GmmPrior::from_basis(std::size_t i, Eigen::VectorXd const &v) const
{
  return basis_.empty() ? v : Eigen::VectorXd(basis_[i] * v);
}

void GmmPrior::check_input(Eigen::VectorXd const &x, double sigma) const
{
  if (std::size_t(x.size()) != dim_) {
    throw ShapeError("mixture of dimension " + std::to_string(dim_) + " evaluated at a vector of length " +
                     std::to_string(x.size()));
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw DomainError("smoothing level must be finite and nonnegative");
  }
}

GmmPrior::Terms GmmPrior::evaluate(Eigen::VectorXd const &x, double sigma) const
{
  check_input(x, sigma);
  double const s2 = sigma * sigma;
  double const log2pi = std::log(2.0 * std::numbers::pi);
  std::size_t const k = components();
  Terms t;
  t.coeff.resize(k);
  t.inv.resize(k);
  Eigen::VectorXd logc(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    Eigen::ArrayXd const var = lambda_[i].array() + s2;
    t.coeff[i] = to_basis(i, x - means_[i]);
    t.inv[i] = var.inverse().matrix();
    double const quad = (t.coeff[i].array().square() * t.inv[i].array()).sum();
    logc[Eigen::Index(i)] = log_weights_[i] - 0.5 * (double(dim_) * log2pi + var.log().sum() + quad);
  }
  t.log_p = log_sum_exp(logc);
  t.r = (logc.array() - t.log_p).exp().matrix();
  return t;
}

double GmmPrior::logpdf(Eigen::VectorXd const &x, double sigma) const { return evaluate(x, sigma).log_p; }

Eigen::VectorXd GmmPrior::responsibilities(Eigen::VectorXd const &x, double sigma) const
{
  return evaluate(x, sigma).r;
}

Eigen::VectorXd GmmPrior::score(Eigen::VectorXd const &x, double sigma) const
{
  auto const t = evaluate(x, sigma);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(Eigen::Index(dim_));
  for (std::size_t i = 0; i < components(); ++i) {
    s -= t.r[Eigen::Index(i)] * from_basis(i, t.inv[i].cwiseProduct(t.coeff[i]));
  }
  return s;
}

Eigen::MatrixXd GmmPrior::score_jacobian(Eigen::VectorXd const &x, double sigma) const
{
  auto const t = evaluate(x, sigma);
  auto const d = Eigen::Index(dim_);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < components(); ++i) {
    double const r = t.r[Eigen::Index(i)];
    Eigen::VectorXd const si = -from_basis(i, t.inv[i].cwiseProduct(t.coeff[i]));
    Eigen::MatrixXd precision = basis_.empty()
                                  ? Eigen::MatrixXd(t.inv[i].asDiagonal())
                                  : Eigen::MatrixXd(basis_[i] * t.inv[i].asDiagonal() * basis_[i].transpose());
    h += r * (si * si.transpose() - precision);
    s += r * si;
  }
  h -= s * s.transpose();
  return 0.5 * (h + h.transpose());
}

Eigen::VectorXd GmmPrior::denoise(Eigen::VectorXd const &x, double sigma) const
{
  auto const t = evaluate(x, sigma);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(Eigen::Index(dim_));
  for (std::size_t i = 0; i < components(); ++i) {
    // Sigma_i (Sigma_i + sigma^2 I)^-1 is diagonal in the eigenbasis.
    Eigen::VectorXd const gain = lambda_[i].cwiseProduct(t.inv[i]);
    out += t.r[Eigen::Index(i)] * (means_[i] + from_basis(i, gain.cwiseProduct(t.coeff[i])));
  }
  return out;
}

Eigen::MatrixXd GmmPrior::posterior_cov(Eigen::VectorXd const &x, double sigma) const
{
  auto const t = evaluate(x, sigma);
  auto const d = Eigen::Index(dim_);
  double const s2 = sigma * sigma;
  std::vector<Eigen::VectorXd> m(components());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < components(); ++i) {
    Eigen::VectorXd const gain = lambda_[i].cwiseProduct(t.inv[i]);
    m[i] = means_[i] + from_basis(i, gain.cwiseProduct(t.coeff[i]));
    mean += t.r[Eigen::Index(i)] * m[i];
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < components(); ++i) {
    double const r = t.r[Eigen::Index(i)];
    Eigen::VectorXd const c = s2 * lambda_[i].cwiseProduct(t.inv[i]);
    Eigen::MatrixXd const ci = basis_.empty() ? Eigen::MatrixXd(c.asDiagonal())
                                               : Eigen::MatrixXd(basis_[i] * c.asDiagonal() * basis_[i].transpose());
    Eigen::VectorXd const dm = m[i] - mean;
    cov += r * (ci + dm * dm.transpose());
  }
  return 0.5 * (cov + cov.transpose());
}

Eigen::VectorXd GmmPrior::sample(Rng &rng) const
{
  double const u = rng.uniform();
  std::size_t i = 0;
  double acc = weights_[0];
  while (u >= acc && i + 1 < components()) {
    ++i;
    acc += weights_[i];
  }
  Eigen::VectorXd z(static_cast<Eigen::Index>(dim_));
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    z[j] = rng.normal();
  }
  return means_[i] + from_basis(i, lambda_[i].cwiseSqrt().cwiseProduct(z));
}

nlohmann::json GmmPrior::to_json() const
{
  nlohmann::json j;
  j["weights"] = weights_;
  j["means"] = nlohmann::json::array();
  for (auto const &m : means_) {
    j["means"].push_back(std::vector<double>(m.data(), m.data() + m.size()));
  }
  nlohmann::json data = nlohmann::json::array();
  for (std::size_t i = 0; i < components(); ++i) {
    if (type_ == CovarianceType::Isotropic) {
      data.push_back(lambda_[i][0]);
    } else if (type_ == CovarianceType::Diagonal) {
      data.push_back(std::vector<double>(lambda_[i].data(), lambda_[i].data() + lambda_[i].size()));
    } else {
      Eigen::MatrixXd const c = covariance(i);
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index r = 0; r < c.rows(); ++r) {
        Eigen::VectorXd const row = c.row(r);
        rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
      }
      data.push_back(rows);
    }
  }
  char const *type = type_ == CovarianceType::Isotropic ? "isotropic"
                     : type_ == CovarianceType::Diagonal ? "diagonal"
                                                         : "full";
  j["covariances"] = {{"type", type}, {"data", data}};
  return j;
}

GmmPrior GmmPrior::from_json(nlohmann::json const &j)
{
  try {
    for (auto const &[key, value] : j.items()) {
      if (key != "weights" && key != "means" && key != "covariances") {
        throw DomainError("unknown prior key '" + key + "'");
      }
    }
    auto weights = j.at("weights").get<std::vector<double>>();
    std::vector<Eigen::VectorXd> means;
    for (auto const &m : j.at("means")) {
      auto const v = m.get<std::vector<double>>();
      means.push_back(Eigen::Map<Eigen::VectorXd const>(v.data(), Eigen::Index(v.size())));
    }
    auto const &cov = j.at("covariances");
    auto const type = cov.at("type").get<std::string>();
    auto const &data = cov.at("data");
    if (data.size() != weights.size()) {
      throw ShapeError("covariance count does not match weights");
    }
    if (type == "isotropic") {
      return isotropic(std::move(weights), std::move(means), data.get<std::vector<double>>());
    }
    if (type == "diagonal") {
      std::vector<Eigen::VectorXd> vars;
      for (auto const &d : data) {
        auto const v = d.get<std::vector<double>>();
        vars.push_back(Eigen::Map<Eigen::VectorXd const>(v.data(), Eigen::Index(v.size())));
      }
      return diagonal(std::move(weights), std::move(means), std::move(vars));
    }
    if (type == "full") {
      std::vector<Eigen::MatrixXd> covs;
      for (auto const &d : data) {
        auto const rows = d.get<std::vector<std::vector<double>>>();
        Eigen::MatrixXd m(Eigen::Index(rows.size()), Eigen::Index(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != rows.size()) {
            throw ShapeError("full covariance must be square");
          }
          for (std::size_t c = 0; c < rows.size(); ++c) {
            m(Eigen::Index(r), Eigen::Index(c)) = rows[r][c];
          }
        }
        covs.push_back(std::move(m));
      }
      return GmmPrior(std::move(weights), std::move(means), std::move(covs));
    }
    throw DomainError("unknown covariance type '" + type + "'");
  } catch (nlohmann::json::exception const &e) {
    throw DomainError(std::string("malformed prior: ") + e.what());
  }
}

GmmPrior GmmPrior::load(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open prior file " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (nlohmann::json::exception const &e) {
    throw IoError("cannot parse prior file " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::size_t block_count(GmmPrior const &prior, Signal const &x)
{
  if (x.size() == 0 || x.size() % prior.dim() != 0) {
    throw ShapeError("signal of " + std::to_string(x.size()) + " scalars is not a stack of " +
                     std::to_string(prior.dim()) + "-dimensional blocks");
  }
  return x.size() / prior.dim();
}

namespace {

Eigen::Map<Eigen::VectorXd const> block(Signal const &x, std::size_t b, std::size_t d)
{
  return {x.data().data() + b * d, Eigen::Index(d)};
}

template <typename F>
Signal map_blocks(GmmPrior const &prior, Signal const &x, F &&f)
{
  std::size_t const n = block_count(prior, x);
  std::size_t const d = prior.dim();
  Signal out = Signal::zeros_like(x);
  for (std::size_t b = 0; b < n; ++b) {
    Eigen::VectorXd const v = f(Eigen::VectorXd(block(x, b, d)));
    std::copy(v.data(), v.data() + d, out.data().data() + b * d);
  }
  return out;
}

template <typename F>
Eigen::MatrixXd block_matrix(GmmPrior const &prior, Signal const &x, F &&f)
{
  std::size_t const n = block_count(prior, x);
  auto const d = Eigen::Index(prior.dim());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Eigen::Index(x.size()), Eigen::Index(x.size()));
  for (std::size_t b = 0; b < n; ++b) {
    out.block(Eigen::Index(b) * d, Eigen::Index(b) * d, d, d) = f(Eigen::VectorXd(block(x, b, prior.dim())));
  }
  return out;
}

} // namespace

double gmm_smoothed_logpdf(GmmPrior const &prior, Signal const &x, double sigma)
{
  std::size_t const n = block_count(prior, x);
  double total = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    total += prior.logpdf(block(x, b, prior.dim()), sigma);
  }
  return total;
}

Signal gmm_smoothed_score(GmmPrior const &prior, Signal const &x, double sigma)
{
  return map_blocks(prior, x, [&](Eigen::VectorXd const &v) { return prior.score(v, sigma); });
}

Signal gmm_mmse_denoise(GmmPrior const &prior, Signal const &x, double sigma)
{
  return map_blocks(prior, x, [&](Eigen::VectorXd const &v) { return prior.denoise(v, sigma); });
}

Eigen::MatrixXd gmm_posterior_cov(GmmPrior const &prior, Signal const &x, double sigma)
{
  return block_matrix(prior, x, [&](Eigen::VectorXd const &v) { return prior.posterior_cov(v, sigma); });
}

Eigen::MatrixXd gmm_score_jacobian(GmmPrior const &prior, Signal const &x, double sigma)
{
  return block_matrix(prior, x, [&](Eigen::VectorXd const &v) { return prior.score_jacobian(v, sigma); });
}

Signal gmm_sample(GmmPrior const &prior, Rng &rng, Shape const &shape, bool is_complex)
{
  Signal out(shape, is_complex);
  std::size_t const n = block_count(prior, out);
  std::size_t const d = prior.dim();
  for (std::size_t b = 0; b < n; ++b) {
    Eigen::VectorXd const v = prior.sample(rng);
    std::copy(v.data(), v.data() + d, out.data().data() + b * d);
  }
  return out;
}

} // namespace sgpnp
