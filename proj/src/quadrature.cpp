#include "sgpnp/quadrature.hpp"

#include "sgpnp/error.hpp"
#include "sgpnp/parallel.hpp"
#include "sgpnp/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>

namespace sgpnp {

GaussHermiteRule gauss_hermite(std::size_t order)
{
  if (order == 0) {
    throw DomainError("Gauss-Hermite order must be positive");
  }
  static std::mutex mu;
  static std::map<std::size_t, GaussHermiteRule> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(order); it != cache.end()) {
    return it->second;
  }
  auto const n = Eigen::Index(order);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index k = 1; k < n; ++k) {
    off[k - 1] = std::sqrt(double(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  GaussHermiteRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (Eigen::Index i = 0; i < n; ++i) {
    rule.nodes[std::size_t(i)] = eig.eigenvalues()[i];
    double const v = eig.eigenvectors()(0, i);
    rule.weights[std::size_t(i)] = v * v;
  }
  // The exact rule is symmetric about 0; enforce it so odd integrands vanish.
  for (std::size_t i = 0; i < order / 2; ++i) {
    std::size_t const j = order - 1 - i;
    double const x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    double const w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (order % 2 == 1) {
    rule.nodes[order / 2] = 0.0;
  }
  double total = 0.0;
  for (double w : rule.weights) {
    total += w;
  }
  for (double &w : rule.weights) {
    w /= total;
  }
  cache.emplace(order, rule);
  return rule;
}

bool QuadratureSpec::use_quadrature(std::size_t dim) const
{
  switch (method) {
  case ExpectationMethod::Quadrature:
    if (dim > max_quadrature_dim) {
      throw DomainError("dimension " + std::to_string(dim) + " too high for tensor quadrature (limit " +
                        std::to_string(max_quadrature_dim) + ")");
    }
    return true;
  case ExpectationMethod::MonteCarlo:
    return false;
  case ExpectationMethod::Auto:
    return dim <= max_quadrature_dim;
  }
  return false;
}

std::size_t QuadratureSpec::order_for(std::size_t dim) const
{
  if (order != 0) {
    return order;
  }
  return dim <= 2 ? 32 : 20;
}

namespace {

constexpr std::size_t kChunk = 4096;

struct Welford
{
  double count = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;

  explicit Welford(std::size_t d = 0)
    : mean(Eigen::VectorXd::Zero(Eigen::Index(d)))
    , m2(Eigen::VectorXd::Zero(Eigen::Index(d)))
  {
  }

  void add(Eigen::VectorXd const &x)
  {
    count += 1.0;
    Eigen::VectorXd const delta = x - mean;
    mean += delta / count;
    m2 += delta.cwiseProduct(x - mean);
  }

  void merge(Welford const &o)
  {
    if (o.count == 0.0) {
      return;
    }
    double const n = count + o.count;
    Eigen::VectorXd const delta = o.mean - mean;
    mean += delta * (o.count / n);
    m2 += o.m2 + delta.cwiseProduct(delta) * (count * o.count / n);
    count = n;
  }
};

Eigen::VectorXd draw(Rng &rng, std::size_t dim)
{
  Eigen::VectorXd n(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    n[i] = rng.normal();
  }
  return n;
}

} // namespace

Estimate monte_carlo_mean(std::size_t dim, std::size_t out_dim, NoiseFunction const &f, std::size_t samples,
                          std::uint64_t seed)
{
  if (samples < 2) {
    throw DomainError("Monte Carlo needs at least two samples");
  }
  std::size_t const chunks = (samples + kChunk - 1) / kChunk;
  std::vector<Welford> parts(chunks, Welford(out_dim));
  Rng const master(seed);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = master.child(c);
    std::size_t const end = std::min(samples, (c + 1) * kChunk);
    for (std::size_t s = c * kChunk; s < end; ++s) {
      Eigen::VectorXd const v = f(draw(rng, dim));
      if (std::size_t(v.size()) != out_dim) {
        throw ShapeError("Monte Carlo integrand returned the wrong length");
      }
      parts[c].add(v);
    }
  });
  Welford total(out_dim);
  for (auto const &p : parts) {
    total.merge(p);
  }
  Estimate e;
  e.value = total.mean;
  e.std_error = (total.m2 / (total.count - 1.0) / total.count).cwiseSqrt();
  e.samples = samples;
  e.quadrature = false;
  return e;
}

Estimate gaussian_expectation(std::size_t dim, std::size_t out_dim, NoiseFunction const &f, QuadratureSpec const &spec)
{
  if (dim == 0) {
    throw DomainError("expectation over a zero-dimensional noise");
  }
  if (!spec.use_quadrature(dim)) {
    return monte_carlo_mean(dim, out_dim, f, spec.mc_samples, spec.seed);
  }
  auto const rule = gauss_hermite(spec.order_for(dim));
  std::size_t const m = rule.nodes.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) {
    total *= m;
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(Eigen::Index(out_dim));
  Eigen::VectorXd comp = Eigen::VectorXd::Zero(Eigen::Index(out_dim));
  std::vector<std::size_t> idx(dim, 0);
  Eigen::VectorXd n(static_cast<Eigen::Index>(dim));
  for (std::size_t p = 0; p < total; ++p) {
    double w = 1.0;
    for (std::size_t a = 0; a < dim; ++a) {
      n[Eigen::Index(a)] = rule.nodes[idx[a]];
      w *= rule.weights[idx[a]];
    }
    Eigen::VectorXd const v = f(n);
    if (std::size_t(v.size()) != out_dim) {
      throw ShapeError("quadrature integrand returned the wrong length");
    }
    // Kahan summation
    Eigen::VectorXd const y = w * v - comp;
    Eigen::VectorXd const t = acc + y;
    comp = (t - acc) - y;
    acc = t;
    for (std::size_t a = dim; a-- > 0;) {
      if (++idx[a] < m) {
        break;
      }
      idx[a] = 0;
    }
  }
  Estimate e;
  e.value = acc;
  e.std_error = Eigen::VectorXd::Zero(Eigen::Index(out_dim));
  e.samples = total;
  e.quadrature = true;
  return e;
}

MomentStats monte_carlo_moments(std::size_t dim, std::function<double(Eigen::VectorXd const &)> const &f,
                                std::size_t samples, std::uint64_t seed)
{
  if (samples < 2) {
    throw DomainError("Monte Carlo needs at least two samples");
  }
  std::vector<double> values(samples);
  std::size_t const chunks = (samples + kChunk - 1) / kChunk;
  Rng const master(seed);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = master.child(c);
    std::size_t const end = std::min(samples, (c + 1) * kChunk);
    for (std::size_t s = c * kChunk; s < end; ++s) {
      values[s] = f(draw(rng, dim));
    }
  });
  double mean = 0.0;
  for (double v : values) {
    mean += v;
  }
  mean /= double(samples);
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    double const d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  MomentStats st;
  st.samples = samples;
  st.mean = mean;
  st.variance = m2 / double(samples - 1);
  st.fourth_central = m4 / double(samples);
  return st;
}

} // namespace sgpnp
