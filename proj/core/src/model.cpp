#include "tbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tbm {

std::string_view toString(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::Bernoulli: return "bernoulli";
    case NoiseFamily::Poisson: return "poisson";
    case NoiseFamily::Aggregated: return "aggregated";
  }
  return "unknown";
}

NoiseFamily parseNoiseFamily(std::string_view name) {
  if (name == "bernoulli" || name == "Bernoulli") return NoiseFamily::Bernoulli;
  if (name == "poisson" || name == "Poisson") return NoiseFamily::Poisson;
  if (name == "aggregated" || name == "Aggregated") return NoiseFamily::Aggregated;
  throw std::invalid_argument("unknown noise family '" + std::string(name) +
                              "' (expected bernoulli, poisson or aggregated)");
}

std::vector<std::size_t> TbmSpec::dims() const {
  std::vector<std::size_t> d;
  d.reserve(memberships.size());
  for (const auto& z : memberships) d.push_back(z.size());
  return d;
}

void TbmSpec::validate() const {
  if (!std::isfinite(rho) || rho < 0.0) throw std::invalid_argument("density rho must be finite and nonnegative");
  if (memberships.empty()) throw std::invalid_argument("model needs at least one mode");
  if (core.order() != memberships.size()) {
    throw std::invalid_argument("core order " + std::to_string(core.order()) + " does not match " +
                                std::to_string(memberships.size()) + " membership vectors");
  }
  for (std::size_t k = 0; k < memberships.size(); ++k) {
    if (memberships[k].empty()) throw std::invalid_argument("membership vector " + std::to_string(k) + " is empty");
    const std::size_t r = core.extent(k);
    for (std::size_t label : memberships[k]) {
      if (label >= r) {
        throw std::invalid_argument("mode " + std::to_string(k) + " label " + std::to_string(label) +
                                    " outside [0, " + std::to_string(r) + ")");
      }
    }
  }
  for (double s : core.data()) {
    if (!(s >= -1.0 && s <= 1.0)) throw std::invalid_argument("core entries must lie in [-1, 1]");
    if (noise == NoiseFamily::Bernoulli) {
      const double p = rho * s;
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("Bernoulli model needs rho * core entries in [0, 1], got " + std::to_string(p));
      }
    }
  }
}

Labels balancedLabels(std::size_t n, std::size_t r) {
  if (r == 0 || r > n) throw std::invalid_argument("balanced labels need 1 <= r <= n");
  Labels z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = i * r / n;
  return z;
}

DenseMatrix membershipMatrix(std::span<const std::size_t> labels, std::size_t r) {
  DenseMatrix z(labels.size(), r);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= r) throw std::invalid_argument("label out of range in membership matrix");
    z(i, labels[i]) = 1.0;
  }
  return z;
}

std::vector<std::size_t> clusterSizes(std::span<const std::size_t> labels, std::size_t r) {
  std::vector<std::size_t> sizes(r, 0);
  for (std::size_t l : labels) {
    if (l >= r) throw std::invalid_argument("label out of range");
    ++sizes[l];
  }
  return sizes;
}

TbmSpec symmetricSpec(double rho, DenseTensor core, std::size_t n, NoiseFamily noise) {
  TbmSpec spec;
  spec.rho = rho;
  spec.noise = noise;
  const std::size_t d = core.order();
  const std::size_t r = core.extent(0);
  for (std::size_t k = 1; k < d; ++k) {
    if (core.extent(k) != r) throw std::invalid_argument("symmetric spec needs equal core extents");
  }
  spec.core = std::move(core);
  spec.memberships.assign(d, balancedLabels(n, r));
  spec.validate();
  return spec;
}

namespace {

// Visits every entry of the data tensor in storage order together with the
// flat index of the core entry it draws its mean from.
template <typename Fn>
void forEachEntry(const TbmSpec& spec, Fn&& fn) {
  const std::size_t d = spec.order();
  const auto dims = spec.dims();
  std::vector<std::size_t> core_stride(d, 1);
  for (std::size_t k = d - 1; k > 0; --k) core_stride[k - 1] = core_stride[k] * spec.core.extent(k);

  std::vector<std::size_t> index(d, 0);
  std::size_t core_flat = 0;
  for (std::size_t k = 0; k < d; ++k) core_flat += spec.memberships[k][0] * core_stride[k];

  const std::size_t total = productOf(dims);
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(flat, core_flat);
    for (std::size_t k = d; k-- > 0;) {
      const auto& z = spec.memberships[k];
      core_flat -= z[index[k]] * core_stride[k];
      if (++index[k] < dims[k]) {
        core_flat += z[index[k]] * core_stride[k];
        break;
      }
      index[k] = 0;
      core_flat += z[0] * core_stride[k];
    }
  }
}

}  // namespace

DenseTensor signalTensor(const TbmSpec& spec) {
  spec.validate();
  DenseTensor x(spec.dims());
  auto out = x.data();
  const auto core = spec.core.data();
  const double rho = spec.rho;
  forEachEntry(spec, [&](std::size_t flat, std::size_t c) { out[flat] = rho * core[c]; });
  return x;
}

std::uint64_t samplePoisson(double mean, SplitMix64& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("Poisson mean must be finite and nonnegative");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Sequential inversion.
    double p = std::exp(-mean);
    double cdf = p;
    const double u = rng.uniform();
    std::uint64_t k = 0;
    while (u > cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (p <= 0.0) break;  // u within rounding of 1
    }
    return k;
  }
  // Transformed rejection with squeeze (Hormann's PTRS).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

DenseTensor sample(const TbmSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.noise == NoiseFamily::Aggregated) {
    throw std::invalid_argument("aggregated specs cannot be sampled; aggregate a sampled tensor instead");
  }
  DenseTensor y(spec.dims());
  auto out = y.data();
  const auto core = spec.core.data();
  const double rho = spec.rho;

  if (spec.noise == NoiseFamily::Bernoulli) {
    forEachEntry(spec, [&](std::size_t flat, std::size_t c) {
      const double p = rho * core[c];
      out[flat] = (p > 0.0 && counterUniform(seed, flat) < p) ? 1.0 : 0.0;
    });
  } else {
    for (double s : core) {
      if (rho * s < 0.0) throw std::invalid_argument("Poisson model needs nonnegative means");
    }
    const std::uint64_t key = mix64(seed);
    forEachEntry(spec, [&](std::size_t flat, std::size_t c) {
      const double mean = rho * core[c];
      if (mean == 0.0) return;
      SplitMix64 rng(mix64(key ^ (flat * 0xd1b54a32d192ed03ULL)));
      out[flat] = static_cast<double>(samplePoisson(mean, rng));
    });
  }
  return y;
}

double modeSeparation(const DenseTensor& core, std::size_t mode) {
  const DenseMatrix m = matricize(core, mode);
  if (m.rows() < 2) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m.rows(); ++a) {
    for (std::size_t b = a + 1; b < m.rows(); ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < m.cols(); ++j) {
        const double diff = m(a, j) - m(b, j);
        s += diff * diff;
      }
      best = std::min(best, std::sqrt(s));
    }
  }
  return best / std::sqrt(static_cast<double>(m.cols()));
}

double modeBalance(std::span<const std::size_t> labels, std::size_t r) {
  const auto sizes = clusterSizes(labels, r);
  const double expected = static_cast<double>(labels.size()) / static_cast<double>(r);
  const auto smallest = *std::min_element(sizes.begin(), sizes.end());
  return static_cast<double>(smallest) / expected;
}

ModelDiagnostics diagnostics(const TbmSpec& spec) {
  spec.validate();
  ModelDiagnostics diag;
  for (std::size_t k = 0; k < spec.order(); ++k) {
    diag.separations.push_back(modeSeparation(spec.core, k));
    const double alpha = modeBalance(spec.memberships[k], spec.core.extent(k));
    if (alpha == 0.0) {
      diag.warnings.push_back("mode " + std::to_string(k) + " has an empty cluster; balance reported as 0");
    }
    diag.balances.push_back(alpha);
  }
  return diag;
}

TbmSpec aggregateSpec(const TbmSpec& spec, std::size_t keep) {
  spec.validate();
  const std::size_t d = spec.order();
  if (keep < 1 || keep >= d) {
    throw std::out_of_range("aggregation must keep between 1 and d-1 modes (d=" + std::to_string(d) +
                            "), got " + std::to_string(keep));
  }
  std::vector<std::vector<std::size_t>> counts;
  std::size_t trailing = 1;
  for (std::size_t k = keep; k < d; ++k) {
    counts.push_back(clusterSizes(spec.memberships[k], spec.core.extent(k)));
    trailing *= spec.memberships[k].size();
  }

  // S'_{j} = (1 / n_{keep+1}...n_d) * sum over trailing labels l of
  //          (prod_k |z_k^{-1}{l_k}|) * S_{j, l}.
  std::vector<std::size_t> kept_ranks(spec.core.dims().begin(), spec.core.dims().begin() + static_cast<long>(keep));
  DenseTensor core(kept_ranks);
  const std::size_t label_block = spec.core.size() / core.size();
  const auto src = spec.core.data();
  std::vector<double> weight(label_block);
  {
    const std::vector<std::size_t> trailing_ranks(spec.core.dims().begin() + static_cast<long>(keep),
                                                  spec.core.dims().end());
    DenseTensor shape(trailing_ranks);
    for (std::size_t l = 0; l < label_block; ++l) {
      const auto idx = shape.multiIndex(l);
      double w = 1.0;
      for (std::size_t k = 0; k < idx.size(); ++k) w *= static_cast<double>(counts[k][idx[k]]);
      weight[l] = w;
    }
  }
  const double scale = static_cast<double>(trailing);
  for (std::size_t j = 0; j < core.size(); ++j) {
    double s = 0.0;
    for (std::size_t l = 0; l < label_block; ++l) s += weight[l] * src[j * label_block + l];
    core.data()[j] = s / scale;
  }

  TbmSpec out;
  out.rho = spec.rho * scale;
  out.core = std::move(core);
  out.memberships.assign(spec.memberships.begin(), spec.memberships.begin() + static_cast<long>(keep));
  out.noise = NoiseFamily::Aggregated;
  return out;
}

double bennettBeta(double t, double sigma2) {
  if (!(t >= 0.0)) throw std::domain_error("bennettBeta needs t >= 0");
  if (!(sigma2 > 0.0)) throw std::domain_error("bennettBeta needs sigma2 > 0");
  // log beta = t - (s2 + t) log(1 + t / s2)
  return std::exp(t - (sigma2 + t) * std::log1p(t / sigma2));
}

TailBounds tailBounds(double t, double sigma2) {
  TailBounds b{};
  b.bennett = bennettBeta(t, sigma2);
  b.bernstein1 = std::exp(-(t * t / 2.0) / (sigma2 + t / 3.0));
  b.bernstein2 = std::exp(-std::min(t * t / (4.0 * sigma2), 3.0 * t / 4.0));
  constexpr double slack = 1e-12;
  if (b.bennett > b.bernstein1 * (1.0 + slack) || b.bernstein1 > b.bernstein2 * (1.0 + slack)) {
    throw std::logic_error("tail bound ordering violated at t=" + std::to_string(t) +
                           ", sigma2=" + std::to_string(sigma2));
  }
  return b;
}

double separationLowerBound(const TbmSpec& spec, std::size_t mode) {
  const auto diag = diagnostics(spec);
  if (mode >= spec.order()) throw std::out_of_range("mode out of range");
  const double delta = diag.separations[mode];
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::domain_error("separation bound needs a finite positive mode separation");
  }
  double alpha_prod = 1.0;
  for (double a : diag.balances) {
    if (!(a > 0.0)) throw std::domain_error("separation bound needs every cluster nonempty");
    alpha_prod *= a;
  }
  const auto dims = spec.dims();
  const double nk = static_cast<double>(dims[mode]);
  const double rk = static_cast<double>(spec.core.extent(mode));
  const double total = static_cast<double>(productOf(dims));
  return alpha_prod / std::sqrt(2.0 * diag.balances[mode]) * (delta * delta / std::sqrt(nk * rk)) * total *
         spec.rho * spec.rho;
}

double kmeansMisclassBound(double noiseNorm, std::size_t r, std::size_t n, double delta, double q) {
  if (!(delta > 0.0)) throw std::domain_error("misclassification bound needs Delta > 0");
  if (n == 0) throw std::domain_error("misclassification bound needs n > 0");
  if (!(q >= 1.0)) throw std::domain_error("relaxation constant Q must be at least 1");
  return 128.0 * q * static_cast<double>(r) * noiseNorm * noiseNorm /
         (static_cast<double>(n) * delta * delta);
}

bool kmeansBoundApplies(double noiseNorm, std::size_t r, std::size_t minClusterSize, double delta,
                        double q) {
  if (!(delta > 0.0)) return false;
  return static_cast<double>(minClusterSize) >
         128.0 * q * static_cast<double>(r) * noiseNorm * noiseNorm / (delta * delta);
}

namespace cores {

DenseTensor uninformative() {
  DenseTensor s({2, 2, 2});
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 2; ++c) s.at({a, b, c}) = ((a ^ b ^ c) == 0) ? 1.0 : 0.0;
  return s;
}

DenseTensor informative() {
  DenseTensor s({2, 2, 2});
  s.at({0, 0, 0}) = 1.0;
  s.at({1, 1, 1}) = 1.0;
  return s;
}

DenseTensor embeddingStudy() {
  DenseTensor s = uninformative();
  for (double& v : s.data()) v = (v == 1.0) ? 1.0 : 0.5;
  return s;
}

}  // namespace cores

}  // namespace tbm
