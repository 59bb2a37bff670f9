#include "oodgnn/decorrelation/rff.hpp"

#include <cmath>
#include <numbers>

#include "oodgnn/errors.hpp"

namespace oodgnn::decorrelation {

RFFBank RFFBank::sample(std::size_t q, Rng& rng) {
  if (q == 0) throw DomainError("RFFBank::sample: q must be >= 1");
  RFFBank bank;
  bank.freqs.reserve(q);
  bank.phases.reserve(q);
  for (std::size_t k = 0; k < q; ++k) {
    bank.freqs.push_back(rng.normal());
    bank.phases.push_back(2.0 * std::numbers::pi * rng.uniform());
  }
  return bank;
}

void RFFBank::validate() const {
  if (freqs.empty() || freqs.size() != phases.size()) {
    throw DomainError("RFFBank: need q >= 1 matching freqs and phases");
  }
  for (double phi : phases) {
    if (!(phi >= 0.0 && phi < 2.0 * std::numbers::pi)) {
      throw DomainError("RFFBank: phase outside [0, 2 pi)");
    }
  }
}

std::vector<double> rff_apply(double x, const RFFBank& bank) {
  std::vector<double> out(bank.q());
  for (std::size_t k = 0; k < bank.q(); ++k)
    out[k] = std::numbers::sqrt2 * std::cos(bank.freqs[k] * x + bank.phases[k]);
  return out;
}

Dense2D rff_map(std::span<const double> values, const RFFBank& bank) {
  Dense2D out(values.size(), bank.q());
  for (std::size_t n = 0; n < values.size(); ++n)
    for (std::size_t k = 0; k < bank.q(); ++k)
      out(n, k) = std::numbers::sqrt2 * std::cos(bank.freqs[k] * values[n] + bank.phases[k]);
  return out;
}

FeatureMaps FeatureMaps::sample(std::size_t dims, std::size_t q, Rng& rng) {
  if (q == 0) throw DomainError("FeatureMaps::sample: q must be >= 1");
  FeatureMaps maps;
  maps.kind_ = FeatureMapKind::random_fourier;
  maps.dims_ = dims;
  maps.q_ = q;
  for (std::size_t i = 0; i < dims; ++i) {
    maps.f_.push_back(RFFBank::sample(q, rng));
    maps.g_.push_back(RFFBank::sample(q, rng));
  }
  return maps;
}

FeatureMaps FeatureMaps::identity(std::size_t dims) {
  FeatureMaps maps;
  maps.kind_ = FeatureMapKind::identity;
  maps.dims_ = dims;
  maps.q_ = 1;
  return maps;
}

Dense2D FeatureMaps::map_f(std::size_t dim, std::span<const double> column) const {
  if (kind_ == FeatureMapKind::identity) {
    return Dense2D(column.size(), 1, std::vector<double>(column.begin(), column.end()));
  }
  return rff_map(column, f_.at(dim));
}

Dense2D FeatureMaps::map_g(std::size_t dim, std::span<const double> column) const {
  if (kind_ == FeatureMapKind::identity) {
    return Dense2D(column.size(), 1, std::vector<double>(column.begin(), column.end()));
  }
  return rff_map(column, g_.at(dim));
}

}  // namespace oodgnn::decorrelation
