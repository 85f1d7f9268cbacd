#include "fracback/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fracback/errors.hpp"

namespace fracback {

namespace {

constexpr double kPi = std::numbers::pi;

// Largest exponent passed to std::exp in weighted norms before the result
// is treated as an overflow (exp(700) is still finite in binary64).
constexpr double kExpGuard = 700.0;

}  // namespace

SpectralField SpectralField::mode(std::size_t p, double amplitude) {
  SpectralField f(p);
  f.coeffs[p] = amplitude;
  return f;
}

double midpoint_node(std::size_t n, std::size_t k) {
  return kPi * (2.0 * static_cast<double>(k) - 1.0) /
         (2.0 * static_cast<double>(n));
}

double eigenfunction_value(std::size_t p, double x) {
  if (x < 0.0 || x > kPi) {
    throw validation_error("eigenfunction_value: x = " + std::to_string(x) +
                           " outside [0, pi]");
  }
  if (p == 0) {
    return 1.0 / std::sqrt(kPi);
  }
  return std::sqrt(2.0 / kPi) * std::cos(static_cast<double>(p) * x);
}

GridSamples synthesize(const SpectralField& field, std::size_t n) {
  if (n < 2) {
    throw validation_error("synthesize: node count must be >= 2, got " +
                           std::to_string(n));
  }
  GridSamples out;
  out.n = n;
  out.values.resize(n, 0.0);
  const double c0 = field.at(0) / std::sqrt(kPi);
  const double scale = std::sqrt(2.0 / kPi);
  for (std::size_t k = 1; k <= n; ++k) {
    const double x = midpoint_node(n, k);
    double v = c0;
    for (std::size_t p = 1; p < field.coeffs.size(); ++p) {
      if (field.coeffs[p] != 0.0) {
        v += field.coeffs[p] * scale * std::cos(static_cast<double>(p) * x);
      }
    }
    out.values[k - 1] = v;
  }
  return out;
}

double discrete_coefficient(const GridSamples& samples, std::size_t p) {
  const std::size_t n = samples.n;
  if (p >= n) {
    throw validation_error("discrete_coefficient: mode " + std::to_string(p) +
                           " out of range for n = " + std::to_string(n));
  }
  double acc = 0.0;
  if (p == 0) {
    for (double v : samples.values) acc += v;
    return acc / static_cast<double>(n);
  }
  const double scale = std::sqrt(2.0 / kPi);
  for (std::size_t k = 1; k <= n; ++k) {
    acc += samples.values[k - 1] * scale *
           std::cos(static_cast<double>(p) * midpoint_node(n, k));
  }
  return acc * kPi / static_cast<double>(n);
}

double aliasing_tail(const SpectralField& field, std::size_t n,
                     std::size_t p) {
  if (p >= n) {
    throw validation_error("aliasing_tail: mode " + std::to_string(p) +
                           " out of range for n = " + std::to_string(n));
  }
  const std::size_t cap = field.cap();
  double tail = 0.0;
  if (p == 0) {
    // Mean channel: modes 2ln alias onto the constant with sign (-1)^l and
    // the cosine normalization sqrt(2/pi).
    for (std::size_t l = 1; 2 * l * n <= cap; ++l) {
      const double sign = (l % 2 == 0) ? 1.0 : -1.0;
      tail += sign * std::sqrt(2.0 / kPi) * field.coeffs[2 * l * n];
    }
    return tail;
  }
  for (std::size_t l = 1; 2 * l * n - p <= cap; ++l) {
    const double sign = (l % 2 == 0) ? 1.0 : -1.0;
    double term = field.at(2 * l * n - p);
    if (2 * l * n + p <= cap) {
      term += field.coeffs[2 * l * n + p];
    }
    tail += sign * term;
  }
  return tail;
}

SpectralField project(const GridSamples& samples, std::size_t cap) {
  SpectralField out(cap);
  out.coeffs[0] = std::sqrt(kPi) * discrete_coefficient(samples, 0);
  const std::size_t top = std::min(cap, samples.n - 1);
  for (std::size_t p = 1; p <= top; ++p) {
    out.coeffs[p] = discrete_coefficient(samples, p);
  }
  return out;
}

SpectralField frac_laplacian_apply(const SpectralField& field, double beta) {
  if (!(beta > 0.0)) {
    throw validation_error("frac_laplacian_apply: beta must be > 0, got " +
                           std::to_string(beta));
  }
  SpectralField out = field;
  if (!out.coeffs.empty()) {
    out.coeffs[0] = 0.0;
  }
  for (std::size_t p = 1; p < out.coeffs.size(); ++p) {
    out.coeffs[p] *= std::pow(static_cast<double>(p), 2.0 * beta);
  }
  return out;
}

double norm(const SpectralField& field, const NormSpec& spec) {
  double acc = 0.0;
  switch (spec.kind) {
    case NormSpec::Kind::l2:
      for (double c : field.coeffs) acc += c * c;
      break;
    case NormSpec::Kind::h_gamma:
      if (spec.gamma == 0.0) {
        for (double c : field.coeffs) acc += c * c;
        break;
      }
      for (std::size_t p = 1; p < field.coeffs.size(); ++p) {
        const double c = field.coeffs[p];
        if (c != 0.0) {
          acc += std::pow(static_cast<double>(p), 4.0 * spec.gamma) * c * c;
        }
      }
      break;
    case NormSpec::Kind::v_tilde:
      for (std::size_t p = 1; p < field.coeffs.size(); ++p) {
        const double c = field.coeffs[p];
        if (c == 0.0) continue;  // skip so an over-range weight cannot 0*inf
        const double pd = static_cast<double>(p);
        const double exponent =
            2.0 * spec.T * spec.a0 * std::pow(pd, 2.0 * spec.beta);
        if (exponent > kExpGuard) {
          throw numerical_error(
              "norm: Gevrey weight exp(" + std::to_string(exponent) +
              ") at mode " + std::to_string(p) + " exceeds floating range");
        }
        acc += std::pow(pd, 4.0 * spec.beta) * std::exp(exponent) * c * c;
        if (!std::isfinite(acc)) {
          throw numerical_error(
              "norm: Gevrey-weighted sum overflowed at mode " +
              std::to_string(p));
        }
      }
      break;
  }
  return std::sqrt(acc);
}

SpectralField add_scaled(const SpectralField& a, const SpectralField& b,
                         double scale) {
  SpectralField out(std::max(a.cap(), b.cap()));
  for (std::size_t p = 0; p < out.coeffs.size(); ++p) {
    out.coeffs[p] = a.at(p) + scale * b.at(p);
  }
  return out;
}

double l2_distance(const SpectralField& a, const SpectralField& b) {
  const std::size_t top = std::max(a.coeffs.size(), b.coeffs.size());
  double acc = 0.0;
  for (std::size_t p = 0; p < top; ++p) {
    const double d = a.at(p) - b.at(p);
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace fracback
