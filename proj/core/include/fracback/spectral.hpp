#pragma once

#include <cstddef>
#include <vector>

namespace fracback {

/// Truncated cosine-coefficient representation of a function on (0, pi).
///
/// The basis is the orthonormal Neumann eigenbasis: phi_0(x) = 1/sqrt(pi) and
/// phi_p(x) = sqrt(2/pi) cos(p x) for p >= 1, so the field represents
/// f(x) = sum_{p=0..cap} coeffs[p] * phi_p(x). In particular the constant
/// function 1 has coeffs[0] = sqrt(pi).
struct SpectralField {
  std::vector<double> coeffs;

  SpectralField() = default;
  /// Zero field truncated at the given mode cap (coeffs has cap+1 entries).
  explicit SpectralField(std::size_t cap) : coeffs(cap + 1, 0.0) {}

  /// Highest representable mode index.
  [[nodiscard]] std::size_t cap() const {
    return coeffs.empty() ? 0 : coeffs.size() - 1;
  }
  /// Coefficient at mode p; zero above the cap.
  [[nodiscard]] double at(std::size_t p) const {
    return p < coeffs.size() ? coeffs[p] : 0.0;
  }

  /// Single-mode basis field: amplitude * phi_p.
  static SpectralField mode(std::size_t p, double amplitude = 1.0);
};

/// Point values f(x_k) at the midpoint nodes x_k = pi (2k-1) / (2n), k=1..n.
struct GridSamples {
  std::size_t n = 0;
  std::vector<double> values;  // values[k-1] = f(x_k)
};

/// Norm selector: L2, the Sobolev scale H_gamma, or the Gevrey-weighted
/// scale V_tilde used for backward-stability classes.
///
/// - l2:      sqrt(sum_{p>=0} c_p^2)
/// - h_gamma: sqrt(sum_{p>=1} p^{4 gamma} c_p^2); gamma = 0 coincides with l2
///            (the zero mode carries weight 0^{4 gamma} with 0^0 = 1).
/// - v_tilde: sqrt(sum_{p>=1} p^{4 beta} exp(2 T a0 p^{2 beta}) c_p^2).
struct NormSpec {
  enum class Kind { l2, h_gamma, v_tilde };
  Kind kind = Kind::l2;
  double gamma = 0.0;  // Sobolev order (h_gamma)
  double T = 0.0;      // Gevrey weight time (v_tilde)
  double a0 = 0.0;     // Gevrey coefficient bound (v_tilde)
  double beta = 0.0;   // fractional order entering the v_tilde weight

  static NormSpec l2() { return {}; }
  static NormSpec sobolev(double gamma) {
    return {Kind::h_gamma, gamma, 0.0, 0.0, 0.0};
  }
  static NormSpec gevrey(double T, double a0, double beta) {
    return {Kind::v_tilde, 0.0, T, a0, beta};
  }
};

/// Midpoint node x_k = pi (2k-1) / (2n) for k = 1..n.
[[nodiscard]] double midpoint_node(std::size_t n, std::size_t k);

/// Orthonormal eigenfunction value: sqrt(2/pi) cos(p x) for p >= 1,
/// 1/sqrt(pi) for p = 0. Throws validation_error for x outside [0, pi].
[[nodiscard]] double eigenfunction_value(std::size_t p, double x);

/// Evaluate the field at the n midpoint nodes. Requires n >= 2.
[[nodiscard]] GridSamples synthesize(const SpectralField& field, std::size_t n);

/// Discrete (midpoint-rule) coefficient before aliasing correction:
/// (1/n) sum_k f(x_k) for p = 0 — the raw mean channel — and
/// (pi/n) sum_k f(x_k) phi_p(x_k) for 1 <= p <= n-1.
/// Throws validation_error if p >= n.
[[nodiscard]] double discrete_coefficient(const GridSamples& samples,
                                          std::size_t p);

/// Aliasing tail G relating discrete to exact coefficients:
/// exact = discrete_coefficient - aliasing_tail, exactly for fields
/// bandlimited to their cap. For p >= 1 the exact coefficient is <f, phi_p>;
/// for p = 0 the identity holds in the raw mean channel, i.e. the exact
/// value is the true mean (1/pi) integral of f.
[[nodiscard]] double aliasing_tail(const SpectralField& field, std::size_t n,
                                   std::size_t p);

/// Orthonormal discrete projection of samples onto modes 0..cap:
/// c_0 = sqrt(pi) * mean channel, c_p = discrete_coefficient for p >= 1.
/// Modes above n-1 are zero. Exact for fields bandlimited below n.
[[nodiscard]] SpectralField project(const GridSamples& samples,
                                    std::size_t cap);

/// Spectral fractional Laplacian: mode p >= 1 multiplied by p^{2 beta},
/// mode 0 annihilated. Requires beta > 0.
[[nodiscard]] SpectralField frac_laplacian_apply(const SpectralField& field,
                                                 double beta);

/// Norm of the field under the given spec. Throws numerical_error if the
/// Gevrey weight overflows the floating range on a nonzero coefficient.
[[nodiscard]] double norm(const SpectralField& field, const NormSpec& spec);

/// Elementwise sum a + scale * b, sized to the larger cap.
[[nodiscard]] SpectralField add_scaled(const SpectralField& a,
                                       const SpectralField& b, double scale);

/// L2 distance between two fields (missing high modes read as zero).
[[nodiscard]] double l2_distance(const SpectralField& a,
                                 const SpectralField& b);

}  // namespace fracback
