#pragma once

#include "dynreg/types.hpp"

#include <functional>
#include <vector>

namespace dynreg {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre rule with m nodes (Newton on the Legendre recurrence).
/// Rules are cached per m; the reference is stable for the program lifetime.
const GaussRule& gauss_legendre(int m);

/// Unit-sphere nodes with mean-value weights (sum to 1).
struct SphericalGrid {
  int dim = 2;
  std::vector<Vec> nodes;
  std::vector<double> weights;
  int resolution = 0;
};

/// n = 2: `resolution` equispaced angles.  n = 3: `resolution` Gauss-Legendre
/// nodes in cos(polar) times 2*resolution equispaced azimuths.
SphericalGrid sphere_grid(int n, int resolution);

/// Default resolutions: 64 on the circle, 32 x 64 on S^2.
SphericalGrid default_sphere_grid(int n);

/// Quadrature nodes on a partition of [t_lo, t_hi] into pieces, kPoints
/// Gauss-Legendre nodes per piece.  `values` holds whatever the caller sampled
/// at `nodes` (matrix-valued; scalars are 1x1).
class PiecewiseSamples {
 public:
  static constexpr int kPoints = 16;

  PiecewiseSamples() = default;

  /// Pieces from sorted `edges`; every piece is bisected until GL on the piece
  /// and on its two halves agree to `tol` (absolute, in the max-entry norm of
  /// the integral) or the piece is narrower than `min_width`.
  static PiecewiseSamples adaptive(const std::function<Mat(double)>& f, std::vector<double> edges, double tol,
                                   double min_width = 1e-9, int max_depth = 30);

  /// No refinement: the given edges are the pieces.
  static PiecewiseSamples fixed(const std::function<Mat(double)>& f, std::vector<double> edges);

  /// Same partition, new integrand (no refinement).
  PiecewiseSamples resampled(const std::function<Mat(double)>& f) const;
  /// Same partition, pointwise map of the stored values.
  PiecewiseSamples mapped(const std::function<Mat(double, const Mat&)>& f) const;
  /// Same partition, values supplied per node.
  PiecewiseSamples with_values(std::vector<Mat> values) const;

  std::size_t pieces() const { return edges_.size() - 1; }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<Mat>& values() const { return values_; }
  double weight(std::size_t i) const { return weights_[i]; }

  /// Integral over piece p.
  Mat piece_integral(std::size_t p) const;
  /// Integral from t_lo to each edge (size pieces()+1, first entry zero).
  std::vector<Mat> cumulative_at_edges() const;
  /// int_{t}^{t_hi} f at every node (suffix, spectrally exact within pieces).
  std::vector<Mat> suffix_at_nodes() const;
  /// int_{t_lo}^{t} f at every node.
  std::vector<Mat> prefix_at_nodes() const;

 private:
  std::vector<double> edges_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<Mat> values_;
};

}  // namespace dynreg
