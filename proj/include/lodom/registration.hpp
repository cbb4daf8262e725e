#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lodom/association.hpp"
#include "lodom/geom.hpp"

namespace lodom {

struct IcpParams {
  int max_iterations = 20;
  double translation_tolerance = 1e-4;  // m
  double rotation_tolerance = 1e-4;     // rad
  double sigma = 0.5;                   // m
  std::size_t min_correspondences = 100;
  std::optional<double> hard_residual_cutoff;  // m, off by default
  bool weighting = true;

  void validate() const;
  PairingParams pairing() const {
    return {sigma, weighting, hard_residual_cutoff};
  }
};

struct IcpDiagnostics {
  int iterations_run = 0;
  double final_energy = 0.0;  // weighted, m^2
  std::size_t correspondence_count = 0;
  bool converged = false;
  // Association fell below min_correspondences; the initial pose was
  // returned unchanged.
  bool starved = false;
};

struct IcpResult {
  Pose pose;
  IcpDiagnostics diagnostics;
};

// exp(-|p - q|^2 / sigma^2)
double weight(const Vec3& p, const Vec3& q, double sigma);

// Sum of w * (n . (delta * p - q))^2 with the stored weights.
double point_to_plane_energy(std::span<const Correspondence> corr,
                             const Pose& delta = Pose::identity());

// Gauss-Newton normal equations for a left perturbation exp(x) applied to
// the (already transformed) points: H = sum w J J^T, b = sum w J r with
// J = [p x n; n], r = n . (p - q). Ordering of x is (rotation, translation).
struct NormalEquations {
  Mat6 hessian = Mat6::Zero();
  Vec6 gradient = Vec6::Zero();  // b above; dE/dx at 0 is 2b
};
NormalEquations accumulate_normal_equations(std::span<const Correspondence> corr);

// Solves H x = -b. When H is not positive definite the system is shifted by
// lambda I (lambda = 1e-6 trace / 6) and the shifted solve is refined
// against the unshifted equations, so well-determined directions keep their
// undamped value and unobservable ones stay at zero.
//
// Throws DegenerateGeometryError below `min_correspondences` pairs and
// DataError on non-finite input.
Twist gauss_newton_step(std::span<const Correspondence> corr,
                        std::size_t min_correspondences = 6);

// Associate / solve / left-update until both update norms fall under the
// tolerances or max_iterations is hit.
IcpResult icp(std::span<const Vec3> scan_points, const CorrespondenceSource& map,
              const Pose& init, const IcpParams& params);

}  // namespace lodom
