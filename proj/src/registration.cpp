#include "lodom/registration.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "lodom/errors.hpp"

namespace lodom {

void IcpParams::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(translation_tolerance > 0.0) || !(rotation_tolerance > 0.0)) {
    throw ConfigError("ICP tolerances must be > 0");
  }
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
  if (hard_residual_cutoff && !(*hard_residual_cutoff > 0.0)) {
    throw ConfigError("hard_residual_cutoff must be > 0");
  }
}

double weight(const Vec3& p, const Vec3& q, double sigma) {
  return std::exp(-(p - q).squaredNorm() / (sigma * sigma));
}

double point_to_plane_energy(std::span<const Correspondence> corr,
                             const Pose& delta) {
  double e = 0.0;
  for (const Correspondence& c : corr) {
    const double r = c.n.dot(delta * c.p - c.q);
    e += c.w * r * r;
  }
  return e;
}

NormalEquations accumulate_normal_equations(std::span<const Correspondence> corr) {
  NormalEquations ne;
  Vec6 j;
  for (const Correspondence& c : corr) {
    const double r = c.n.dot(c.p - c.q);
    if (!std::isfinite(r) || !std::isfinite(c.w) || !c.n.allFinite() ||
        !c.p.allFinite()) {
      throw DataError("non-finite residual for point " + std::to_string(c.source));
    }
    j << c.p.cross(c.n), c.n;
    ne.hessian.noalias() += c.w * j * j.transpose();
    ne.gradient.noalias() += c.w * r * j;
  }
  return ne;
}

Twist gauss_newton_step(std::span<const Correspondence> corr,
                        std::size_t min_correspondences) {
  if (corr.size() < min_correspondences) {
    throw DegenerateGeometryError(
        "only " + std::to_string(corr.size()) + " correspondences, need " +
        std::to_string(min_correspondences));
  }
  const NormalEquations ne = accumulate_normal_equations(corr);
  const Mat6& h = ne.hessian;
  const Vec6 rhs = -ne.gradient;
  if (rhs.isZero(0.0)) return {};

  Eigen::LDLT<Mat6> ldlt(h);
  const auto d = ldlt.vectorD();
  const bool positive_definite = ldlt.info() == Eigen::Success &&
                                 d.maxCoeff() > 0.0 &&
                                 d.minCoeff() > 1e-12 * d.maxCoeff();
  if (positive_definite) return Twist::from_vector(ldlt.solve(rhs));

  const double lambda = 1e-6 * h.trace() / 6.0;
  if (!(lambda > 0.0)) {
    throw DegenerateGeometryError("normal equations carry no information");
  }
  const Eigen::LLT<Mat6> shifted(h + lambda * Mat6::Identity());
  Vec6 x = shifted.solve(rhs);
  for (int sweep = 0; sweep < 4; ++sweep) x += shifted.solve(rhs - h * x);
  return Twist::from_vector(x);
}

IcpResult icp(std::span<const Vec3> scan_points, const CorrespondenceSource& map,
              const Pose& init, const IcpParams& params) {
  params.validate();
  if (scan_points.empty()) throw DataError("ICP needs a non-empty scan");
  const PairingParams pairing = params.pairing();

  IcpResult result{init, {}};
  IcpDiagnostics& diag = result.diagnostics;
  Pose current = init;
  std::vector<Vec3> moved(scan_points.size());
  for (int it = 1; it <= params.max_iterations; ++it) {
    for (std::size_t i = 0; i < scan_points.size(); ++i) {
      moved[i] = current * scan_points[i];
    }
    const std::vector<Correspondence> corr = map.associate(moved, pairing);
    diag.iterations_run = it;
    diag.correspondence_count = corr.size();
    if (corr.size() < params.min_correspondences) {
      diag.starved = true;
      diag.converged = false;
      diag.final_energy = point_to_plane_energy(corr);
      result.pose = init;
      return result;
    }
    const Twist step = gauss_newton_step(corr, params.min_correspondences);
    const Pose update = exp_twist(step);
    current = update * current;
    diag.final_energy = point_to_plane_energy(corr, update);
    if (step.translation.norm() < params.translation_tolerance &&
        step.rotation.norm() < params.rotation_tolerance) {
      diag.converged = true;
      break;
    }
  }
  result.pose = current;
  return result;
}

}  // namespace lodom
