#include "polarnav/eval.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace polarnav::eval {

std::vector<PosePair> associate(const std::vector<StampedPose>& estimate,
                                const std::vector<StampedPose>& truth, double max_dt) {
  if (estimate.empty() || truth.empty()) throw std::invalid_argument("empty trajectory");
  if (estimate.front().t > truth.back().t + max_dt ||
      estimate.back().t < truth.front().t - max_dt) {
    throw NoOverlapError("estimate and truth do not overlap in time");
  }

  std::vector<bool> used(truth.size(), false);
  std::vector<PosePair> pairs;
  auto by_time = [](const StampedPose& p, double t) { return p.t < t; };
  for (const StampedPose& e : estimate) {
    const auto it = std::lower_bound(truth.begin(), truth.end(), e.t, by_time);
    std::size_t hi = static_cast<std::size_t>(it - truth.begin());
    std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(hi) - 1;
    // Walk outward from the insertion point to the nearest unused pose.
    std::size_t best = truth.size();
    while (true) {
      const double dlo = lo >= 0 ? e.t - truth[lo].t : INFINITY;
      const double dhi = hi < truth.size() ? truth[hi].t - e.t : INFINITY;
      if (std::min(dlo, dhi) > max_dt) break;
      if (dlo <= dhi) {
        if (!used[lo]) {
          best = static_cast<std::size_t>(lo);
          break;
        }
        --lo;
      } else {
        if (!used[hi]) {
          best = hi;
          break;
        }
        ++hi;
      }
    }
    if (best == truth.size()) continue;
    used[best] = true;
    pairs.push_back({e.t, truth[best].t, e.pose, truth[best].pose});
  }
  if (pairs.empty()) throw NoOverlapError("no estimate pose within max_dt of a truth pose");
  return pairs;
}

const char* to_string(AlignMode mode) {
  switch (mode) {
    case AlignMode::none: return "none";
    case AlignMode::first_pose: return "first-pose";
    case AlignMode::se3: return "se3";
  }
  return "unknown";
}

AlignMode parse_align_mode(const std::string& text) {
  if (text == "none") return AlignMode::none;
  if (text == "first-pose") return AlignMode::first_pose;
  if (text == "se3") return AlignMode::se3;
  throw std::invalid_argument("unknown alignment mode '" + text + "'");
}

Pose3 align(const std::vector<PosePair>& pairs, AlignMode mode) {
  switch (mode) {
    case AlignMode::none:
      return Pose3::identity();
    case AlignMode::first_pose:
      if (pairs.empty()) throw DegenerateAlignmentError("first-pose alignment needs a pair");
      return pairs.front().truth * pairs.front().estimate.inverse();
    case AlignMode::se3:
      break;
  }
  const Eigen::Index n = static_cast<Eigen::Index>(pairs.size());
  if (n < 3) throw DegenerateAlignmentError("se3 alignment needs at least 3 pairs");
  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    src.col(i) = pairs[i].estimate.translation;
    dst.col(i) = pairs[i].truth.translation;
  }
  // Collinear (or coincident) estimate points leave a rotation unresolved.
  const Eigen::Matrix3Xd centered = src.colwise() - src.rowwise().mean();
  const Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
  const Eigen::Vector3d sv = svd.singularValues();
  if (sv(1) <= 1e-9 * std::max(1.0, sv(0))) {
    throw DegenerateAlignmentError("se3 alignment is degenerate for collinear points");
  }
  const Eigen::Matrix4d t = Eigen::umeyama(src, dst, false);
  return Pose3{Rotation3::from_matrix(t.topLeftCorner<3, 3>()), t.topRightCorner<3, 1>()};
}

ErrorReport compute_errors(const std::vector<PosePair>& pairs, const Pose3& alignment,
                           bool with_rotation) {
  ErrorReport r;
  r.alignment = alignment;
  r.has_rotation = with_rotation;
  if (pairs.empty()) return r;
  Vec3 sq = Vec3::Zero();
  double rot_sq = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const PosePair& p = pairs[i];
    const Pose3 aligned = alignment * p.estimate;
    ErrorSample s;
    s.t = p.t;
    s.error = p.truth.translation - aligned.translation;
    s.e3d = s.error.norm();
    if (with_rotation) {
      s.rotation_error = so3_log(p.truth.rotation.inverse() * aligned.rotation).norm();
      rot_sq += s.rotation_error * s.rotation_error;
    }
    sq += s.error.cwiseProduct(s.error);
    if (i > 0) r.length += (p.truth.translation - pairs[i - 1].truth.translation).norm();
    r.series.push_back(s);
  }
  const double n = static_cast<double>(pairs.size());
  r.axis_rmse = (sq / n).cwiseSqrt();
  r.ate_rmse = std::sqrt(sq.sum() / n);
  r.rotation_rmse = std::sqrt(rot_sq / n);
  return r;
}

ErrorReport evaluate(const std::vector<StampedPose>& estimate,
                     const std::vector<StampedPose>& truth, AlignMode mode, double max_dt,
                     bool with_rotation) {
  const std::vector<PosePair> pairs = associate(estimate, truth, max_dt);
  ErrorReport r = compute_errors(pairs, align(pairs, mode), with_rotation);
  r.mode = mode;
  return r;
}

std::string report_csv(const ErrorReport& r) {
  std::string out = "alignment,pairs,ate_rmse,rmse_x,rmse_y,rmse_z,length";
  if (r.has_rotation) out += ",rotation_rmse";
  out += "\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%zu,%.9g,%.9g,%.9g,%.9g,%.9g", to_string(r.mode),
                r.series.size(), r.ate_rmse, r.axis_rmse.x(), r.axis_rmse.y(), r.axis_rmse.z(),
                r.length);
  out += buf;
  if (r.has_rotation) {
    std::snprintf(buf, sizeof buf, ",%.9g", r.rotation_rmse);
    out += buf;
  }
  return out + "\n";
}

std::string errors_csv(const ErrorReport& r) {
  std::string out = r.has_rotation ? "t,ex,ey,ez,e3d,erot\n" : "t,ex,ey,ez,e3d\n";
  char buf[256];
  for (const ErrorSample& s : r.series) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g", s.t, s.error.x(), s.error.y(),
                  s.error.z(), s.e3d);
    out += buf;
    if (r.has_rotation) {
      std::snprintf(buf, sizeof buf, ",%.9g", s.rotation_error);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string summary_text(const ErrorReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "alignment   %s\npairs       %zu\nlength      %.3f m\nATE RMSE    %.6f m\n"
                "RMSE x/y/z  %.6f %.6f %.6f m\n",
                to_string(r.mode), r.series.size(), r.length, r.ate_rmse, r.axis_rmse.x(),
                r.axis_rmse.y(), r.axis_rmse.z());
  std::string out = buf;
  if (r.has_rotation) {
    std::snprintf(buf, sizeof buf, "rot RMSE    %.6f rad\n", r.rotation_rmse);
    out += buf;
  }
  return out;
}

}  // namespace polarnav::eval
