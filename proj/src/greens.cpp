#include "qpl/greens.hpp"

#include <cmath>
#include <limits>

#include "qpl/errors.hpp"

namespace qpl {

GreensMatrix invert_restricted(const PointSet& region, const Eigen::MatrixXd& M, double E, Phase x) {
  if (M.rows() != M.cols() || static_cast<std::size_t>(M.rows()) != region.size())
    throw InputError("invert_restricted: matrix does not match the region");
  GreensMatrix out;
  out.region = region;
  out.energy = E;
  out.phase = std::move(x);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const double rcond = lu.rcond();
  out.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(out.condition <= kSingularCondition))
    throw SingularMatrixError("restricted matrix is singular or ill-conditioned", out.condition);

  const auto n = M.rows();
  out.G = lu.inverse();
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(n, n);
  R.noalias() -= M * out.G;
  out.defect = R.cwiseAbs().maxCoeff();
  if (out.defect > 1e-13) {
    out.G += out.G * R;
    R.setIdentity();
    R.noalias() -= M * out.G;
    out.defect = R.cwiseAbs().maxCoeff();
  }
  out.G = 0.5 * (out.G + out.G.transpose()).eval();
  if (out.defect > kDefectTolerance)
    throw SingularMatrixError("inverse defect " + std::to_string(out.defect) + " exceeds tolerance", out.condition);
  return out;
}

GreensMatrix compute_greens(const ModelConfig& cfg, const PointSet& region, double E, const Phase& x) {
  return invert_restricted(region, assemble_restricted(cfg, region, x, E), E, x);
}

double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

GoodnessReport goodness(const GreensMatrix& G, int N, double rho_bar, const GoodnessOptions& opt) {
  if (N < 1) throw InputError("goodness: N must be >= 1");
  if (G.region.empty()) throw InputError("goodness: empty region");
  if (opt.check_size && diameter(G.region) != 2 * N)
    throw InputError("goodness: region diameter " + std::to_string(diameter(G.region)) + " does not match size " +
                     std::to_string(N));
  GoodnessReport rep;
  rep.N = N;
  rep.rho_bar = rho_bar;
  rep.norm = operator_norm(G.G);
  rep.log_norm = rep.norm > 0.0 ? std::log(rep.norm) : -std::numeric_limits<double>::infinity();
  rep.log_norm_bound = std::sqrt(static_cast<double>(N)) + opt.norm_log_slack;
  rep.norm_ok = rep.log_norm <= rep.log_norm_bound;

  std::vector<double> rs, logs;
  const auto& pts = G.region.points();
  const std::size_t sz = pts.size();
  std::size_t i_begin = 0, i_end = sz;
  if (opt.row) {
    const auto idx = G.region.index_of(*opt.row);
    if (idx < 0) throw InputError("goodness: row point is not in the region");
    i_begin = static_cast<std::size_t>(idx);
    i_end = i_begin + 1;
  }
  for (std::size_t i = i_begin; i < i_end; ++i) {
    for (std::size_t j = opt.row ? 0 : i + 1; j < sz; ++j) {
      const int r = sup_distance(pts[i], pts[j]);
      if (10 * r < N) continue;
      ++rep.pairs_checked;
      const double a = std::abs(G.G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      if (a == 0.0) continue;
      const double la = std::log(a);
      rs.push_back(r);
      logs.push_back(la);
      const double allowed_log = opt.decay_log_slack - rho_bar * r;
      if (la > allowed_log) {
        if (rep.decay_violations.size() < opt.max_listed)
          rep.decay_violations.push_back({pts[i], pts[j], a, std::exp(allowed_log)});
        ++rep.violation_count;
      }
    }
  }
  const double slope = least_squares_slope(rs, logs);
  rep.fitted_rate = std::isnan(slope) ? slope : -slope;
  rep.pass = rep.norm_ok && rep.violation_count == 0;
  return rep;
}

double shift_covariance_check(const ModelConfig& cfg, const PointSet& region, double E, const Phase& x,
                              const LatticePoint& n) {
  const GreensMatrix shifted = compute_greens(cfg, region.translated(n), E, x);
  const GreensMatrix moved = compute_greens(cfg, region, E, shift_phase(x, cfg.omega, cfg.blocks, n));
  return max_entry_difference(shifted.G, moved.G);
}

}  // namespace qpl
