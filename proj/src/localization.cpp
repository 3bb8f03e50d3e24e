#include "qpl/localization.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "qpl/errors.hpp"
#include "qpl/greens.hpp"

namespace qpl {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

double LocalizationProfile::median_rate() const {
  std::vector<double> r;
  for (const auto& f : fits) r.push_back(f.rate);
  return median(std::move(r));
}

double LocalizationProfile::median_participation() const {
  std::vector<double> r;
  for (const auto& f : fits) r.push_back(f.participation);
  return median(std::move(r));
}

EigenvectorFit fit_eigenvector(const PointSet& region, const Eigen::Ref<const Eigen::VectorXd>& psi,
                               double noise_floor) {
  if (static_cast<Eigen::Index>(region.size()) != psi.size()) throw InputError("fit_eigenvector: size mismatch");
  EigenvectorFit f;
  Eigen::Index imax = 0;
  const double amax = psi.cwiseAbs().maxCoeff(&imax);
  f.center = region[static_cast<std::size_t>(imax)];
  const double s2 = psi.squaredNorm();
  f.participation = s2 * s2 / psi.array().pow(4).sum();

  std::vector<double> rs, ls;
  for (std::size_t i = 0; i < region.size(); ++i) {
    const double a = std::abs(psi[static_cast<Eigen::Index>(i)]);
    const int r = sup_distance(region[i], f.center);
    if (a < noise_floor * amax) continue;
    rs.push_back(r);
    ls.push_back(std::log(a / amax));
  }
  f.points_used = static_cast<int>(rs.size());
  const double slope = least_squares_slope(rs, ls);
  f.rate = std::isnan(slope) ? std::numeric_limits<double>::infinity() : -slope;
  return f;
}

LocalizationProfile localization_profile(const ModelConfig& cfg, int N, const Phase& x,
                                         const LocalizationOptions& opt) {
  cfg.validate();
  if (N < 0) throw InputError("localization_profile: N must be >= 0");
  LocalizationProfile p;
  p.region = PointSet::from_box(Box::cube(LatticePoint(cfg.dim()), N));
  if (p.region.size() > 20000) throw InputError("localization_profile: |Lambda| exceeds 20000");

  const Eigen::MatrixXd H = assemble_restricted(cfg, p.region, x, 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw SingularMatrixError("localization_profile: eigensolver failed", INFINITY);
  p.eigenvalues = es.eigenvalues();
  const double hnorm = std::max(p.eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
  const Eigen::MatrixXd R = H * es.eigenvectors() - es.eigenvectors() * p.eigenvalues.asDiagonal();
  p.max_residual = R.colwise().norm().maxCoeff() / hnorm;

  p.spectral_bound = spectral_bound(cfg);
  p.spectrum_in_bound = p.eigenvalues.cwiseAbs().maxCoeff() <= p.spectral_bound * (1.0 + 1e-12);

  p.fits.resize(static_cast<std::size_t>(H.rows()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < H.rows(); ++k)
    p.fits[static_cast<std::size_t>(k)] = fit_eigenvector(p.region, es.eigenvectors().col(k), opt.noise_floor);
  return p;
}

}  // namespace qpl
