#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qpl/greens.hpp"
#include "qpl/lattice.hpp"
#include "qpl/model.hpp"

namespace qpl {

/// Max entry of G - G12 + G12 Gamma G, where G12 is the block inverse on Lambda1, Lambda2
/// zero-extended to their union and Gamma the coupling between the two pieces.
double resolvent_residual(const ModelConfig& cfg, const PointSet& lambda1, const PointSet& lambda2, double E,
                          const Phase& x);

/// T(rho, d) = sum_{j >= 0} (2j+1)^d e^{-rho j / 2}, truncated once terms drop below 1e-18.
double window_tail_sum(double rho, int d);

struct PasteBound {
  double bound_log = 0.0;  ///< log(4 (2 M1 + 1)^d e^{sqrt M1})
  double ml_margin = 0.0;  ///< sup over M in [M0, M1] of the (ml) left side
  int worst_M = 0;
  bool feasible = false;   ///< ml_margin <= 1/2
};

PasteBound ml_condition(int M0, int M1, double lambda, double rho, int d);

/// One window per point of the domain, windows[i] belonging to domain[i].
struct WindowCover {
  PointSet domain;
  std::vector<ElementaryRegion> windows;

  int min_size() const;
  int max_size() const;
  /// First point violating k in W, W inside domain, dist(k, domain \ W) >= size/2.
  std::optional<std::string> first_violation() const;
};

/// Cover of the domain by find_window at size M; throws PreconditionFailure naming the
/// first point without a window.
WindowCover build_cover(const PointSet& domain, int M);

struct PasteResult {
  PasteBound ml;
  double bound_log = 0.0;
  double empirical_norm = 0.0;
  bool certified = false;
  bool log_m0_condition = false;  ///< M0 >= (log N)^2; reported, not required
  std::size_t windows_checked = 0;
};

struct PasteOptions {
  int N = 0;  ///< scale of Lambda; 0 takes the smallest N with diam(Lambda) <= 2N + 1
};

/// Norm pasting. Checks every hypothesis (windows with the doubled constants on the row of
/// their base point, (ml), the rate range, the decay condition of the kernel) and throws
/// PreconditionFailure naming the first one that fails. A certified bound exceeded by the
/// direct norm raises InvariantViolation.
PasteResult paste_norm(const ModelConfig& cfg, const PointSet& region, double E, const Phase& x,
                       const WindowCover& cover, double rho_bar, const PasteOptions& opt = {});

struct DecayPropagation {
  double effective_rate = 0.0;       ///< rho_bar - degrade / sqrt(M0)
  double observed_rate = 0.0;        ///< min over checked pairs of -log|G| / |n - n'|
  std::size_t pairs_checked = 0;
  std::size_t violation_count = 0;
  std::vector<DecayViolation> violations;
  double norm = 0.0;
  bool log_m0_condition = false;
};

struct PropagateOptions {
  int N = 0;  ///< 0: smallest N with diam(Lambda) <= 2N + 1
  std::size_t max_listed = 64;
};

/// Decay propagation off an excluded set Lambda1. The cover lives on Lambda \ Lambda1.
/// Hypothesis failures throw PreconditionFailure; violations of the propagated decay are
/// returned, not thrown.
DecayPropagation propagate_decay(const ModelConfig& cfg, const PointSet& region, const PointSet& excluded, double E,
                                 const Phase& x, const WindowCover& cover, int M0, double rho_bar,
                                 double degrade_constant, const PropagateOptions& opt = {});

/// Smallest N with diam <= 2N + 1.
int scale_of(const PointSet& region);

}  // namespace qpl
