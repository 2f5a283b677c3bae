#pragma once

// Canonical neighbourhood classification of warped profiles, horns and
// delta-necks at a near-singular time.
//
// Closeness to a model is a relative sup norm over the rescaled window of
// |w / w_model - 1|, |w_s| and |w w_ss| (all dimensionless). The model
// cylinder after rescaling to R = 1 has w = sqrt(2).

#include <optional>
#include <string>
#include <vector>

#include "ricci/warped.hpp"

namespace ricci {

enum class NeighborhoodKind { eps_neck, c_component, eps_round, cap, unclassified };

std::string to_string(NeighborhoodKind k);

struct NeighborhoodLabel {
  NeighborhoodKind kind = NeighborhoodKind::unclassified;
  double scale = 0;    // R^(-1/2) at the node
  double quality = 0;  // achieved closeness (smaller is better)
  int first = -1, last = -1;  // node range covered (first > last when it wraps a periodic profile)
  bool spatial_only = true;   // the backward-in-time clause was not checked
};

/// Neck test parameters; zeros take the classifier's eps (half length 1/eps scales, tolerance eps).
struct NeckCriteria {
  double half_length = 0;  // in curvature scales
  double tolerance = 0;
};

/// R^(-1/2); throws NotHighCurvatureError when R <= 0.
double curvature_scale(const WarpedProfile& p, int node);

/// Closeness of the window |s - s(node)| <= half_length * scale to the cylinder of radius sqrt(2) * scale.
/// The window is clipped at the ends of an open profile and wraps on a periodic one.
double neck_quality(const WarpedProfile& p, const WarpedCurvatures& c, int node, double half_length, int* first = nullptr,
                    int* last = nullptr);

/// Tests eps-round, C-component, eps-neck, cap, in that order.
NeighborhoodLabel classify_point(const WarpedProfile& p, int node, double eps = 1e-2, double C = 10,
                                 NeckCriteria neck = {});

/// Labels for every node (quality of the first matching kind).
std::vector<NeighborhoodLabel> classify_profile(const WarpedProfile& p, double eps = 1e-2, double C = 10,
                                                NeckCriteria neck = {});

enum class RegionKind {
  neck_region,  // bounded by low curvature on both sides; holds two horns meeting at the thinnest node
  double_horn,  // reaches an end of an open profile that is not a pole
  cap_region,   // runs into a pole from a low-curvature side
  component     // the whole component is high curvature
};

std::string to_string(RegionKind k);

struct Horn {
  int mouth = -1;     // node at the low-curvature side
  int tip = -1;       // node at the singular end (thinnest)
  int direction = 0;  // +1 when the tip lies at higher node index than the mouth
  int first = -1, last = -1;   // node range owned by this horn
  bool monotone = false;       // w decreases from mouth to tip
  double worst_quality = 0;    // largest neck_quality over the horn's nodes
};

struct HighRegion {
  RegionKind kind = RegionKind::neck_region;
  int first = -1, last = -1;  // node range (first > last when it wraps a periodic profile)
  std::vector<Horn> horns;
};

struct HornReport {
  double r_threshold = 0;
  std::vector<HighRegion> regions;
  std::vector<int> low_nodes;  // nodes with R < r_threshold
};

/// Maximal runs with R >= r_threshold, split into horns at the thinnest node.
HornReport find_horns(const WarpedProfile& p, double r_threshold, NeckCriteria neck = {2.0, 0.35});

struct SurgerySite {
  int node = -1;         // node nearest the site
  double s = 0;          // arclength of the cross-sphere with R = h^-2
  double w = 0;          // its radius
  double quality = 0;    // neck quality over the half-length window at scale h
  int window_nodes = 0;  // nodes inside the window
};

/// Outermost point of the horn (nearest its mouth) where R reaches h^-2, if its neck is delta-good.
/// Throws ResolutionError when fewer than 16/delta nodes span the window.
std::optional<SurgerySite> find_delta_neck(const WarpedProfile& p, const Horn& horn, double h, double delta,
                                           double half_length = 2.0);

}  // namespace ricci
