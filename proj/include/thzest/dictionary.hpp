// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "thzest/common.hpp"
#include "thzest/config.hpp"

namespace thzest {

/// Angular grid whose directional cosines are uniform on [-1, 1]:
/// cos(phi_r) = (2/G)(r-1) - 1.
struct AngularGrid {
  std::vector<double> angles_rad;
  std::vector<double> cosines;
  int size() const { return static_cast<int>(angles_rad.size()); }
};

AngularGrid build_angular_grid(int size);
std::pair<AngularGrid, AngularGrid> build_angular_grids(int g_r, int g_tu);

/// Array manifold at one subcarrier: column r = steering(phi_r, f_k).
Mat build_manifold(const AngularGrid& grid, double f_hz, int num_antennas,
                   double carrier_hz);

/// Taylor-based off-grid manifold: [base atoms | angular derivatives].
/// Derivative atoms are left unnormalized; their coefficients carry the
/// grid-offset scaling.
Mat build_tbod(const AngularGrid& grid, double f_hz, int num_antennas,
               double carrier_hz);

/// Per-subcarrier transmit/receive manifolds and their multi-user
/// block-diagonal Kronecker products.  Users share the transmit grid, so a
/// single per-subcarrier transmit manifold serves every user block.
struct SparsifyingDictionary {
  DictionaryMode mode = DictionaryMode::OnGrid;
  int num_users = 1;
  AngularGrid grid_r, grid_t;
  std::vector<Mat> a_r;  // K slices, N_R x G_R'
  std::vector<Mat> a_t;  // K slices, N_Tu x G_Tu'
  double carrier_hz = 0.0;
  // TBoD derivative columns are stored scaled by the interpolator bound
  // pi/G, so their coefficients live on the same scale as base atoms;
  // recovered offsets are deriv_scale * (c_deriv / c_base).
  double deriv_scale_r = 0.0;
  double deriv_scale_t = 0.0;

  int num_subcarriers() const { return static_cast<int>(a_r.size()); }
  int atoms_per_user() const {
    return static_cast<int>(a_r.front().cols() * a_t.front().cols());
  }
  int total_atoms() const { return num_users * atoms_per_user(); }

  /// Single-user sparsifying block conj(A_T[k]) (x) A_R[k].
  Mat psi_user(int k) const;
  /// Multi-user block-diagonal dictionary Psi_MU[k].
  Mat psi(int k) const;
};

SparsifyingDictionary build_mu_dictionary(const ScenarioConfig& cfg,
                                          DictionaryMode mode);

/// Sensing tensor slabs Xi_MU(:,:,k), rows stacked over pilot blocks:
/// Omega_m[k] = Lambda_m[k] Psi_MU[k].
struct SensingTensor {
  std::vector<Mat> slab;  // K slices, (M N_RF_R) x total_atoms
  int num_subcarriers() const { return static_cast<int>(slab.size()); }
  int rows() const { return static_cast<int>(slab.front().rows()); }
  int atoms() const { return static_cast<int>(slab.front().cols()); }
};

}  // namespace thzest
