#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "trifv/boundary.hpp"
#include "trifv/geometry.hpp"
#include "trifv/partition.hpp"

namespace trifv {

enum class Quantity { u, n_e, n_i, potential };

std::string_view quantity_name(Quantity q);

/// Cell-centred scalar over a subdomain's own and halo slots.
struct Field {
  Quantity quantity = Quantity::u;
  double time = 0.0;
  std::vector<double> values;
};

/// Per-cell convective and diffusive residual sums, own cells only.
struct Residuals {
  std::vector<double> convective;
  std::vector<double> diffusive;
};

/// Upwind face value: the left cell when V.n >= 0, otherwise the right
/// neighbour (own or halo cell) or the boundary value.
double upwind_face_value(const Subdomain &sub, const Field &u, Vec2 velocity,
                         std::size_t face, const BoundarySpec &bc);

/// Weighted sums of cell values at every node touched by an own cell;
/// other entries are left at zero.
std::vector<double> node_values(const Subdomain &sub, const Field &u);

/// As above, except that nodes on a Dirichlet boundary take the boundary
/// data at time u.time.
std::vector<double> node_values(const Subdomain &sub, const Field &u, const BoundarySpec &bc);

/// Value on the far side of a face: neighbour cell, or boundary data
/// (Dirichlet value, or the left cell itself for neumann / wall).
double far_side_value(const Subdomain &sub, const Field &u, std::size_t face,
                      const BoundarySpec &bc);

/// Diamond-cell gradient on a face. Neumann and wall faces carry no normal
/// component: their gradient is the tangential difference along the edge.
Vec2 face_gradient(const Subdomain &sub, const Field &u,
                   std::span<const double> u_node, std::size_t face,
                   const BoundarySpec &bc);

/// Gradient on every local face.
std::vector<Vec2> face_gradients(const Subdomain &sub, const Field &u,
                                 std::span<const double> u_node,
                                 const BoundarySpec &bc);

/// Face fluxes u_k (V.n)|sigma|, oriented along each local face normal.
std::vector<double> convective_fluxes(const Subdomain &sub, const Field &u,
                                      std::span<const Vec2> velocity,
                                      const BoundarySpec &bc);

/// Face fluxes D (grad u . n)|sigma|, oriented along each local face normal.
std::vector<double> diffusive_fluxes(const Subdomain &sub, const Field &u,
                                     std::span<const double> u_node,
                                     std::span<const double> diffusion,
                                     const BoundarySpec &bc);

/// Sums face fluxes over each own cell's faces (outward positive), in the
/// cell's fixed face order.
std::vector<double> cell_sums(const Subdomain &sub, std::span<const double> flux);

/// Rez_conv and Rez_dissip per own cell. `diffusion` holds one coefficient
/// per local face.
Residuals residuals(const Subdomain &sub, const Field &u,
                    std::span<const Vec2> velocity,
                    std::span<const double> diffusion, const BoundarySpec &bc);

/// u_i + dt/mu_i (Rez_dissip - Rez_conv) + dt S_i on own cells. Halo
/// slots are copied unchanged and are stale until the next exchange.
Field explicit_step(const Subdomain &sub, const Field &u, const Residuals &rez,
                    double dt, std::span<const double> source = {});

inline constexpr double steady_dt = std::numeric_limits<double>::infinity();

/// cfl * min_i mu_i / (sum |V.n||sigma| + 2 sum D |sigma|^2 / mu_i) over
/// own cells; `steady_dt` when nothing moves. Throws ZeroDt if a cell
/// produces a zero step.
double stable_dt(const Subdomain &sub, std::span<const Vec2> velocity,
                 std::span<const double> diffusion, double cfl = 0.4);

double stable_dt(const Subdomain &sub, std::span<const Vec2> velocity,
                 double diffusion, double cfl = 0.4);

/// sum_i mu_i u_i over own cells.
double total_mass(const Subdomain &sub, const Field &u);

} // namespace trifv
