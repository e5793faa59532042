#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "trifv/boundary.hpp"
#include "trifv/direct_solver.hpp"
#include "trifv/mesh.hpp"
#include "trifv/partition.hpp"
#include "trifv/poisson.hpp"
#include "trifv/timing.hpp"
#include "trifv/transport.hpp"

namespace trifv {

/// One row of a tabulated coefficient set, keyed by field magnitude |E|.
struct CoefficientRow {
  double field = 0.0;
  double mobility = 0.0;
  double diffusion = 0.0;
  double alpha = 0.0;
};

/// Electron transport coefficients. The linear model uses constant
/// mobility, diffusion and ionization coefficient: v_e = -mu_e E and
/// S_e = alpha |v_e| n_e. The table model interpolates all three linearly
/// in |E| and clamps outside the table range.
struct StreamerCoefficients {
  enum class Model { linear, table };

  Model model = Model::linear;
  double mu_e = 1.0;
  double D_e = 0.1;
  double alpha = 1.0;
  double eps = 1.0;
  double q_e = 1.0;
  std::vector<CoefficientRow> table; // ascending field

  double mobility(double field) const;
  double diffusion(double field) const;
  double ionization(double field) const;
};

/// Reads `field,mobility,diffusion,alpha` rows (header line optional).
std::vector<CoefficientRow> load_coefficient_table(const std::string &path);

struct StreamerState {
  Field n_e{Quantity::n_e, 0.0, {}};
  Field n_i{Quantity::n_i, 0.0, {}};
  Field potential{Quantity::potential, 0.0, {}};
  std::vector<Vec2> e_field;    // per local face
  std::vector<double> e_norm;   // |E| per local face
  std::size_t clip_count = 0;
};

/// Per-face drift velocity and diffusion, per-own-cell speed and
/// ionization coefficient.
struct DriftCoefficients {
  std::vector<Vec2> velocity;
  std::vector<double> diffusion;
  std::vector<double> cell_speed;
  std::vector<double> cell_alpha;
};

/// Right-hand side of -Laplace(V) = (q_e / eps)(n_i - n_e) on own cells.
std::vector<double> poisson_source(const Subdomain &sub, const StreamerState &s,
                                   const StreamerCoefficients &coeffs);

/// E = -grad V on every local face (diamond gradient).
std::vector<Vec2> electric_field(const Subdomain &sub, const Field &potential,
                                 const BoundarySpec &potential_bc);

/// Fills state.e_field / e_norm from the current potential.
void update_electric_field(const Subdomain &sub, StreamerState &s,
                           const BoundarySpec &potential_bc);

DriftCoefficients drift_coefficients(const Subdomain &sub, const StreamerState &s,
                                     const StreamerCoefficients &coeffs);

/// S_e = alpha |v_e| n_e on own cells; cell |v_e| and |E| are means over the
/// cell's three faces.
std::vector<double> ionization_source(const Subdomain &sub, const StreamerState &s,
                                      const DriftCoefficients &drift);

/// Explicit update of both densities given the current field. n_e gets
/// convection, diffusion and S_e; n_i gets S_e. Negative values are clipped
/// to zero and counted. Halo slots of n_e must be current.
void advance_densities(const Subdomain &sub, StreamerState &s,
                       const DriftCoefficients &drift, const BoundarySpec &density_bc,
                       double dt, PhaseTimes *timers = nullptr);

/// sum mu_i (n_i - n_e) over own cells.
double total_charge(const Subdomain &sub, const StreamerState &s);

/// Gaussian seed for both species at cell centroids.
struct GaussianSeed {
  Vec2 center{0.5, 0.5};
  double sigma = 0.1;
  double amplitude = 1.0;
  double background = 0.0;

  double operator()(Vec2 p) const;
};

/// Single-process coupled cycle on one whole-mesh subdomain: assembles and
/// factorizes the Poisson matrix once, then every step solves for the
/// potential, computes E and the drift coefficients, and advances both
/// densities.
class SerialStreamer {
public:
  SerialStreamer(Mesh mesh, StreamerCoefficients coeffs, BoundarySpec potential_bc,
                 BoundarySpec density_bc, PoissonOptions poisson = {});

  StreamerState &state() noexcept { return state_; }
  const StreamerState &state() const noexcept { return state_; }
  const Subdomain &subdomain() const noexcept { return sub_; }
  const Mesh &mesh() const noexcept { return mesh_; }

  void seed(const GaussianSeed &electrons, const GaussianSeed &ions);

  /// Solves the Poisson problem for the current densities.
  void solve_potential();

  /// Largest stable step for the current field (solves the potential first).
  double stable_step(double cfl = 0.4);

  /// One full coupled cycle.
  void step(double dt);

private:
  Mesh mesh_;
  StreamerCoefficients coeffs_;
  BoundarySpec potential_bc_;
  BoundarySpec density_bc_;
  PoissonOptions poisson_;
  std::vector<DiamondCell> diamonds_;
  Subdomain sub_;
  LuFactors lu_;
  SolveWorkspace ws_;
  StreamerState state_;
};

} // namespace trifv
