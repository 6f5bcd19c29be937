#include "pks/helmholtz.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

namespace pks {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "spectral") return SolverKind::spectral;
  if (name == "iterative") return SolverKind::iterative;
  throw std::invalid_argument("unknown solver '" + name + "' (expected spectral|iterative)");
}

std::string to_string(SolverKind kind) {
  return kind == SolverKind::spectral ? "spectral" : "iterative";
}

double neumann_eigenvalue(std::size_t k, std::size_t n, double h) {
  return 2.0 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(n))) /
         (h * h);
}

struct HelmholtzSolver::Spectral {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<double> eigen;  // eigenvalues of -Delta_h, same layout as the field
  double normalization = 1.0;

  explicit Spectral(const Grid& g) {
    const int d = g.dim();
    // FFTW wants the slowest index first.
    int dims[3];
    fftw_r2r_kind fwd[3];
    fftw_r2r_kind bwd[3];
    if (d == 3) {
      dims[0] = static_cast<int>(g.nz);
      dims[1] = static_cast<int>(g.ny);
      dims[2] = static_cast<int>(g.nx);
    } else {
      dims[0] = static_cast<int>(g.ny);
      dims[1] = static_cast<int>(g.nx);
    }
    for (int ax = 0; ax < d; ++ax) {
      fwd[ax] = FFTW_REDFT10;
      bwd[ax] = FFTW_REDFT01;
    }
    std::vector<double> scratch(g.size());
    {
      std::lock_guard lock(planner_mutex());
      // FFTW_ESTIMATE keeps plan selection, and hence rounding, reproducible.
      forward = fftw_plan_r2r(d, dims, scratch.data(), scratch.data(), fwd,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
      backward = fftw_plan_r2r(d, dims, scratch.data(), scratch.data(), bwd,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (forward == nullptr || backward == nullptr) throw SolverError("FFTW planning failed");

    eigen.resize(g.size());
    std::vector<double> ex(g.nx), ey(g.ny), ez(g.nz, 0.0);
    for (std::size_t i = 0; i < g.nx; ++i) ex[i] = neumann_eigenvalue(i, g.nx, g.h);
    for (std::size_t j = 0; j < g.ny; ++j) ey[j] = neumann_eigenvalue(j, g.ny, g.h);
    if (d == 3) {
      for (std::size_t k = 0; k < g.nz; ++k) ez[k] = neumann_eigenvalue(k, g.nz, g.h);
    }
    for (std::size_t k = 0; k < g.nz; ++k) {
      for (std::size_t j = 0; j < g.ny; ++j) {
        for (std::size_t i = 0; i < g.nx; ++i) eigen[g.index(i, j, k)] = ex[i] + ey[j] + ez[k];
      }
    }
    normalization = static_cast<double>(2 * g.nx) * static_cast<double>(2 * g.ny) *
                    (d == 3 ? static_cast<double>(2 * g.nz) : 1.0);
  }

  ~Spectral() {
    std::lock_guard lock(planner_mutex());
    if (forward != nullptr) fftw_destroy_plan(forward);
    if (backward != nullptr) fftw_destroy_plan(backward);
  }
};

HelmholtzSolver::HelmholtzSolver(const Grid& grid, SolverKind kind, double rel_tol,
                                 int max_iterations)
    : grid_(grid), kind_(kind), rel_tol_(rel_tol), max_iterations_(max_iterations) {
  if (kind_ == SolverKind::spectral) spectral_ = std::make_unique<Spectral>(grid_);
}

HelmholtzSolver::~HelmholtzSolver() = default;
HelmholtzSolver::HelmholtzSolver(HelmholtzSolver&&) noexcept = default;
HelmholtzSolver& HelmholtzSolver::operator=(HelmholtzSolver&&) noexcept = default;

ScalarField HelmholtzSolver::solve(const ScalarField& rhs, double a, double b) const {
  if (!(a > 0.0) || !(b >= 0.0)) {
    throw std::invalid_argument("helmholtz_solve: need a > 0 and b >= 0");
  }
  if (!(rhs.grid == grid_)) throw std::invalid_argument("helmholtz_solve: grid mismatch");
  const double shift = a + b;
  if (kind_ == SolverKind::iterative) return solve_cg(rhs, shift);

  ScalarField u = rhs;
  fftw_execute_r2r(spectral_->forward, u.values.data(), u.values.data());
  const double scale = 1.0 / spectral_->normalization;
  for (std::size_t n = 0; n < u.size(); ++n) u[n] *= scale / (shift + spectral_->eigen[n]);
  fftw_execute_r2r(spectral_->backward, u.values.data(), u.values.data());
  return u;
}

ScalarField HelmholtzSolver::solve_cg(const ScalarField& rhs, double shift) const {
  // Conjugate gradients on (shift I - Delta_h), symmetric positive definite.
  const std::size_t n = rhs.size();
  ScalarField u(grid_, 0.0);
  ScalarField r = rhs;
  ScalarField dir = r;
  ScalarField q(grid_, 0.0);
  auto dot = [n](const ScalarField& x, const ScalarField& y) {
    std::vector<double> prod(n);
    for (std::size_t i = 0; i < n; ++i) prod[i] = x[i] * y[i];
    return compensated_sum(prod);
  };
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  if (rhs_norm == 0.0) return u;
  double rr = dot(r, r);
  for (int it = 0; it < max_iterations_; ++it) {
    if (std::sqrt(rr) <= rel_tol_ * rhs_norm) return u;
    apply_neg_laplacian(dir, q);
    for (std::size_t i = 0; i < n; ++i) q[i] += shift * dir[i];
    const double alpha = rr / dot(dir, q);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] += alpha * dir[i];
      r[i] -= alpha * q[i];
    }
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < n; ++i) dir[i] = r[i] + beta * dir[i];
  }
  if (std::sqrt(rr) <= rel_tol_ * rhs_norm) return u;
  std::ostringstream msg;
  msg << "conjugate gradients did not converge in " << max_iterations_
      << " iterations (relative residual " << std::sqrt(rr) / rhs_norm << ")";
  throw SolverError(msg.str());
}

ScalarField helmholtz_solve(const ScalarField& rhs, double a, double b, SolverKind kind) {
  return HelmholtzSolver(rhs.grid, kind).solve(rhs, a, b);
}

}  // namespace pks
