#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "pks/field.hpp"

namespace pks {

enum class SolverKind { spectral, iterative };

SolverKind parse_solver_kind(const std::string& name);
std::string to_string(SolverKind kind);

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves (a I - Delta_h + b I) u = rhs on a Neumann box, where Delta_h is the
/// mirrored-ghost-cell Laplacian.
///
/// The spectral backend diagonalizes Delta_h with the type-II/III discrete
/// cosine transforms (its eigenvectors are cos(pi k (i + 1/2) / n)). The
/// iterative backend runs matrix-free conjugate gradients and exists to
/// cross-check the spectral one.
class HelmholtzSolver {
 public:
  HelmholtzSolver(const Grid& grid, SolverKind kind, double rel_tol = 1e-12,
                  int max_iterations = 10000);
  ~HelmholtzSolver();
  HelmholtzSolver(HelmholtzSolver&&) noexcept;
  HelmholtzSolver& operator=(HelmholtzSolver&&) noexcept;

  /// Throws std::invalid_argument unless a > 0 and b >= 0; SolverError if CG stalls.
  ScalarField solve(const ScalarField& rhs, double a, double b) const;

  SolverKind kind() const { return kind_; }
  const Grid& grid() const { return grid_; }

 private:
  struct Spectral;
  Grid grid_;
  SolverKind kind_;
  double rel_tol_;
  int max_iterations_;
  std::unique_ptr<Spectral> spectral_;

  ScalarField solve_cg(const ScalarField& rhs, double shift) const;
};

/// Eigenvalue of -Delta_h for the cosine mode with wavenumber k along an axis of n cells.
double neumann_eigenvalue(std::size_t k, std::size_t n, double h);

/// One-shot convenience wrapper.
ScalarField helmholtz_solve(const ScalarField& rhs, double a, double b,
                            SolverKind kind = SolverKind::spectral);

}  // namespace pks
