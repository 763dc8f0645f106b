#include "conformax/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "conformax/errors.hpp"

namespace conformax {

namespace {

constexpr double kSupportCutoff = 1e-14;  // relative to max |mass entry|

Eigen::MatrixXd random_block(Index n, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd x(n, cols);
  for (int j = 0; j < cols; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = gauss(rng);
  }
  return x;
}

// M-orthonormalize the columns of Y in place (SVQB). Directions whose
// M-seminorm collapses are reseeded with random vectors restricted to the
// mass support.
void orthonormalize(Eigen::MatrixXd& y, const VecX& m_diag,
                    const std::vector<Index>& support, std::uint64_t seed) {
  const int p = static_cast<int>(y.cols());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::MatrixXd my = m_diag.asDiagonal() * y;
    Eigen::MatrixXd gram = y.transpose() * my;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const VecX d = es.eigenvalues();
    const double dmax = d.cwiseAbs().maxCoeff();
    bool deficient = false;
    Eigen::MatrixXd scale = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
      if (d[i] > 1e-12 * dmax) {
        scale(i, i) = 1.0 / std::sqrt(d[i]);
      } else {
        deficient = true;
      }
    }
    Eigen::MatrixXd z = y * es.eigenvectors() * scale;
    if (!deficient) {
      y = std::move(z);
      return;
    }
    // replace collapsed directions and retry
    for (int i = 0; i < p; ++i) {
      if (!(d[i] > 1e-12 * dmax)) {
        z.col(i).setZero();
        for (Index v : support) z(v, i) = gauss(rng);
      }
    }
    y = std::move(z);
  }
  throw Error("orthonormalize: persistent rank deficiency in the iteration block");
}

struct PencilProblem {
  const SpMat* stiffness = nullptr;
  VecX mass;                   // diagonal
  std::vector<Index> support;  // vertices with nonzero mass
  bool closed = false;         // closed mesh: stiffness kernel is the constants
};

// Harmonic extension of eigenvectors onto zero-mass vertices:
// solve A_NN u_N = -A_NS u_S for the off-support block.
void extend_harmonically(const PencilProblem& problem, Eigen::MatrixXd& vectors) {
  const Index n = problem.mass.size();
  std::vector<char> on_support(n, 0);
  for (Index v : problem.support) on_support[v] = 1;
  std::vector<Index> outside;
  for (Index v = 0; v < n; ++v) {
    if (!on_support[v]) outside.push_back(v);
  }
  if (outside.empty()) return;

  std::vector<Index> slot(n, -1);
  for (Index i = 0; i < static_cast<Index>(outside.size()); ++i) slot[outside[i]] = i;

  const SpMat& a = *problem.stiffness;
  std::vector<Eigen::Triplet<double>> nn;
  for (Index col = 0; col < a.outerSize(); ++col) {
    if (slot[col] < 0) continue;
    for (SpMat::InnerIterator it(a, col); it; ++it) {
      if (slot[it.row()] >= 0) nn.emplace_back(slot[it.row()], slot[col], it.value());
    }
  }
  SpMat a_nn(static_cast<Index>(outside.size()), static_cast<Index>(outside.size()));
  a_nn.setFromTriplets(nn.begin(), nn.end());
  Eigen::SimplicialLDLT<SpMat> factor(a_nn);
  if (factor.info() != Eigen::Success) return;  // keep iterated values

  for (int j = 0; j < vectors.cols(); ++j) {
    VecX u = vectors.col(j);
    for (Index v : outside) u[v] = 0.0;
    VecX coupling = a * u;  // (A_NS u_S) on the outside rows
    VecX rhs(static_cast<Index>(outside.size()));
    for (std::size_t i = 0; i < outside.size(); ++i) rhs[static_cast<Index>(i)] = -coupling[outside[i]];
    const VecX fill = factor.solve(rhs);
    for (std::size_t i = 0; i < outside.size(); ++i) vectors(outside[i], j) = fill[static_cast<Index>(i)];
  }
}

VecX pair_residuals(const SpMat& a, const VecX& m, const VecX& values,
                    const Eigen::MatrixXd& vectors) {
  VecX res(values.size());
  for (int i = 0; i < values.size(); ++i) {
    const VecX u = vectors.col(i);
    res[i] = (a * u - values[i] * m.cwiseProduct(u)).norm() / u.norm();
  }
  return res;
}

// Block shift-invert subspace iteration for the definite pencil
// (A, diag(m)), m >= 0. Only the diagonal mass changes between optimizer
// steps, so the factored operator is rebuilt numerically per call while the
// stiffness pattern stays fixed.
SpectralResult solve_definite(const PencilProblem& problem,
                              const SolverOptions& options) {
  const SpMat& a = *problem.stiffness;
  const Index n = a.rows();
  const VecX& m = problem.mass;
  const int count = options.count;
  const int p = std::min<Index>(n, count + std::max(4, count / 2));

  double sigma = 0.0;
  if (problem.closed) {
    sigma = 1e-6 * a.diagonal().sum() / std::max(m.sum(), 1e-300);
  }

  SpMat shifted = a;
  if (sigma != 0.0) {
    VecX diag_add = sigma * m;
    for (Index v = 0; v < n; ++v) shifted.coeffRef(v, v) += diag_add[v];
  }
  Eigen::SimplicialLDLT<SpMat> factor(shifted);
  if (factor.info() != Eigen::Success) {
    throw Error("eigensolver: factorization of the shifted operator failed");
  }

  Eigen::MatrixXd x(n, p);
  int seeded = 0;
  if (options.warm_start != nullptr && options.warm_start->rows() == n) {
    const int reuse = std::min<int>(p, static_cast<int>(options.warm_start->cols()));
    x.leftCols(reuse) = options.warm_start->leftCols(reuse);
    seeded = reuse;
  }
  if (seeded < p) {
    x.rightCols(p - seeded) = random_block(n, p - seeded, options.seed);
    if (problem.closed && seeded == 0) x.col(0).setOnes();
  }
  orthonormalize(x, m, problem.support, options.seed ^ 0x5bf0a8b1u);

  VecX theta;
  VecX best_res;
  double best_max = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_x;
  VecX best_theta;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Eigen::MatrixXd y = factor.solve(m.asDiagonal() * x);
    orthonormalize(y, m, problem.support, options.seed ^ (0xa076u + iter));
    Eigen::MatrixXd h = y.transpose() * (a * y);
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(h);
    x = y * rr.eigenvectors();
    theta = rr.eigenvalues();

    // convergence on the requested pairs, scale-free
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
      const VecX u = x.col(i);
      const VecX au = a * u;
      const VecX mu = m.cwiseProduct(u);
      const double scale = au.norm() + std::abs(theta[i]) * mu.norm();
      const double rel = (au - theta[i] * mu).norm() / std::max(scale, 1e-300);
      worst = std::max(worst, rel);
    }
    if (worst < best_max) {
      best_max = worst;
      best_x = x.leftCols(count);
      best_theta = theta.head(count);
    }
    if (worst <= options.tol) break;
  }

  if (best_max > options.tol) {
    VecX res = pair_residuals(a, m, best_theta, best_x);
    std::ostringstream msg;
    msg << "eigensolver: no convergence within " << options.max_iterations
        << " iterations (best relative residual " << best_max << ")";
    throw ConvergenceError(msg.str(), res);
  }

  SpectralResult result;
  result.eigenvalues = best_theta;
  result.eigenvectors = best_x;
  if (static_cast<Index>(problem.support.size()) < n) {
    extend_harmonically(problem, result.eigenvectors);
  }
  result.residuals = pair_residuals(a, m, result.eigenvalues, result.eigenvectors);
  result.multiplicity_groups = cluster_eigenvalues(result.eigenvalues, options.group_gap);
  return result;
}

// Paper-mode path for sign-indefinite mass: the reciprocal pencil
// M y = nu A y is definite on the complement of the constants, and the
// nonnegative eigenvalues of (A, M) are lambda = 1/nu over the positive nu,
// plus lambda_0 = 0 with constant eigenvector. Experimental.
SpectralResult solve_indefinite(const PencilProblem& problem,
                                const SolverOptions& options) {
  const SpMat& a = *problem.stiffness;
  const Index n = a.rows();
  const VecX& m = problem.mass;
  const int count = options.count;
  const int want = count - 1;  // nonzero eigenvalues; lambda_0 handled directly
  const int p = std::min<Index>(n - 1, want + std::max(6, want));

  if (!problem.closed) {
    throw ConfigurationError("paper-mode solve requires a closed mesh");
  }

  // grounded stiffness: pin vertex 0 to factor the rank-deficient operator
  SpMat grounded = a;
  for (SpMat::InnerIterator it(grounded, 0); it; ++it) it.valueRef() = 0.0;
  for (Index col = 0; col < grounded.outerSize(); ++col) {
    for (SpMat::InnerIterator it(grounded, col); it; ++it) {
      if (it.row() == 0) it.valueRef() = 0.0;
    }
  }
  grounded.coeffRef(0, 0) = 1.0;
  grounded.makeCompressed();
  Eigen::SimplicialLDLT<SpMat> factor(grounded);
  if (factor.info() != Eigen::Success) {
    throw Error("eigensolver: grounded factorization failed");
  }
  const double total_mass = m.sum();
  auto deflate = [&](Eigen::MatrixXd& block) {
    // keep iterates M-orthogonal to the constants
    for (int j = 0; j < block.cols(); ++j) {
      block.col(j).array() -= m.dot(block.col(j)) / total_mass;
    }
  };
  auto apply_inverse = [&](const Eigen::MatrixXd& rhs) {
    Eigen::MatrixXd out(n, rhs.cols());
    for (int j = 0; j < rhs.cols(); ++j) {
      VecX r = rhs.col(j);
      r.array() -= r.mean();  // consistency with the stiffness kernel
      r[0] = 0.0;
      out.col(j) = factor.solve(r);
    }
    return out;
  };

  Eigen::MatrixXd x = random_block(n, p, options.seed);
  if (options.warm_start != nullptr && options.warm_start->rows() == n) {
    const int reuse = std::min<int>(p, static_cast<int>(options.warm_start->cols()));
    x.leftCols(reuse) = options.warm_start->leftCols(reuse);
  }
  deflate(x);

  Eigen::MatrixXd vectors;
  VecX nu;
  double best_max = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_vectors;
  VecX best_lambda;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Eigen::MatrixXd y = apply_inverse(m.asDiagonal() * x);
    deflate(y);
    // A-orthonormalize
    Eigen::MatrixXd gram = y.transpose() * (a * y);
    gram = 0.5 * (gram + gram.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> go(gram);
    const VecX d = go.eigenvalues();
    const double dmax = d.maxCoeff();
    Eigen::MatrixXd scale = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) {
      scale(i, i) = d[i] > 1e-13 * dmax ? 1.0 / std::sqrt(d[i]) : 0.0;
    }
    y = (y * go.eigenvectors() * scale).eval();
    Eigen::MatrixXd h = y.transpose() * (m.asDiagonal() * y);
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(h);
    x = y * rr.eigenvectors();
    nu = rr.eigenvalues();  // ascending; positive tail is what we want

    std::vector<int> chosen;
    for (int i = p - 1; i >= 0 && static_cast<int>(chosen.size()) < want; --i) {
      if (nu[i] > 0.0) chosen.push_back(i);
    }
    if (static_cast<int>(chosen.size()) < want) continue;

    VecX lambda(want);
    Eigen::MatrixXd candidates(n, want);
    double worst = 0.0;
    for (int i = 0; i < want; ++i) {
      const int src = chosen[i];  // descending nu = ascending lambda
      lambda[i] = 1.0 / nu[src];
      VecX u = x.col(src);
      const double mn = u.dot(m.cwiseProduct(u));
      if (mn > 0.0) u /= std::sqrt(mn);
      candidates.col(i) = u;
      const VecX au = a * u;
      const VecX mu = m.cwiseProduct(u);
      const double s = au.norm() + std::abs(lambda[i]) * mu.norm();
      worst = std::max(worst, (au - lambda[i] * mu).norm() / std::max(s, 1e-300));
    }
    if (worst < best_max) {
      best_max = worst;
      best_lambda = lambda;
      best_vectors = candidates;
    }
    if (worst <= options.tol) break;
  }

  if (best_max > options.tol) {
    std::ostringstream msg;
    msg << "eigensolver (paper mode): no convergence within "
        << options.max_iterations << " iterations (best residual " << best_max
        << ")";
    throw ConvergenceError(msg.str(), best_lambda);
  }

  SpectralResult result;
  result.eigenvalues = VecX(count);
  result.eigenvectors = Eigen::MatrixXd(n, count);
  result.eigenvalues[0] = 0.0;
  result.eigenvectors.col(0) = VecX::Constant(n, 1.0 / std::sqrt(total_mass));
  result.eigenvalues.tail(want) = best_lambda;
  result.eigenvectors.rightCols(want) = best_vectors;
  result.residuals = pair_residuals(a, m, result.eigenvalues, result.eigenvectors);
  result.multiplicity_groups = cluster_eigenvalues(result.eigenvalues, options.group_gap);
  return result;
}

PencilProblem make_problem(const SpMat& a, const VecX& m, bool closed) {
  PencilProblem problem;
  problem.stiffness = &a;
  problem.mass = m;
  problem.closed = closed;
  const double cutoff = kSupportCutoff * m.cwiseAbs().maxCoeff();
  for (Index v = 0; v < m.size(); ++v) {
    if (std::abs(m[v]) > cutoff) problem.support.push_back(v);
  }
  return problem;
}

void check_options(const SolverOptions& options, Index support_size) {
  if (options.count < 1) throw ConfigurationError("eigensolver: count must be positive");
  if (!(options.tol > 0.0) || options.tol > 1e-2) {
    throw ConfigurationError("eigensolver: tol must lie in (0, 1e-2]");
  }
  if (options.count > support_size) {
    throw ConfigurationError(
        "eigensolver: requested more pairs than vertices carrying mass");
  }
}

}  // namespace

std::pair<int, int> SpectralResult::group_containing(int k) const {
  for (const auto& g : multiplicity_groups) {
    if (k >= g.first && k < g.second) return g;
  }
  throw ConfigurationError("group_containing: index outside computed spectrum");
}

std::vector<std::pair<int, int>> cluster_eigenvalues(const VecX& eigenvalues,
                                                     double group_gap) {
  std::vector<std::pair<int, int>> groups;
  const int n = static_cast<int>(eigenvalues.size());
  if (n == 0) return groups;
  const double floor_scale =
      1e-8 * std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
  int begin = 0;
  for (int i = 1; i < n; ++i) {
    const double gap = eigenvalues[i] - eigenvalues[i - 1];
    const double scale = std::max(std::abs(eigenvalues[i]), floor_scale);
    if (gap > group_gap * scale) {
      groups.emplace_back(begin, i);
      begin = i;
    }
  }
  groups.emplace_back(begin, n);
  return groups;
}

SpectralResult solve_smallest(const StiffnessForm& stiffness,
                              const MassForm& mass,
                              const SolverOptions& options) {
  if (mass.diagonal.size() != stiffness.matrix.rows()) {
    throw AssemblyError("solve_smallest: stiffness and mass sizes differ");
  }
  const bool indefinite = (mass.diagonal.array() < 0.0).any();
  if (indefinite && !options.paper_mode) {
    throw ConfigurationError(
        "solve_smallest: indefinite mass requires paper_mode");
  }
  PencilProblem problem = make_problem(stiffness.matrix, mass.diagonal, true);
  check_options(options, static_cast<Index>(problem.support.size()));
  return indefinite ? solve_indefinite(problem, options)
                    : solve_definite(problem, options);
}

SpectralResult solve_dirichlet(const Submesh& submesh,
                               const DensityField& density,
                               const SolverOptions& options) {
  if (submesh.mesh.boundary_vertices.empty()) {
    throw ConfigurationError("solve_dirichlet: submesh has no boundary");
  }
  const StiffnessForm stiffness = assemble_stiffness(submesh.mesh);
  const MassForm mass = assemble_mass(submesh.mesh, density);
  DirichletRestriction restriction(submesh);

  const SpMat a_ii = restriction.restrict_matrix(stiffness.matrix);
  const VecX m_ii = restriction.restrict_values(mass.diagonal);
  if ((m_ii.array() < 0.0).any()) {
    throw ConfigurationError("solve_dirichlet: negative interior mass");
  }

  PencilProblem problem = make_problem(a_ii, m_ii, false);
  check_options(options, static_cast<Index>(problem.support.size()));
  SpectralResult interior = solve_definite(problem, options);

  SpectralResult result;
  result.eigenvalues = interior.eigenvalues;
  result.residuals = interior.residuals;
  result.multiplicity_groups = interior.multiplicity_groups;
  result.eigenvectors =
      Eigen::MatrixXd::Zero(submesh.mesh.vertex_count(), interior.count());
  for (int j = 0; j < interior.count(); ++j) {
    result.eigenvectors.col(j) = restriction.prolong(interior.eigenvectors.col(j));
  }
  return result;
}

double rayleigh_quotient(const StiffnessForm& stiffness, const MassForm& mass,
                         const VecX& u) {
  const double m_norm = mass.quadratic(u);
  if (std::abs(m_norm) < 1e-300) {
    throw Error("rayleigh_quotient: vanishing M-norm");
  }
  return stiffness.quadratic(u) / m_norm;
}

}  // namespace conformax
