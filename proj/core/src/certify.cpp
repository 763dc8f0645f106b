#include "conformax/certify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Dense>
#include <gsl/gsl_sf_bessel.h>

#include "conformax/errors.hpp"

namespace conformax {

std::vector<SphereSpectrumEntry> sphere_spectrum(int l_max) {
  if (l_max < 0) throw ConfigurationError("sphere_spectrum: l_max must be >= 0");
  std::vector<SphereSpectrumEntry> entries;
  entries.reserve(l_max + 1);
  for (int l = 0; l <= l_max; ++l) {
    SphereSpectrumEntry e;
    e.l = l;
    e.value = static_cast<double>(l) * (l + 1);
    e.normalized = e.value * 4.0 * std::numbers::pi;
    e.multiplicity = 2 * l + 1;
    entries.push_back(e);
  }
  return entries;
}

std::vector<SpectrumEntry> torus_spectrum(double width, double height, int count) {
  if (width <= 0.0 || height <= 0.0) {
    throw ConfigurationError("torus_spectrum: dimensions must be positive");
  }
  if (count < 1) throw ConfigurationError("torus_spectrum: count must be positive");

  // enumerate lattice modes out to a radius that safely covers `count`
  // distinct values, growing on demand
  std::map<double, int> hits;
  int reach = 4;
  const double pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  while (true) {
    hits.clear();
    for (int p = -reach; p <= reach; ++p) {
      for (int q = -reach; q <= reach; ++q) {
        const double value = pi2 * (static_cast<double>(p) * p / (width * width) +
                                    static_cast<double>(q) * q / (height * height));
        ++hits[value];
      }
    }
    // the enumeration box is complete up to the value its inscribed disk covers
    const double safe = pi2 * reach * reach /
                        std::max(width * width, height * height);
    std::vector<SpectrumEntry> entries;
    for (const auto& [value, mult] : hits) {
      if (value > safe) break;
      entries.push_back({value, mult});
      if (static_cast<int>(entries.size()) == count) return entries;
    }
    reach *= 2;
    if (reach > 1 << 14) throw Error("torus_spectrum: enumeration overflow");
  }
}

double bessel_zero(int m, int s) {
  if (m < 0 || s < 1) throw ConfigurationError("bessel_zero: need m >= 0, s >= 1");
  // bracket by scanning from the previous zero (McMahon spacing ~ pi)
  auto f = [m](double x) { return gsl_sf_bessel_Jn(m, x); };
  double lo = m == 0 ? 1e-9 : static_cast<double>(m);  // J_m > 0 just right of m for small x
  int found = 0;
  double flo = f(lo);
  const double step = 0.1;
  for (double hi = lo + step; hi < 1e5; hi += step) {
    const double fhi = f(hi);
    if (flo == 0.0) {  // landed exactly on a zero
      ++found;
      if (found == s) return lo;
    } else if (flo * fhi < 0.0) {
      ++found;
      if (found == s) {
        double a = lo, b = hi, fa = flo;
        while (b - a > 1e-12 * b) {
          const double mid = 0.5 * (a + b);
          const double fm = f(mid);
          if (fa * fm <= 0.0) {
            b = mid;
          } else {
            a = mid;
            fa = fm;
          }
        }
        return 0.5 * (a + b);
      }
    }
    lo = hi;
    flo = fhi;
  }
  throw Error("bessel_zero: bracket scan exhausted");
}

std::vector<double> disk_dirichlet_spectrum(double radius, int count) {
  if (radius <= 0.0) throw ConfigurationError("disk spectrum: radius must be positive");
  if (count < 1) throw ConfigurationError("disk spectrum: count must be positive");

  std::vector<double> values;
  // j_{m,s} grows with both indices, so a modest index box suffices
  const int box = count + 2;
  for (int m = 0; m <= box; ++m) {
    for (int s = 1; s <= box; ++s) {
      const double z = bessel_zero(m, s) / radius;
      const int mult = m == 0 ? 1 : 2;
      for (int i = 0; i < mult; ++i) values.push_back(z * z);
    }
  }
  std::sort(values.begin(), values.end());
  values.resize(count);
  return values;
}

namespace {

// Least-squares fit of a symmetric PSD Gram matrix Q with
// u(x)^T Q u(x) ~ 1 on the support, by projected gradient on the PSD cone
// seeded at the PSD projection of the unconstrained normal-equation solution.
Eigen::MatrixXd fit_gram_matrix(const Eigen::MatrixXd& basis_rows,
                                const VecX& weights) {
  const int m = static_cast<int>(basis_rows.cols());
  const Index ns = basis_rows.rows();
  const int dim = m * m;

  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(dim, dim);
  VecX rhs = VecX::Zero(dim);
  for (Index x = 0; x < ns; ++x) {
    const Eigen::VectorXd u = basis_rows.row(x);
    const Eigen::MatrixXd outer = u * u.transpose();
    const Eigen::Map<const VecX> a(outer.data(), dim);
    normal.noalias() += weights[x] * (a * a.transpose());
    rhs.noalias() += weights[x] * a;
  }
  normal.diagonal().array() += 1e-12 * normal.trace() / dim;
  VecX q_vec = normal.ldlt().solve(rhs);
  Eigen::MatrixXd q = Eigen::Map<Eigen::MatrixXd>(q_vec.data(), m, m);
  q = 0.5 * (q + q.transpose()).eval();

  auto project_psd = [](const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    VecX d = es.eigenvalues().cwiseMax(0.0);
    return Eigen::MatrixXd(es.eigenvectors() * d.asDiagonal() *
                           es.eigenvectors().transpose());
  };
  q = project_psd(q);

  auto objective_and_gradient = [&](const Eigen::MatrixXd& g,
                                    Eigen::MatrixXd* grad) {
    double f = 0.0;
    if (grad != nullptr) grad->setZero(m, m);
    for (Index x = 0; x < ns; ++x) {
      const Eigen::VectorXd u = basis_rows.row(x);
      const double miss = u.dot(g * u) - 1.0;
      f += weights[x] * miss * miss;
      if (grad != nullptr) grad->noalias() += 2.0 * weights[x] * miss * (u * u.transpose());
    }
    return f;
  };

  Eigen::MatrixXd grad(m, m);
  double f = objective_and_gradient(q, &grad);
  double step = 1.0 / std::max(grad.norm(), 1e-12);
  for (int it = 0; it < 1000; ++it) {
    if (grad.norm() < 1e-13 * std::max(1.0, f)) break;
    Eigen::MatrixXd trial = project_psd(q - step * grad);
    const double ft = objective_and_gradient(trial, nullptr);
    if (ft < f - 1e-16) {
      q = std::move(trial);
      f = objective_and_gradient(q, &grad);
      step *= 1.3;
    } else {
      step *= 0.5;
      if (step < 1e-18) break;
    }
  }
  return q;
}

}  // namespace

HarmonicMapCertificate harmonic_map_certificate(
    const StiffnessForm& stiffness, const SpectralResult& result,
    std::pair<int, int> group, const std::vector<Index>& regular_support,
    const VecX& vertex_weights, double tolerance) {
  const int m = group.second - group.first;
  if (m <= 0) throw ConfigurationError("certificate: empty eigenvalue group");
  if (regular_support.empty()) {
    throw ConfigurationError("certificate: empty regular support");
  }

  const Index ns = static_cast<Index>(regular_support.size());
  Eigen::MatrixXd rows(ns, m);
  VecX weights(ns);
  for (Index i = 0; i < ns; ++i) {
    const Index v = regular_support[i];
    rows.row(i) = result.eigenvectors.row(v).segment(group.first, m);
    weights[i] = vertex_weights[v];
  }

  const Eigen::MatrixXd q = fit_gram_matrix(rows, weights);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
  const VecX d = es.eigenvalues();
  const double dmax = std::max(d.maxCoeff(), 0.0);

  HarmonicMapCertificate cert;
  cert.tolerance = tolerance;
  std::vector<int> kept;
  for (int i = 0; i < m; ++i) {
    if (d[i] > 1e-6 * dmax) kept.push_back(i);
  }
  cert.ell = static_cast<int>(kept.size());
  cert.coefficients.resize(cert.ell, m);
  for (int r = 0; r < cert.ell; ++r) {
    cert.coefficients.row(r) =
        std::sqrt(d[kept[r]]) * es.eigenvectors().col(kept[r]).transpose();
  }

  double defect = 0.0;
  for (Index i = 0; i < ns; ++i) {
    const Eigen::VectorXd mapped = cert.coefficients * rows.row(i).transpose();
    defect = std::max(defect, std::abs(mapped.squaredNorm() - 1.0));
  }
  cert.sphere_defect = defect;
  cert.valid = defect < tolerance;

  const Eigen::MatrixXd family =
      result.eigenvectors.middleCols(group.first, m) * cert.coefficients.transpose();
  double energy = 0.0;
  for (int i = 0; i < cert.ell; ++i) {
    energy += stiffness.quadratic(family.col(i));
  }
  cert.dirichlet_energy = energy;
  return cert;
}

}  // namespace conformax
