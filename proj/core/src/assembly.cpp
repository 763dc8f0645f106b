#include "conformax/assembly.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "conformax/errors.hpp"

namespace conformax {

StiffnessForm assemble_stiffness(const TriangleMesh& mesh) {
  const Index n = mesh.vertex_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 12);

  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    if (!(mesh.triangle_areas[t] > 0.0)) {
      std::ostringstream msg;
      msg << "assemble_stiffness: triangle " << t << " has nonpositive area";
      throw AssemblyError(msg.str());
    }
    const auto c = mesh.triangle_corners(t);
    // half-cotangent weight opposite each edge
    for (int e = 0; e < 3; ++e) {
      const Index i = mesh.triangles(t, (e + 1) % 3);
      const Index j = mesh.triangles(t, (e + 2) % 3);
      const Vec3 a = c[(e + 1) % 3] - c[e];
      const Vec3 b = c[(e + 2) % 3] - c[e];
      const double cross = a.cross(b).norm();
      if (cross <= 0.0) {
        std::ostringstream msg;
        msg << "assemble_stiffness: triangle " << t << " is degenerate";
        throw AssemblyError(msg.str());
      }
      const double w = 0.5 * a.dot(b) / cross;
      triplets.emplace_back(i, j, -w);
      triplets.emplace_back(j, i, -w);
      triplets.emplace_back(i, i, w);
      triplets.emplace_back(j, j, w);
    }
  }

  StiffnessForm form;
  form.matrix.resize(n, n);
  form.matrix.setFromTriplets(triplets.begin(), triplets.end());
  form.matrix.makeCompressed();
  return form;
}

DensityField uniform_density(const TriangleMesh& mesh, double lower_bound,
                             double cap) {
  DensityField density;
  density.values = VecX::Constant(mesh.vertex_count(), 1.0 / mesh.total_area());
  density.lower_bound = lower_bound;
  density.cap = cap;
  return density;
}

MassForm assemble_mass(const TriangleMesh& mesh, const DensityField& density) {
  if (density.values.size() != mesh.vertex_count()) {
    throw AssemblyError("assemble_mass: density size does not match mesh");
  }
  MassForm mass;
  mass.diagonal = mesh.vertex_area_weights().cwiseProduct(density.values);
  return mass;
}

DirichletRestriction::DirichletRestriction(const Submesh& submesh) {
  const Index n = submesh.mesh.vertex_count();
  interior_index.assign(n, -1);
  for (Index v = 0; v < n; ++v) {
    if (!submesh.mesh.is_boundary_vertex(v)) {
      interior_index[v] = static_cast<Index>(interior.size());
      interior.push_back(v);
    }
  }
  if (interior.empty()) {
    throw DegenerateDomainError(
        "Dirichlet restriction left no interior vertices");
  }
}

SpMat DirichletRestriction::restrict_matrix(const SpMat& full) const {
  const Index m = interior_count();
  if (m == full.rows() && m == full.cols()) {
    bool identity = true;
    for (Index i = 0; i < m; ++i) identity = identity && interior[i] == i;
    if (identity) return full;
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index col = 0; col < full.outerSize(); ++col) {
    const Index jc = interior_index[col];
    if (jc < 0) continue;
    for (SpMat::InnerIterator it(full, col); it; ++it) {
      const Index ir = interior_index[it.row()];
      if (ir >= 0) triplets.emplace_back(ir, jc, it.value());
    }
  }
  SpMat reduced(m, m);
  reduced.setFromTriplets(triplets.begin(), triplets.end());
  reduced.makeCompressed();
  return reduced;
}

VecX DirichletRestriction::restrict_values(const VecX& full) const {
  VecX out(interior_count());
  for (Index i = 0; i < interior_count(); ++i) out[i] = full[interior[i]];
  return out;
}

VecX DirichletRestriction::prolong(const VecX& interior_values) const {
  VecX out = VecX::Zero(static_cast<Index>(interior_index.size()));
  for (Index i = 0; i < interior_count(); ++i) out[interior[i]] = interior_values[i];
  return out;
}

VecX restrict_to_submesh(const VecX& parent_values, const Submesh& submesh) {
  VecX out(submesh.mesh.vertex_count());
  for (Index v = 0; v < submesh.mesh.vertex_count(); ++v) {
    out[v] = parent_values[submesh.parent_vertex[v]];
  }
  return out;
}

DensityField restrict_to_submesh(const DensityField& parent,
                                 const Submesh& submesh) {
  DensityField out;
  out.values = restrict_to_submesh(parent.values, submesh);
  out.lower_bound = parent.lower_bound;
  out.cap = parent.cap;
  return out;
}

void write_matrix_market(const SpMat& matrix, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  std::size_t nnz_lower = 0;
  for (Index col = 0; col < matrix.outerSize(); ++col) {
    for (SpMat::InnerIterator it(matrix, col); it; ++it) {
      if (it.row() >= it.col()) ++nnz_lower;
    }
  }
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << nnz_lower << '\n';
  const auto flags = out.flags();
  out.precision(17);
  for (Index col = 0; col < matrix.outerSize(); ++col) {
    for (SpMat::InnerIterator it(matrix, col); it; ++it) {
      if (it.row() >= it.col()) {
        out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
      }
    }
  }
  out.flags(flags);
}

void write_matrix_market(const SpMat& matrix, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_matrix_market(matrix, out);
}

}  // namespace conformax
