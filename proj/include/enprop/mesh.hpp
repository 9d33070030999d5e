#pragma once

#include <array>

#include "enprop/crs.hpp"

namespace enprop {

/// Uniform hexahedral mesh of the unit cube with n cells per axis.
/// Nodes are numbered lexicographically with x fastest:
/// id = i + (n+1)*j + (n+1)^2*k. Cells follow the same convention, and the
/// eight corners of a cell are ordered x fastest as well, so corner c of
/// cell (ci, cj, ck) is node (ci + (c&1), cj + ((c>>1)&1), ck + ((c>>2)&1)).
class StructuredMesh {
 public:
  explicit StructuredMesh(int cells_per_axis);

  int cells_per_axis() const { return n_; }
  int nodes_per_axis() const { return n_ + 1; }
  int num_cells() const { return n_ * n_ * n_; }
  int num_nodes() const { return (n_ + 1) * (n_ + 1) * (n_ + 1); }
  double spacing() const { return 1.0 / n_; }

  int node_id(int i, int j, int k) const {
    return i + (n_ + 1) * (j + (n_ + 1) * k);
  }
  int cell_id(int ci, int cj, int ck) const { return ci + n_ * (cj + n_ * ck); }

  std::array<int, 3> node_ijk(int node) const {
    const int npa = n_ + 1;
    return {node % npa, (node / npa) % npa, node / (npa * npa)};
  }

  std::array<double, 3> node_coords(int node) const {
    auto ijk = node_ijk(node);
    const double h = spacing();
    return {ijk[0] * h, ijk[1] * h, ijk[2] * h};
  }

  /// Global node ids of the eight corners of a cell, in corner order.
  std::array<int, 8> cell_nodes(int cell) const {
    const int ci = cell % n_;
    const int cj = (cell / n_) % n_;
    const int ck = cell / (n_ * n_);
    std::array<int, 8> nodes;
    for (int c = 0; c < 8; ++c)
      nodes[c] = node_id(ci + (c & 1), cj + ((c >> 1) & 1), ck + ((c >> 2) & 1));
    return nodes;
  }

  int node_index(int cell, int corner) const { return cell_nodes(cell)[corner]; }

  bool on_x0_face(int node) const { return node % (n_ + 1) == 0; }
  bool on_x1_face(int node) const { return node % (n_ + 1) == n_; }

 private:
  int n_;
};

/// Node-to-node adjacency of the mesh: each node is coupled to every node
/// sharing a cell with it (up to 27 including itself), columns sorted.
/// This is the sparsity pattern of any matrix assembled from cell integrals
/// of the nodal basis.
Graph build_node_graph(const StructuredMesh& mesh);

}  // namespace enprop
