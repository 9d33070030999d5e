#include "enprop/mesh.hpp"

#include <algorithm>
#include <stdexcept>

namespace enprop {

StructuredMesh::StructuredMesh(int cells_per_axis) : n_(cells_per_axis) {
  if (cells_per_axis < 1)
    throw std::invalid_argument("StructuredMesh: cells_per_axis must be at least 1");
}

Graph build_node_graph(const StructuredMesh& mesh) {
  const int n = mesh.cells_per_axis();
  const int npa = n + 1;
  Graph g;
  g.num_rows = g.num_cols = mesh.num_nodes();
  g.row_map.resize(g.num_rows + 1);

  // Neighbors of node (i,j,k) are the nodes within one step per axis,
  // clipped at the boundary. Counting first keeps the fill single-pass.
  auto span = [npa](int i) {
    int lo = i > 0 ? i - 1 : 0;
    int hi = i < npa - 1 ? i + 1 : npa - 1;
    return std::pair<int, int>{lo, hi};
  };

  g.row_map[0] = 0;
  for (int k = 0; k < npa; ++k)
    for (int j = 0; j < npa; ++j)
      for (int i = 0; i < npa; ++i) {
        auto [ilo, ihi] = span(i);
        auto [jlo, jhi] = span(j);
        auto [klo, khi] = span(k);
        int row = mesh.node_id(i, j, k);
        g.row_map[row + 1] = (ihi - ilo + 1) * (jhi - jlo + 1) * (khi - klo + 1);
      }
  for (int row = 0; row < g.num_rows; ++row) g.row_map[row + 1] += g.row_map[row];

  g.col_entry.resize(g.row_map.back());
  for (int k = 0; k < npa; ++k)
    for (int j = 0; j < npa; ++j)
      for (int i = 0; i < npa; ++i) {
        int row = mesh.node_id(i, j, k);
        int at = g.row_map[row];
        auto [ilo, ihi] = span(i);
        auto [jlo, jhi] = span(j);
        auto [klo, khi] = span(k);
        // kk-major then jj then ii yields ascending node ids directly.
        for (int kk = klo; kk <= khi; ++kk)
          for (int jj = jlo; jj <= jhi; ++jj)
            for (int ii = ilo; ii <= ihi; ++ii) g.col_entry[at++] = mesh.node_id(ii, jj, kk);
      }
  return g;
}

}  // namespace enprop
