#include "enprop/multigrid.hpp"

namespace enprop {

Aggregation aggregate_graph(const Graph& g) {
  if (g.num_rows == 0) throw std::invalid_argument("aggregate_graph: empty graph");
  if (g.num_rows != g.num_cols)
    throw std::invalid_argument("aggregate_graph: graph must be square");

  Aggregation agg;
  agg.aggregate_of.assign(g.num_rows, -1);
  int next_id = 0;

  for (int row = 0; row < g.num_rows; ++row) {
    if (agg.aggregate_of[row] != -1) continue;

    bool absorbed_any = false;
    int smallest_neighbor_aggregate = -1;
    for (int k = g.row_map[row]; k < g.row_map[row + 1]; ++k) {
      const int col = g.col_entry[k];
      if (col == row) continue;
      if (agg.aggregate_of[col] == -1) {
        if (!absorbed_any) {
          absorbed_any = true;
          agg.aggregate_of[row] = next_id;
        }
        agg.aggregate_of[col] = next_id;
      } else if (smallest_neighbor_aggregate == -1 ||
                 agg.aggregate_of[col] < smallest_neighbor_aggregate) {
        smallest_neighbor_aggregate = agg.aggregate_of[col];
      }
    }

    if (absorbed_any) {
      ++next_id;
    } else if (smallest_neighbor_aggregate != -1) {
      agg.aggregate_of[row] = smallest_neighbor_aggregate;
    } else {
      agg.aggregate_of[row] = next_id++;
    }
  }
  agg.num_aggregates = next_id;
  return agg;
}

}  // namespace enprop
