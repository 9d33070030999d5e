#include "enprop/partition.hpp"

#include <stdexcept>
#include <string>

namespace enprop {

namespace {

/// Global ids of every node in the x = plane slice, ascending.
std::vector<int> plane_node_ids(int nodes_per_axis, int plane) {
  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(nodes_per_axis) * nodes_per_axis);
  for (int k = 0; k < nodes_per_axis; ++k)
    for (int j = 0; j < nodes_per_axis; ++j)
      ids.push_back(plane + nodes_per_axis * (j + nodes_per_axis * k));
  return ids;
}

}  // namespace

int SlabPartition::owner_of_plane(int plane) const {
  if (plane < 0 || plane >= nodes_per_axis)
    throw std::out_of_range("SlabPartition: plane index out of range");
  for (int r = 0; r < num_ranks; ++r) {
    if (plane < ranges[r].first_plane + ranges[r].num_planes) return r;
  }
  return num_ranks - 1;
}

SlabPartition partition(const StructuredMesh& mesh, int p) {
  const int planes = mesh.nodes_per_axis();
  if (p < 1) throw std::invalid_argument("partition: need at least one rank");
  if (p > planes)
    throw std::invalid_argument("partition: " + std::to_string(p) + " ranks exceed " +
                                std::to_string(planes) + " node planes");

  SlabPartition part;
  part.num_ranks = p;
  part.nodes_per_axis = planes;
  part.ranges.resize(p);
  part.links.resize(p);

  const int base = planes / p;
  const int extra = planes % p;
  int next = 0;
  for (int r = 0; r < p; ++r) {
    part.ranges[r].first_plane = next;
    part.ranges[r].num_planes = base + (r < extra ? 1 : 0);
    next += part.ranges[r].num_planes;
  }

  for (int r = 0; r < p; ++r) {
    const int first = part.ranges[r].first_plane;
    const int last = first + part.ranges[r].num_planes - 1;
    if (r > 0) {
      HaloLink down;
      down.neighbor = r - 1;
      down.send_nodes = plane_node_ids(planes, first);
      down.recv_nodes = plane_node_ids(planes, first - 1);
      part.links[r].push_back(std::move(down));
    }
    if (r + 1 < p) {
      HaloLink up;
      up.neighbor = r + 1;
      up.send_nodes = plane_node_ids(planes, last);
      up.recv_nodes = plane_node_ids(planes, last + 1);
      part.links[r].push_back(std::move(up));
    }
  }
  return part;
}

}  // namespace enprop
