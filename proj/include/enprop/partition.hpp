#pragma once

#include <vector>

#include "enprop/mesh.hpp"

namespace enprop {

/// Contiguous range of x-planes of nodes owned by one rank.
struct PlaneRange {
  int first_plane = 0;
  int num_planes = 0;
};

/// One neighbor relationship of a rank: the owned boundary-plane nodes it
/// sends and the ghost nodes it receives, both as global node ids in
/// ascending order.
struct HaloLink {
  int neighbor = -1;
  std::vector<int> send_nodes;
  std::vector<int> recv_nodes;
};

/// 1D decomposition of the mesh nodes into x-slabs. Every rank owns a
/// contiguous run of planes, so it has at most two neighbors and each
/// message carries exactly one plane of nodes.
struct SlabPartition {
  int num_ranks = 1;
  int nodes_per_axis = 0;
  std::vector<PlaneRange> ranges;         // indexed by rank
  std::vector<std::vector<HaloLink>> links;  // indexed by rank, ascending neighbor

  int plane_nodes() const { return nodes_per_axis * nodes_per_axis; }
  int num_nodes() const { return plane_nodes() * nodes_per_axis; }

  int owner_of_plane(int plane) const;
  int owner_of_node(int node) const { return owner_of_plane(node % nodes_per_axis); }
};

/// Splits the mesh into p x-slabs of nearly equal plane counts; when p does
/// not divide the plane count the lower ranks take one extra plane.
SlabPartition partition(const StructuredMesh& mesh, int p);

}  // namespace enprop
