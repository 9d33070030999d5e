#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "enprop/crs.hpp"
#include "enprop/ensemble.hpp"
#include "enprop/partition.hpp"

namespace enprop {

/// Cost parameters of one simulated message: a fixed latency plus the
/// payload bytes divided by bandwidth. One message carries every ensemble
/// component of its plane, so latency is paid once per plane, not per
/// component.
struct TransportModel {
  double latency_seconds = 100e-6;
  double bandwidth_bytes_per_second = 1e9;
  int bytes_per_component = 8;

  void validate() const {
    if (latency_seconds < 0.0)
      throw std::invalid_argument("TransportModel: latency must be non-negative");
    if (bandwidth_bytes_per_second <= 0.0)
      throw std::invalid_argument("TransportModel: bandwidth must be positive");
  }
};

/// Fitted exchange-time model T(s) = a + b*s.
struct HaloModel {
  double a = 0.0;  // seconds, the latency part
  double b = 0.0;  // seconds per ensemble component, the bandwidth part
};

struct HaloFit {
  HaloModel model;
  double residual_sum_of_squares = 0.0;
};

/// One rank's slice of a node vector with a runtime number of interleaved
/// components per node: the owned planes followed by up to two ghost
/// planes. Local lookup is O(1) from the global node id.
class DistributedField {
 public:
  DistributedField(const SlabPartition& part, int rank, int num_components);

  int rank() const { return rank_; }
  int num_components() const { return components_; }
  int owned_nodes() const { return num_planes_ * plane_nodes_; }
  int ghost_nodes() const { return ((lower_ghost_ ? 1 : 0) + (upper_ghost_ ? 1 : 0)) * plane_nodes_; }

  bool owns(int node) const {
    const int plane = node % nodes_per_axis_;
    return plane >= first_plane_ && plane < first_plane_ + num_planes_;
  }
  bool is_local(int node) const;

  double& value(int node, int component) { return storage_[slot(node) * components_ + component]; }
  double value(int node, int component) const {
    return storage_[slot(node) * components_ + component];
  }

  void clear_ghosts();
  void mark_ghost_filled(int node);
  bool ghost_filled(int node) const;
  int unfilled_ghosts() const;

 private:
  int slot(int node) const;

  int rank_;
  int components_;
  int nodes_per_axis_;
  int plane_nodes_;
  int first_plane_;
  int num_planes_;
  bool lower_ghost_;
  bool upper_ghost_;
  std::vector<double> storage_;
  std::vector<char> filled_;
};

/// One simulated message; virtual_time is the sender's cumulative clock
/// after this message completes.
struct ExchangeRecord {
  int rank = 0;
  int neighbor = 0;
  std::int64_t bytes = 0;
  double virtual_time = 0.0;
};

struct ExchangeResult {
  double elapsed_seconds = 0.0;  // max over ranks of their summed message times
  int num_messages = 0;
  std::vector<ExchangeRecord> trace;
};

/// Fills every ghost plane from its owner through in-memory queues and
/// charges each rank latency + bytes/bandwidth per message it sends; the
/// returned elapsed time is the slowest rank's total. The clock is purely
/// an accounting device unless sleep_for_real is set, which additionally
/// delays the calling thread by the computed time (demonstration only).
ExchangeResult halo_exchange(const SlabPartition& part, std::vector<DistributedField>& fields,
                             const TransportModel& transport, bool sleep_for_real = false);

/// Ordinary least squares for T(s) = a + b*s over (s, time) points.
HaloFit fit_halo_model(const std::vector<std::pair<double, double>>& samples);

/// s*(a + b)/(a + b*s): how much faster one fused exchange of s components
/// is than s single-component exchanges.
double predicted_speedup(const HaloModel& model, double s);

void write_exchange_trace_csv(const std::string& path, const std::vector<ExchangeRecord>& trace);

/// Splits a global node vector into per-rank fields, one component slot per
/// ensemble component; ghosts start unfilled.
template <typename Scalar>
std::vector<DistributedField> distribute_vector(const SlabPartition& part,
                                                const DenseVector<Scalar>& x) {
  using ET = EnsembleTraits<Scalar>;
  if (static_cast<int>(x.size()) != part.num_nodes())
    throw std::invalid_argument("distribute_vector: vector length does not match partition");
  std::vector<DistributedField> fields;
  fields.reserve(part.num_ranks);
  for (int r = 0; r < part.num_ranks; ++r) {
    DistributedField field(part, r, ET::ensemble_size);
    const PlaneRange& range = part.ranges[r];
    for (int plane = range.first_plane; plane < range.first_plane + range.num_planes; ++plane)
      for (int q = 0; q < part.plane_nodes(); ++q) {
        const int node = plane + part.nodes_per_axis * q;
        for (int e = 0; e < ET::ensemble_size; ++e)
          field.value(node, e) = ET::coeff(x[node], e);
      }
    fields.push_back(std::move(field));
  }
  return fields;
}

/// Reassembles the owned parts of per-rank fields into a global vector.
template <typename Scalar>
DenseVector<Scalar> collect_vector(const SlabPartition& part,
                                   const std::vector<DistributedField>& fields) {
  using ET = EnsembleTraits<Scalar>;
  DenseVector<Scalar> x(part.num_nodes(), Scalar(0.0));
  for (int r = 0; r < part.num_ranks; ++r) {
    const PlaneRange& range = part.ranges[r];
    for (int plane = range.first_plane; plane < range.first_plane + range.num_planes; ++plane)
      for (int q = 0; q < part.plane_nodes(); ++q) {
        const int node = plane + part.nodes_per_axis * q;
        for (int e = 0; e < ET::ensemble_size; ++e)
          ET::coeff(x[node], e) = fields[r].value(node, e);
      }
  }
  return x;
}

template <typename Scalar>
struct DistributedSpmvResult {
  DenseVector<Scalar> product;
  ExchangeResult exchange;
};

/// Rank-by-rank matrix-vector product over the slab partition: distribute
/// x, exchange halos, then let each rank walk its owned rows in the global
/// entry order so the result matches the single-rank product bitwise.
template <typename Scalar>
DistributedSpmvResult<Scalar> distributed_spmv(const SlabPartition& part,
                                               const CrsMatrix<Scalar>& a,
                                               const DenseVector<Scalar>& x,
                                               const TransportModel& transport) {
  using ET = EnsembleTraits<Scalar>;
  if (a.num_rows != part.num_nodes() || a.num_cols != part.num_nodes())
    throw std::invalid_argument("distributed_spmv: matrix does not match partition");
  if (static_cast<int>(x.size()) != part.num_nodes())
    throw std::invalid_argument("distributed_spmv: vector length mismatch");

  auto fields = distribute_vector(part, x);
  DistributedSpmvResult<Scalar> out;
  out.exchange = halo_exchange(part, fields, transport);

  out.product.assign(part.num_nodes(), Scalar(0.0));
  for (int r = 0; r < part.num_ranks; ++r) {
    const DistributedField& field = fields[r];
    const PlaneRange& range = part.ranges[r];
    for (int plane = range.first_plane; plane < range.first_plane + range.num_planes; ++plane)
      for (int q = 0; q < part.plane_nodes(); ++q) {
        const int row = plane + part.nodes_per_axis * q;
        Scalar sum = Scalar(0.0);
        for (int k = a.row_map[row]; k < a.row_map[row + 1]; ++k) {
          const int col = a.col_entry[k];
          Scalar xv;
          for (int e = 0; e < ET::ensemble_size; ++e) ET::coeff(xv, e) = field.value(col, e);
          sum += a.values[k] * xv;
        }
        out.product[row] = sum;
      }
  }
  return out;
}

}  // namespace enprop
