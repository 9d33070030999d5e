#include "enprop/halo.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <thread>

namespace enprop {

DistributedField::DistributedField(const SlabPartition& part, int rank, int num_components)
    : rank_(rank),
      components_(num_components),
      nodes_per_axis_(part.nodes_per_axis),
      plane_nodes_(part.plane_nodes()) {
  if (rank < 0 || rank >= part.num_ranks)
    throw std::invalid_argument("DistributedField: rank out of range");
  if (num_components < 1)
    throw std::invalid_argument("DistributedField: need at least one component");
  first_plane_ = part.ranges[rank].first_plane;
  num_planes_ = part.ranges[rank].num_planes;
  lower_ghost_ = rank > 0;
  upper_ghost_ = rank + 1 < part.num_ranks;
  const int slots = owned_nodes() + ghost_nodes();
  storage_.assign(static_cast<std::size_t>(slots) * components_, 0.0);
  filled_.assign(ghost_nodes(), 0);
}

bool DistributedField::is_local(int node) const {
  if (node < 0 || node >= nodes_per_axis_ * plane_nodes_) return false;
  const int plane = node % nodes_per_axis_;
  if (plane >= first_plane_ && plane < first_plane_ + num_planes_) return true;
  if (lower_ghost_ && plane == first_plane_ - 1) return true;
  if (upper_ghost_ && plane == first_plane_ + num_planes_) return true;
  return false;
}

int DistributedField::slot(int node) const {
  const int plane = node % nodes_per_axis_;
  const int q = node / nodes_per_axis_;
  if (plane >= first_plane_ && plane < first_plane_ + num_planes_)
    return (plane - first_plane_) * plane_nodes_ + q;
  if (lower_ghost_ && plane == first_plane_ - 1) return owned_nodes() + q;
  if (upper_ghost_ && plane == first_plane_ + num_planes_)
    return owned_nodes() + (lower_ghost_ ? plane_nodes_ : 0) + q;
  throw std::out_of_range("DistributedField: node " + std::to_string(node) +
                          " is neither owned by nor a ghost of rank " + std::to_string(rank_));
}

void DistributedField::clear_ghosts() {
  std::fill(filled_.begin(), filled_.end(), 0);
  std::fill(storage_.begin() + static_cast<std::size_t>(owned_nodes()) * components_,
            storage_.end(), 0.0);
}

void DistributedField::mark_ghost_filled(int node) {
  filled_[slot(node) - owned_nodes()] = 1;
}

bool DistributedField::ghost_filled(int node) const {
  return filled_[slot(node) - owned_nodes()] != 0;
}

int DistributedField::unfilled_ghosts() const {
  int count = 0;
  for (char f : filled_)
    if (!f) ++count;
  return count;
}

namespace {

struct Message {
  int from = 0;
  int to = 0;
  std::vector<double> payload;  // node-major, components interleaved
};

}  // namespace

ExchangeResult halo_exchange(const SlabPartition& part, std::vector<DistributedField>& fields,
                             const TransportModel& transport, bool sleep_for_real) {
  transport.validate();
  if (static_cast<int>(fields.size()) != part.num_ranks)
    throw std::invalid_argument("halo_exchange: one field per rank required");
  const int components = fields.front().num_components();
  for (int r = 0; r < part.num_ranks; ++r) {
    if (fields[r].rank() != r)
      throw std::invalid_argument("halo_exchange: fields out of rank order");
    if (fields[r].num_components() != components)
      throw std::invalid_argument("halo_exchange: component counts differ across ranks");
  }

  // Send phase: every rank copies its boundary planes into the mailboxes.
  std::vector<std::vector<Message>> mailbox(part.num_ranks);
  for (int r = 0; r < part.num_ranks; ++r)
    for (const HaloLink& link : part.links[r]) {
      Message msg;
      msg.from = r;
      msg.to = link.neighbor;
      msg.payload.reserve(link.send_nodes.size() * components);
      for (int node : link.send_nodes)
        for (int e = 0; e < components; ++e) msg.payload.push_back(fields[r].value(node, e));
      mailbox[link.neighbor].push_back(std::move(msg));
    }

  // Receive phase: match each message to the receiver's link back to the
  // sender and land the payload in the ghost slots.
  for (int r = 0; r < part.num_ranks; ++r) {
    fields[r].clear_ghosts();
    for (const Message& msg : mailbox[r]) {
      const HaloLink* link = nullptr;
      for (const HaloLink& cand : part.links[r])
        if (cand.neighbor == msg.from) link = &cand;
      if (link == nullptr)
        throw std::invalid_argument("halo_exchange: message from rank " +
                                    std::to_string(msg.from) + " has no matching link on rank " +
                                    std::to_string(r));
      if (msg.payload.size() != link->recv_nodes.size() * static_cast<std::size_t>(components))
        throw std::invalid_argument("halo_exchange: payload size does not match ghost plane");
      std::size_t at = 0;
      for (int node : link->recv_nodes) {
        for (int e = 0; e < components; ++e) fields[r].value(node, e) = msg.payload[at++];
        fields[r].mark_ghost_filled(node);
      }
    }
  }

  for (int r = 0; r < part.num_ranks; ++r)
    if (fields[r].unfilled_ghosts() > 0)
      throw std::runtime_error("halo_exchange: rank " + std::to_string(r) + " has " +
                               std::to_string(fields[r].unfilled_ghosts()) +
                               " unfilled ghost nodes after the exchange");

  // Virtual clock: each rank pays latency plus transfer time per message it
  // sends; the exchange as a whole finishes with the slowest rank.
  ExchangeResult result;
  for (int r = 0; r < part.num_ranks; ++r) {
    double clock = 0.0;
    for (const HaloLink& link : part.links[r]) {
      const std::int64_t bytes = static_cast<std::int64_t>(link.send_nodes.size()) * components *
                                 transport.bytes_per_component;
      clock += transport.latency_seconds +
               static_cast<double>(bytes) / transport.bandwidth_bytes_per_second;
      result.trace.push_back({r, link.neighbor, bytes, clock});
      ++result.num_messages;
    }
    result.elapsed_seconds = std::max(result.elapsed_seconds, clock);
  }

  if (sleep_for_real)
    std::this_thread::sleep_for(std::chrono::duration<double>(result.elapsed_seconds));
  return result;
}

HaloFit fit_halo_model(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("fit_halo_model: need at least two points");
  double mean_s = 0.0, mean_t = 0.0;
  for (const auto& [s, t] : samples) {
    mean_s += s;
    mean_t += t;
  }
  mean_s /= static_cast<double>(samples.size());
  mean_t /= static_cast<double>(samples.size());

  double ss = 0.0, st = 0.0;
  for (const auto& [s, t] : samples) {
    ss += (s - mean_s) * (s - mean_s);
    st += (s - mean_s) * (t - mean_t);
  }
  if (ss == 0.0)
    throw std::invalid_argument("fit_halo_model: all ensemble sizes equal, fit is singular");

  HaloFit fit;
  fit.model.b = st / ss;
  fit.model.a = mean_t - fit.model.b * mean_s;
  for (const auto& [s, t] : samples) {
    const double r = t - fit.model.a - fit.model.b * s;
    fit.residual_sum_of_squares += r * r;
  }
  return fit;
}

double predicted_speedup(const HaloModel& model, double s) {
  if (s < 1.0) throw std::invalid_argument("predicted_speedup: s must be at least 1");
  const double denom = model.a + model.b * s;
  if (denom == 0.0) throw std::domain_error("predicted_speedup: zero exchange time");
  return s * (model.a + model.b) / denom;
}

void write_exchange_trace_csv(const std::string& path, const std::vector<ExchangeRecord>& trace) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr)
    throw std::runtime_error("write_exchange_trace_csv: cannot open " + path);
  std::fputs("rank,neighbor,bytes,virtual_time\n", f);
  for (const ExchangeRecord& rec : trace)
    std::fprintf(f, "%d,%d,%lld,%.17g\n", rec.rank, rec.neighbor,
                 static_cast<long long>(rec.bytes), rec.virtual_time);
  if (std::fclose(f) != 0)
    throw std::runtime_error("write_exchange_trace_csv: failed writing " + path);
}

}  // namespace enprop
