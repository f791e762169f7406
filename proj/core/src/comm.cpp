#include "eventgrad/comm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace eventgrad {

void CommStats::record(const Message& msg) {
  record_sent(msg.src, msg.block_id, msg.dense, msg.scalar_volume());
}

void CommStats::record_sent(int src, int block_id, bool dense, std::uint64_t scalar_volume) {
  messages += 1;
  volume += scalar_volume;
  if (src >= 0 && src < static_cast<int>(per_pe_messages.size()))
    per_pe_messages[src] += 1;
  if (block_id >= 0 && block_id < static_cast<int>(per_block_volume.size())) {
    per_block_volume[block_id] += scalar_volume;
    if (dense)
      per_block_dense_messages[block_id] += 1;
    else
      per_block_sparse_messages[block_id] += 1;
  }
}

Window::Window(int owner, const std::vector<int>& neighbors,
               const std::vector<ModelState>& initial_states)
    : owner_(owner), neighbors_(neighbors) {
  std::sort(neighbors_.begin(), neighbors_.end());
  for (int j : neighbors_)
    if (j < 0 || j >= static_cast<int>(initial_states.size()))
      throw std::invalid_argument("window: neighbor index out of range");
  n_blocks_ = initial_states.empty()
                  ? 0
                  : static_cast<int>(initial_states[0].blocks.size());
  slots_.reserve(neighbors_.size() * n_blocks_);
  for (int j : neighbors_)
    for (int b = 0; b < n_blocks_; ++b)
      slots_.push_back({initial_states[j].blocks[b].values, 0});
}

bool Window::has_neighbor(int j) const {
  return std::binary_search(neighbors_.begin(), neighbors_.end(), j);
}

int Window::slot_index(int neighbor, int block_id) const {
  auto it = std::lower_bound(neighbors_.begin(), neighbors_.end(), neighbor);
  if (it == neighbors_.end() || *it != neighbor)
    throw std::invalid_argument("window: not a neighbor of the owner");
  if (block_id < 0 || block_id >= n_blocks_)
    throw std::invalid_argument("window: block id out of range");
  return static_cast<int>(it - neighbors_.begin()) * n_blocks_ + block_id;
}

const Eigen::VectorXd& Window::slot(int neighbor, int block_id) const {
  return slots_[slot_index(neighbor, block_id)].value;
}

int Window::written_iter(int neighbor, int block_id) const {
  return slots_[slot_index(neighbor, block_id)].written_iter;
}

void one_sided_put(const Message& msg, std::vector<Window>& windows, CommStats& stats) {
  if (msg.dst < 0 || msg.dst >= static_cast<int>(windows.size()))
    throw std::invalid_argument("one_sided_put: destination out of range");
  Window& win = windows[msg.dst];
  auto& slot = win.slots_[win.slot_index(msg.src, msg.block_id)];

  if (msg.dense) {
    if (msg.dense_payload.size() != slot.value.size())
      throw std::invalid_argument("one_sided_put: payload dimension mismatch");
    slot.value = msg.dense_payload;
  } else {
    Eigen::Index prev = -1;
    for (const auto& e : msg.sparse_payload) {
      if (e.index <= prev || e.index >= slot.value.size())
        throw std::invalid_argument("one_sided_put: bad sparse index");
      prev = e.index;
    }
    for (const auto& e : msg.sparse_payload) slot.value(e.index) = e.value;
  }
  slot.written_iter = msg.sent_iter;
  stats.record(msg);
}

std::vector<SparseEntry> topk_sparsify(const Eigen::VectorXd& value, double k_percent) {
  if (value.size() == 0) throw std::invalid_argument("topk_sparsify: empty block");
  if (k_percent <= 0.0 || k_percent > 100.0)
    throw std::invalid_argument("topk_sparsify: k_percent must be in (0,100]");

  const Eigen::Index len = value.size();
  const auto kept = static_cast<Eigen::Index>(
      std::ceil(static_cast<double>(len) * k_percent / 100.0));

  std::vector<Eigen::Index> idx(len);
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + kept, idx.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      const double ma = std::abs(value(a)), mb = std::abs(value(b));
                      if (ma != mb) return ma > mb;
                      return a < b;  // tie toward lower index
                    });
  idx.resize(kept);
  std::sort(idx.begin(), idx.end());

  std::vector<SparseEntry> out;
  out.reserve(kept);
  for (Eigen::Index i : idx) out.push_back({i, value(i)});
  return out;
}

void broadcast_to_neighbors(int src, int block_id, const Eigen::VectorXd& value,
                            std::optional<double> topk_percent, int sent_iter,
                            std::vector<Window>& windows, CommStats& stats) {
  Message msg;
  msg.src = src;
  msg.block_id = block_id;
  msg.sent_iter = sent_iter;
  if (topk_percent) {
    msg.dense = false;
    msg.sparse_payload = topk_sparsify(value, *topk_percent);
  } else {
    msg.dense_payload = value;
  }
  for (int dst = 0; dst < static_cast<int>(windows.size()); ++dst) {
    if (dst == src || !windows[dst].has_neighbor(src)) continue;
    msg.dst = dst;
    one_sided_put(msg, windows, stats);
  }
}

double message_percentage(const CommStats& event_stats, const CommStats& regular_stats) {
  if (regular_stats.messages == 0)
    throw std::invalid_argument("message_percentage: regular count is zero");
  return 100.0 * static_cast<double>(event_stats.messages) /
         static_cast<double>(regular_stats.messages);
}

double volume_percentage(const CommStats& event_stats, const CommStats& regular_stats) {
  if (regular_stats.volume == 0)
    throw std::invalid_argument("volume_percentage: regular volume is zero");
  return 100.0 * static_cast<double>(event_stats.volume) /
         static_cast<double>(regular_stats.volume);
}

}  // namespace eventgrad
