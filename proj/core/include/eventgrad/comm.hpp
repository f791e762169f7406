#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "eventgrad/model.hpp"

namespace eventgrad {

struct SparseEntry {
  Eigen::Index index;
  double value;
};

/// One one-sided write from src to dst covering one parameter block.
/// Sparse payloads carry strictly increasing in-bounds indices; their
/// scalar volume counts indices and values alike, so keeping k% of a block
/// costs 2k% of the dense transfer.
struct Message {
  int src = 0;
  int dst = 0;
  int block_id = 0;
  int sent_iter = 0;
  bool dense = true;
  Eigen::VectorXd dense_payload;
  std::vector<SparseEntry> sparse_payload;

  std::uint64_t scalar_volume() const {
    return dense ? static_cast<std::uint64_t>(dense_payload.size())
                 : 2 * static_cast<std::uint64_t>(sparse_payload.size());
  }
};

/// Exact communication accounting; monotone nondecreasing over a run.
struct CommStats {
  std::uint64_t messages = 0;
  std::uint64_t volume = 0;  // scalars transferred, indices counted as one each
  std::vector<std::uint64_t> per_pe_messages;          // by src
  std::vector<std::uint64_t> per_block_dense_messages;
  std::vector<std::uint64_t> per_block_sparse_messages;
  std::vector<std::uint64_t> per_block_volume;

  CommStats() = default;
  CommStats(int n_pes, int n_blocks)
      : per_pe_messages(n_pes, 0),
        per_block_dense_messages(n_blocks, 0),
        per_block_sparse_messages(n_blocks, 0),
        per_block_volume(n_blocks, 0) {}

  void record(const Message& msg);

  /// Accounting-only entry for messages whose payload is not materialized
  /// (the regular algorithm exchanges exact values every iteration).
  void record_sent(int src, int block_id, bool dense, std::uint64_t scalar_volume);
};

/// Receiver-side mailbox: the last-received copy of every neighbor block.
/// Slots are seeded with the neighbors' initial models so none is ever
/// unset; mutated only through one_sided_put.
class Window {
 public:
  Window(int owner, const std::vector<int>& neighbors,
         const std::vector<ModelState>& initial_states);

  int owner() const { return owner_; }
  bool has_neighbor(int j) const;
  const Eigen::VectorXd& slot(int neighbor, int block_id) const;
  int written_iter(int neighbor, int block_id) const;

 private:
  friend void one_sided_put(const Message& msg, std::vector<Window>& windows,
                            CommStats& stats);

  struct Slot {
    Eigen::VectorXd value;
    int written_iter = 0;
  };

  int slot_index(int neighbor, int block_id) const;

  int owner_;
  std::vector<int> neighbors_;  // sorted
  int n_blocks_;
  std::vector<Slot> slots_;  // neighbors x blocks
};

/// Applies msg to the destination window and updates accounting. A dense
/// payload overwrites the whole slot; a sparse payload overwrites only the
/// listed indices. The receiver takes no action.
void one_sided_put(const Message& msg, std::vector<Window>& windows, CommStats& stats);

/// Keeps the ceil(len * k_percent / 100) entries of largest absolute value,
/// ties broken toward the lower index; output sorted by index ascending.
std::vector<SparseEntry> topk_sparsify(const Eigen::VectorXd& value, double k_percent);

/// One put per neighbor of src (2 on a ring), dense or Top-K sparsified.
void broadcast_to_neighbors(int src, int block_id, const Eigen::VectorXd& value,
                            std::optional<double> topk_percent, int sent_iter,
                            std::vector<Window>& windows, CommStats& stats);

/// 100 * event-run count / regular-run count.
double message_percentage(const CommStats& event_stats, const CommStats& regular_stats);
double volume_percentage(const CommStats& event_stats, const CommStats& regular_stats);

}  // namespace eventgrad
