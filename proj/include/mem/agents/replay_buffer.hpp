#pragma once

#include <cstdint>
#include <vector>

#include "mem/ad/tensor.hpp"
#include "mem/envs/multi_view_obs.hpp"
#include "mem/rng.hpp"

namespace mem::agents {

struct Transition {
  envs::MultiViewObs obs;
  std::size_t action = 0;
  double extrinsic_reward = 0.0;
  envs::MultiViewObs next_obs;
  bool done = false;
  friend bool operator==(const Transition&, const Transition&) = default;
};

/// FIFO ring of transitions. Observations are stored sparsely (nonzero
/// positions, plus explicit values for entries other than 1), which is
/// lossless and keeps one-hot views small.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const noexcept { return slots_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::uint64_t pushed() const noexcept { return pushed_; }

  /// Uniform sample of B distinct positions (0 = oldest). Throws NotEnoughData.
  std::vector<std::size_t> sample_indices(std::size_t B, Rng& rng) const;
  std::vector<Transition> sample(std::size_t B, Rng& rng) const;
  Transition at(std::size_t position) const;

  std::size_t action(std::size_t position) const { return slot(position).action; }
  double reward(std::size_t position) const { return slot(position).reward; }
  bool done(std::size_t position) const { return slot(position).done; }
  /// Writes the observations (or next observations) of `positions` as rows
  /// ordered sample-major, view-minor, starting at row `first_row` of `out`.
  void stack_into(const std::vector<std::size_t>& positions, bool next, ad::Tensor& out, std::size_t first_row) const;

 private:
  struct SparseObs {
    std::uint32_t views = 0;
    std::uint32_t dim = 0;
    std::vector<std::uint32_t> offsets;  // views + 1 entries into index
    std::vector<std::uint32_t> index;
    std::vector<std::pair<std::uint32_t, double>> values;  // entries != 1, by position in index
  };
  struct Slot {
    SparseObs obs;
    SparseObs next;
    std::size_t action;
    double reward;
    bool done;
  };

  static SparseObs compress(const envs::MultiViewObs& o);
  static envs::MultiViewObs expand(const SparseObs& s);
  static void write_rows(const SparseObs& s, ad::Tensor& out, std::size_t first_row);
  const Slot& slot(std::size_t position) const;

  std::size_t capacity_;
  std::vector<Slot> slots_;
  std::size_t head_ = 0;  // physical index of the oldest slot once full
  std::uint64_t pushed_ = 0;
};

}  // namespace mem::agents
