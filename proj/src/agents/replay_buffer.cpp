#include "mem/agents/replay_buffer.hpp"

#include <algorithm>
#include <unordered_set>

#include "mem/errors.hpp"

namespace mem::agents {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigInvalid("replay capacity must be positive");
}

ReplayBuffer::SparseObs ReplayBuffer::compress(const envs::MultiViewObs& o) {
  SparseObs s;
  s.views = static_cast<std::uint32_t>(o.view_count());
  s.dim = static_cast<std::uint32_t>(o.input_dim());
  s.offsets.push_back(0);
  for (const auto& v : o.views) {
    if (v.size() != s.dim) throw ShapeMismatch("views disagree on input_dim");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == 0.0) continue;
      if (v[i] != 1.0) s.values.emplace_back(static_cast<std::uint32_t>(s.index.size()), v[i]);
      s.index.push_back(static_cast<std::uint32_t>(i));
    }
    s.offsets.push_back(static_cast<std::uint32_t>(s.index.size()));
  }
  s.index.shrink_to_fit();
  return s;
}

void ReplayBuffer::write_rows(const SparseObs& s, ad::Tensor& out, std::size_t first_row) {
  auto vals = s.values.begin();
  for (std::uint32_t v = 0; v < s.views; ++v) {
    auto row = out.row(first_row + v);
    std::fill(row.begin(), row.end(), 0.0);
    for (std::uint32_t j = s.offsets[v]; j < s.offsets[v + 1]; ++j) {
      double x = 1.0;
      if (vals != s.values.end() && vals->first == j) x = (vals++)->second;
      row[s.index[j]] = x;
    }
  }
}

envs::MultiViewObs ReplayBuffer::expand(const SparseObs& s) {
  ad::Tensor t = ad::Tensor::matrix(s.views, s.dim);
  write_rows(s, t, 0);
  envs::MultiViewObs o;
  for (std::uint32_t v = 0; v < s.views; ++v) o.views.emplace_back(t.row(v).begin(), t.row(v).end());
  return o;
}

void ReplayBuffer::push(const Transition& t) {
  if (t.obs.view_count() != t.next_obs.view_count() || t.obs.input_dim() != t.next_obs.input_dim()) {
    throw ShapeMismatch("obs and next_obs differ in shape");
  }
  Slot s{compress(t.obs), compress(t.next_obs), t.action, t.extrinsic_reward, t.done};
  if (slots_.size() < capacity_) {
    slots_.push_back(std::move(s));
  } else {
    slots_[head_] = std::move(s);
    head_ = (head_ + 1) % capacity_;
  }
  ++pushed_;
}

const ReplayBuffer::Slot& ReplayBuffer::slot(std::size_t position) const {
  if (position >= slots_.size()) throw IndexOutOfRange("replay position out of range");
  return slots_[(head_ + position) % slots_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t B, Rng& rng) const {
  const std::size_t n = slots_.size();
  if (B > n) throw NotEnoughData("requested " + std::to_string(B) + " samples from a buffer of " + std::to_string(n));
  std::vector<std::size_t> out;
  out.reserve(B);
  if (2 * B >= n) {
    // Partial Fisher-Yates.
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    for (std::size_t i = 0; i < B; ++i) {
      std::swap(all[i], all[i + rng.uniform_int(n - i)]);
      out.push_back(all[i]);
    }
    return out;
  }
  // Floyd's subset sampling, then a shuffle so the order is random too.
  std::unordered_set<std::size_t> chosen;
  for (std::size_t j = n - B; j < n; ++j) {
    const std::size_t t = rng.uniform_int(j + 1);
    const std::size_t pick = chosen.count(t) ? j : t;
    chosen.insert(pick);
    out.push_back(pick);
  }
  for (std::size_t i = B; i > 1; --i) std::swap(out[i - 1], out[rng.uniform_int(i)]);
  return out;
}

Transition ReplayBuffer::at(std::size_t position) const {
  const Slot& s = slot(position);
  return {expand(s.obs), s.action, s.reward, expand(s.next), s.done};
}

std::vector<Transition> ReplayBuffer::sample(std::size_t B, Rng& rng) const {
  std::vector<Transition> out;
  for (std::size_t i : sample_indices(B, rng)) out.push_back(at(i));
  return out;
}

void ReplayBuffer::stack_into(const std::vector<std::size_t>& positions, bool next, ad::Tensor& out,
                              std::size_t first_row) const {
  for (std::size_t p : positions) {
    const SparseObs& s = next ? slot(p).next : slot(p).obs;
    if (s.dim != out.cols()) throw ShapeMismatch("stack target has the wrong width");
    write_rows(s, out, first_row);
    first_row += s.views;
  }
}

}  // namespace mem::agents
