#include "mem/agents/representation.hpp"

#include "mem/errors.hpp"
#include "mem/exploration/intrinsic.hpp"

namespace mem::agents {

using ad::Tensor;

Representation::Representation(const RunConfig& config, const envs::GridSpec& env, Rng& init_rng,
                               std::uint64_t run_seed)
    : mode_(config.exploration.mode),
      state_mode_(config.agent.state_mode),
      k_(config.exploration.k),
      views_(env.views.size()),
      grid_cells_(static_cast<std::size_t>(env.height * env.width)) {
  const std::size_t p = config.encoder.feature_dim;
  const encoder::EncoderConfig ec{env.input_dim(), config.encoder.hidden, p};
  if (state_mode_ == StateMode::onehot) {
    if (env.views.front() != envs::ViewKind::allocentric) throw ConfigInvalid("onehot state needs an allocentric view 0");
    if (mode_ != IntrinsicMode::none) throw ConfigInvalid("onehot state supports only intrinsic mode none");
    state_dim_ = grid_cells_;
    return;
  }
  state_dim_ = (views_ + 1) * p;
  encoder_ = std::make_unique<encoder::EncoderNet>(ec, init_rng);
  disc_ = std::make_unique<encoder::DiscriminatorNet>(p, config.encoder.hidden, views_, init_rng);
  const double lr = config.encoder_learning_rate();
  trainer_ = std::make_unique<encoder::EncoderTrainer>(*encoder_, *disc_,
                                                       encoder::TrainerConfig{config.encoder.weights, lr, lr});
  if (mode_ == IntrinsicMode::re3_raw || mode_ == IntrinsicMode::re3_log1p) {
    // Own stream, so the choice of mode does not shift any other initialization.
    Rng frozen = Rng::stream(run_seed, "random_encoder");
    random_encoder_ = std::make_unique<encoder::EncoderNet>(ec, frozen);
  }
}

Representation::Encoded Representation::encode(const Tensor& rows) const {
  if (rows.rows() % views_ != 0) throw ShapeMismatch("row count is not a multiple of the view count");
  Encoded e;
  e.samples = rows.rows() / views_;
  e.views = views_;
  if (encoder_) std::tie(e.shared, e.specific) = encoder_->encode_rows(rows);
  return e;
}

Tensor Representation::states(const Tensor& rows, const Encoded& e) const {
  Tensor out = Tensor::matrix(e.samples, state_dim_);
  for (std::size_t s = 0; s < e.samples; ++s) {
    auto dst = out.row(s);
    if (state_mode_ == StateMode::onehot) {
      auto src = rows.row(s * views_);
      std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(grid_cells_), dst.begin());
      continue;
    }
    const std::size_t p = e.specific.cols();
    for (std::size_t v = 0; v < views_; ++v) {
      auto y = e.specific.row(s * views_ + v);
      std::copy(y.begin(), y.end(), dst.begin() + static_cast<std::ptrdiff_t>(v * p));
    }
    for (std::size_t c = 0; c < p; ++c) {
      double m = 0.0;
      for (std::size_t v = 0; v < views_; ++v) m += e.shared.at(s * views_ + v, c);
      dst[views_ * p + c] = m / static_cast<double>(views_);
    }
  }
  return out;
}

std::vector<double> Representation::state(const envs::MultiViewObs& obs) const {
  const Tensor rows = encoder::stack_views({&obs}, nullptr);
  return states(rows, encode(rows)).storage();
}

std::vector<double> Representation::intrinsic(const Tensor& rows, const Encoded& e) const {
  std::vector<double> zeros(e.samples, 0.0);
  if (mode_ == IntrinsicMode::none || e.samples <= k_) return zeros;
  if (mode_ == IntrinsicMode::mem) {
    const std::size_t p = e.specific.cols();
    std::vector<exploration::PointSet> specific;
    for (std::size_t v = 0; v < views_; ++v) {
      std::vector<double> coords;
      coords.reserve(e.samples * p);
      for (std::size_t s = 0; s < e.samples; ++s) {
        auto y = e.specific.row(s * views_ + v);
        coords.insert(coords.end(), y.begin(), y.end());
      }
      specific.emplace_back(e.samples, p, std::move(coords));
    }
    const Tensor st = states(rows, e);
    std::vector<double> mean;
    mean.reserve(e.samples * p);
    for (std::size_t s = 0; s < e.samples; ++s) {
      auto r = st.row(s);
      mean.insert(mean.end(), r.begin() + static_cast<std::ptrdiff_t>(views_ * p), r.end());
    }
    return exploration::multiview_intrinsic_rewards(specific, exploration::PointSet(e.samples, p, std::move(mean)), k_);
  }
  Tensor first = Tensor::matrix(e.samples, rows.cols());
  for (std::size_t s = 0; s < e.samples; ++s) {
    auto src = rows.row(s * views_);
    std::copy(src.begin(), src.end(), first.row(s).begin());
  }
  const auto [x, y] = random_encoder_->encode_rows(first);
  std::vector<double> coords;
  for (std::size_t s = 0; s < e.samples; ++s) {
    coords.insert(coords.end(), x.row(s).begin(), x.row(s).end());
    coords.insert(coords.end(), y.row(s).begin(), y.row(s).end());
  }
  const exploration::PointSet pts(e.samples, 2 * x.cols(), std::move(coords));
  if (mode_ == IntrinsicMode::re3_raw) {
    return exploration::re3_rewards(pts, k_, exploration::Re3Form::raw_distance, exploration::Re3Aggregate::kth);
  }
  return exploration::re3_rewards(pts, k_, exploration::Re3Form::log1p_distance, exploration::Re3Aggregate::mean_of_k);
}

std::optional<encoder::StepLosses> Representation::train(const Tensor& rows) {
  if (!trainer_) return std::nullopt;
  std::vector<std::size_t> labels(rows.rows());
  for (std::size_t r = 0; r < labels.size(); ++r) labels[r] = r % views_;
  return trainer_->step(rows, labels);
}

void Representation::export_to(ad::Checkpoint& ckpt) const {
  if (encoder_) encoder_->params().export_to(ckpt, "encoder.");
  if (disc_) disc_->params().export_to(ckpt, "discriminator.");
}

void Representation::import_from(const ad::Checkpoint& ckpt) {
  if (encoder_) encoder_->params().import_from(ckpt, "encoder.");
  if (disc_) disc_->params().import_from(ckpt, "discriminator.");
}

}  // namespace mem::agents
