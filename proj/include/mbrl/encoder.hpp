#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mbrl/distribution.hpp"

namespace mbrl {

class Mdp;

using LatentId = std::string;

/// Per-layer map from states to latent labels. The latent space of a layer is
/// the image of its map, in sorted order.
class Encoder {
 public:
  using LayerMap = std::map<StateId, LatentId, std::less<>>;

  Encoder() = default;
  explicit Encoder(std::vector<LayerMap> layers);

  /// Every enumerated state keeps its own label.
  static Encoder identity(const Mdp& m);
  /// Every state of a layer maps to `label`.
  static Encoder constant(const Mdp& m, const LatentId& label = "x");

  std::size_t num_layers() const { return layers_.size(); }
  const LayerMap& layer(std::size_t h) const { return layers_.at(h); }
  const std::vector<LatentId>& latents(std::size_t h) const { return latents_.at(h); }
  std::size_t num_latents() const;

  std::optional<LatentId> try_encode(std::size_t layer, std::string_view s) const;
  /// Throws InputError for unmapped states.
  const LatentId& encode(std::size_t layer, std::string_view s) const;

  /// States mapped to `x` on layer h, in state order.
  std::vector<StateId> cell(std::size_t h, std::string_view x) const;

  /// Relabels latents as "0","1",... by first appearance in state order. Two
  /// encoders inducing the same partition have equal canonical forms.
  Encoder canonical() const;

  friend bool operator==(const Encoder& a, const Encoder& b) { return a.layers_ == b.layers_; }

 private:
  std::vector<LayerMap> layers_;
  std::vector<std::vector<LatentId>> latents_;
};

}  // namespace mbrl
