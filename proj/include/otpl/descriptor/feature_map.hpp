#pragma once

#include <span>
#include <vector>

#include "otpl/common/types.hpp"

namespace otpl {

/// Dense D x H x W grid, channel-major then row-major. Image pixel p maps to
/// grid coordinate p * scale.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int depth, int height, int width, double scale);
  /// Throws InvalidInput unless data.size() == depth * height * width.
  FeatureMap(int depth, int height, int width, double scale, std::vector<double> data);

  int depth() const { return depth_; }
  int height() const { return height_; }
  int width() const { return width_; }
  double scale() const { return scale_; }

  double& at(int channel, int y, int x) { return data_[index(channel, y, x)]; }
  double at(int channel, int y, int x) const { return data_[index(channel, y, x)]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// Multiplies every value by gain and adds bias.
  void apply_gain_bias(double gain, double bias);

 private:
  std::size_t index(int channel, int y, int x) const {
    return (static_cast<std::size_t>(channel) * height_ + y) * width_ + x;
  }

  int depth_ = 0;
  int height_ = 0;
  int width_ = 0;
  double scale_ = 1.0;
  std::vector<double> data_;
};

/// Channelwise bilinear interpolation at an image-pixel location.
/// Throws OutOfBounds when the scaled point leaves [0, W-1] x [0, H-1].
VecX sample_bilinear(const FeatureMap& map, const Vec2& image_point);

}  // namespace otpl
