#include "otpl/descriptor/feature_map.hpp"

#include <cmath>
#include <string>

#include "otpl/common/errors.hpp"

namespace otpl {

namespace {

void check_dims(int depth, int height, int width, double scale) {
  if (depth <= 0 || height <= 0 || width <= 0) {
    throw InvalidInput("feature map dimensions must be positive");
  }
  if (!(scale > 0.0)) throw InvalidInput("feature map scale must be positive");
}

}  // namespace

FeatureMap::FeatureMap(int depth, int height, int width, double scale)
    : depth_(depth), height_(height), width_(width), scale_(scale) {
  check_dims(depth, height, width, scale);
  data_.assign(static_cast<std::size_t>(depth) * height * width, 0.0);
}

FeatureMap::FeatureMap(int depth, int height, int width, double scale, std::vector<double> data)
    : depth_(depth), height_(height), width_(width), scale_(scale), data_(std::move(data)) {
  check_dims(depth, height, width, scale);
  const std::size_t expected = static_cast<std::size_t>(depth) * height * width;
  if (data_.size() != expected) {
    throw InvalidInput("feature map data has " + std::to_string(data_.size()) +
                       " values, expected " + std::to_string(expected));
  }
}

void FeatureMap::apply_gain_bias(double gain, double bias) {
  for (double& v : data_) v = gain * v + bias;
}

VecX sample_bilinear(const FeatureMap& map, const Vec2& image_point) {
  const double x = image_point.x() * map.scale();
  const double y = image_point.y() * map.scale();
  if (!(x >= 0.0 && y >= 0.0 && x <= map.width() - 1 && y <= map.height() - 1)) {
    throw OutOfBounds("bilinear sample outside the feature grid");
  }
  const int x0 = std::min(static_cast<int>(std::floor(x)), map.width() - 1);
  const int y0 = std::min(static_cast<int>(std::floor(y)), map.height() - 1);
  const int x1 = std::min(x0 + 1, map.width() - 1);
  const int y1 = std::min(y0 + 1, map.height() - 1);
  const double ax = x - x0;
  const double ay = y - y0;
  const double w00 = (1.0 - ax) * (1.0 - ay);
  const double w01 = ax * (1.0 - ay);
  const double w10 = (1.0 - ax) * ay;
  const double w11 = ax * ay;

  VecX out(map.depth());
  for (int c = 0; c < map.depth(); ++c) {
    out[c] = w00 * map.at(c, y0, x0) + w01 * map.at(c, y0, x1) + w10 * map.at(c, y1, x0) +
             w11 * map.at(c, y1, x1);
  }
  return out;
}

}  // namespace otpl
