#pragma once

#include <string>
#include <vector>

namespace gnrf {

// Row-major H x W x C float image, values nominally in [0, 1].
struct Image {
  int height = 0, width = 0, channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(int h, int w, int c, float fill = 0.0f)
      : height(h), width(w), channels(c), data(static_cast<size_t>(h) * w * c, fill) {}

  float& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  float at(int y, int x, int c) const { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
};

// Bilinear interpolation at continuous pixel coordinates (u, v), where the
// center of pixel (ix, iy) is at (u, v) = (ix, iy). Out-of-bounds samples
// write zeros and return false.
bool bilinear_sample(const Image& img, double u, double v, float* out);

std::vector<float> bilinear_sample(const Image& img, double u, double v, bool* valid = nullptr);

// Binary P6, 8-bit. Values are clamped to [0,1] and quantized on write.
void write_ppm(const std::string& path, const Image& img);
Image read_ppm(const std::string& path);

}  // namespace gnrf
