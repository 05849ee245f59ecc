#include "gnrf/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace gnrf {

bool bilinear_sample(const Image& img, double u, double v, float* out) {
  const int W = img.width, H = img.height, C = img.channels;
  if (!(u >= 0.0 && v >= 0.0 && u <= W - 1.0 && v <= H - 1.0)) {
    std::fill(out, out + C, 0.0f);
    return false;
  }
  int x0 = static_cast<int>(std::floor(u));
  int y0 = static_cast<int>(std::floor(v));
  if (x0 > W - 2) x0 = W - 2;  // u == W-1 lands on the last cell with fu == 1
  if (y0 > H - 2) y0 = H - 2;
  if (x0 < 0) x0 = 0;  // single-column / single-row images
  if (y0 < 0) y0 = 0;
  int x1 = std::min(x0 + 1, W - 1);
  int y1 = std::min(y0 + 1, H - 1);
  double fu = u - x0, fv = v - y0;
  double w00 = (1 - fu) * (1 - fv), w10 = fu * (1 - fv), w01 = (1 - fu) * fv, w11 = fu * fv;
  for (int c = 0; c < C; ++c) {
    out[c] = static_cast<float>(w00 * img.at(y0, x0, c) + w10 * img.at(y0, x1, c) +
                                w01 * img.at(y1, x0, c) + w11 * img.at(y1, x1, c));
  }
  return true;
}

std::vector<float> bilinear_sample(const Image& img, double u, double v, bool* valid) {
  std::vector<float> out(img.channels, 0.0f);
  bool ok = bilinear_sample(img, u, v, out.data());
  if (valid) *valid = ok;
  return out;
}

void write_ppm(const std::string& path, const Image& img) {
  if (img.channels != 3) throw std::invalid_argument("write_ppm: expects 3-channel image");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_ppm: cannot open " + path);
  f << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> row(static_cast<size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        float v = std::clamp(img.at(y, x, c), 0.0f, 1.0f);
        row[static_cast<size_t>(x) * 3 + c] = static_cast<unsigned char>(std::lround(v * 255.0f));
      }
    }
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!f) throw std::runtime_error("write_ppm: write failed for " + path);
}

Image read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_ppm: cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "P6") throw std::runtime_error("read_ppm: not a P6 file: " + path);
  auto skip_ws_comments = [&f]() {
    while (true) {
      int c = f.peek();
      if (c == '#') {
        std::string line;
        std::getline(f, line);
      } else if (std::isspace(c)) {
        f.get();
      } else {
        break;
      }
    }
  };
  int w = 0, h = 0, maxval = 0;
  skip_ws_comments();
  f >> w;
  skip_ws_comments();
  f >> h;
  skip_ws_comments();
  f >> maxval;
  if (maxval != 255) throw std::runtime_error("read_ppm: unsupported maxval");
  f.get();  // single whitespace after header
  Image img(h, w, 3);
  std::vector<unsigned char> buf(static_cast<size_t>(w) * h * 3);
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("read_ppm: truncated file " + path);
  for (size_t i = 0; i < buf.size(); ++i) img.data[i] = static_cast<float>(buf[i]) / 255.0f;
  return img;
}

}  // namespace gnrf
