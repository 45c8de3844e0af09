#include "image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <jpeglib.h>

#include "errors.hpp"
#include "fsutil.hpp"

namespace fs = std::filesystem;

namespace ecsflow {

GrayscaleImage to_grayscale(const RgbImage& rgb) {
  if (rgb.width <= 0 || rgb.height <= 0 ||
      rgb.rgb.size() != static_cast<size_t>(rgb.width) * rgb.height * 3)
    throw DataError("to_grayscale: channel dimensions do not match buffer");
  GrayscaleImage out;
  out.width = rgb.width;
  out.height = rgb.height;
  out.intensity.resize(static_cast<size_t>(out.width) * out.height);
  for (size_t i = 0; i < out.intensity.size(); ++i) {
    const double* p = &rgb.rgb[3 * i];
    out.intensity[i] = (p[0] + p[1] + p[2]) / 3.0;
  }
  return out;
}

static BinaryImage binarize(const GrayscaleImage& img, double tau, bool invert) {
  BinaryImage out;
  out.width = img.width;
  out.height = img.height;
  out.mask.resize(img.intensity.size());
  for (size_t i = 0; i < img.intensity.size(); ++i) {
    const bool black = img.intensity[i] < tau;
    out.mask[i] = (black != invert) ? 1 : 0;
  }
  return out;
}

BinaryImage threshold_fixed(const GrayscaleImage& img, double tau, bool invert) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("threshold_fixed: tau must lie in (0,1)");
  return binarize(img, tau, invert);
}

OtsuResult threshold_otsu(const GrayscaleImage& img, bool invert) {
  constexpr int kBins = 256;
  size_t hist[kBins] = {0};
  for (const double v : img.intensity) {
    int b = static_cast<int>(v * kBins);
    b = std::clamp(b, 0, kBins - 1);
    hist[b]++;
  }
  int nonzero = 0;
  for (int b = 0; b < kBins; ++b) nonzero += hist[b] > 0;
  if (nonzero < 2) throw DataError("threshold_otsu: image has fewer than 2 distinct intensity levels");

  const double total = static_cast<double>(img.intensity.size());
  double sum_all = 0.0;
  for (int b = 0; b < kBins; ++b) sum_all += static_cast<double>(b) * hist[b];

  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_t = 0;
  for (int t = 0; t < kBins - 1; ++t) {
    w0 += static_cast<double>(hist[t]);
    if (w0 == 0.0) continue;
    const double w1 = total - w0;
    if (w1 == 0.0) break;
    sum0 += static_cast<double>(t) * hist[t];
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {  // ties keep the lowest threshold
      best = between;
      best_t = t;
    }
  }
  OtsuResult res;
  res.tau = static_cast<double>(best_t + 1) / kBins;
  res.binary = binarize(img, res.tau, invert);
  return res;
}

GrayscaleImage adaptive_crop(const GrayscaleImage& img, int min_width, const CropBox& box) {
  if (box.x0 < 0.0 || box.y0 < 0.0 || box.x1 > 1.0 || box.y1 > 1.0)
    throw ConfigError("adaptive_crop: crop box must lie within [0,1]^2");
  if (!(box.x1 > box.x0 && box.y1 > box.y0))
    throw ConfigError("adaptive_crop: crop box has zero area");
  if (img.width <= min_width) return img;

  int cx0 = static_cast<int>(std::floor(box.x0 * img.width));
  int cx1 = static_cast<int>(std::ceil(box.x1 * img.width));
  int cy0 = static_cast<int>(std::floor(box.y0 * img.height));
  int cy1 = static_cast<int>(std::ceil(box.y1 * img.height));
  cx0 = std::clamp(cx0, 0, img.width - 1);
  cy0 = std::clamp(cy0, 0, img.height - 1);
  cx1 = std::clamp(cx1, cx0 + 1, img.width);
  cy1 = std::clamp(cy1, cy0 + 1, img.height);

  GrayscaleImage out;
  out.width = cx1 - cx0;
  out.height = cy1 - cy0;
  out.intensity.resize(static_cast<size_t>(out.width) * out.height);
  for (int r = 0; r < out.height; ++r)
    for (int c = 0; c < out.width; ++c) out.at(r, c) = img.at(cy0 + r, cx0 + c);
  return out;
}

GrayscaleImage downsample(const GrayscaleImage& img, int target_width) {
  if (target_width < 1) throw ConfigError("downsample: target width must be >= 1");
  if (target_width > img.width) throw ConfigError("downsample: target wider than input");
  const int target_height =
      std::max<int>(1, static_cast<int>(std::lround(static_cast<double>(img.height) * target_width / img.width)));
  if (target_width == img.width && target_height == img.height) return img;

  GrayscaleImage out;
  out.width = target_width;
  out.height = target_height;
  out.intensity.resize(static_cast<size_t>(target_width) * target_height);

  const double sx = static_cast<double>(img.width) / target_width;
  const double sy = static_cast<double>(img.height) / target_height;
  for (int r = 0; r < target_height; ++r) {
    const double y0 = r * sy, y1 = (r + 1) * sy;
    for (int c = 0; c < target_width; ++c) {
      const double x0 = c * sx, x1 = (c + 1) * sx;
      // area-weighted mean of the covered source pixels
      double acc = 0.0, area = 0.0;
      for (int yy = static_cast<int>(std::floor(y0)); yy < static_cast<int>(std::ceil(y1)); ++yy) {
        const double hy = std::min<double>(y1, yy + 1) - std::max<double>(y0, yy);
        if (hy <= 0.0) continue;
        for (int xx = static_cast<int>(std::floor(x0)); xx < static_cast<int>(std::ceil(x1)); ++xx) {
          const double wx = std::min<double>(x1, xx + 1) - std::max<double>(x0, xx);
          if (wx <= 0.0) continue;
          acc += img.at(std::min(yy, img.height - 1), std::min(xx, img.width - 1)) * wx * hy;
          area += wx * hy;
        }
      }
      out.at(r, c) = area > 0.0 ? acc / area : 0.0;
    }
  }
  return out;
}

std::vector<fs::path> sample_frames(const std::vector<fs::path>& frame_paths, double stride_seconds,
                                    double fps) {
  if (frame_paths.empty()) throw DataError("sample_frames: empty frame list");
  if (fps <= 0.0) throw ConfigError("sample_frames: fps must be positive");
  if (stride_seconds <= 0.0) throw ConfigError("sample_frames: stride must be positive");
  std::vector<fs::path> out;
  long last = -1;
  for (long j = 0;; ++j) {
    const long idx = std::lround(static_cast<double>(j) * stride_seconds * fps);
    if (idx >= static_cast<long>(frame_paths.size())) break;
    if (idx != last) out.push_back(frame_paths[static_cast<size_t>(idx)]);
    last = idx;
  }
  return out;
}

// ---------------------------------------------------------------------------
// decoding

namespace {

LoadedImage from_gray8(int w, int h, const std::vector<uint8_t>& buf) {
  LoadedImage out;
  out.is_color = false;
  out.gray.width = w;
  out.gray.height = h;
  out.gray.intensity.resize(static_cast<size_t>(w) * h);
  for (size_t i = 0; i < out.gray.intensity.size(); ++i) out.gray.intensity[i] = buf[i] / 255.0;
  return out;
}

LoadedImage from_rgb8(int w, int h, const std::vector<uint8_t>& buf) {
  LoadedImage out;
  out.is_color = true;
  out.color.width = w;
  out.color.height = h;
  out.color.rgb.resize(static_cast<size_t>(w) * h * 3);
  for (size_t i = 0; i < out.color.rgb.size(); ++i) out.color.rgb[i] = buf[i] / 255.0;
  return out;
}

LoadedImage load_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw DataError("png decode failed: " + path.string() + " (" + image.message + ")");
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw DataError("png decode failed: " + path.string() + " (" + msg + ")");
  }
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  return color ? from_rgb8(w, h, buffer) : from_gray8(w, h, buffer);
}

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

LoadedImage load_jpeg(const fs::path& path) {
  FILE* f = std::fopen(path.string().c_str(), "rb");
  if (!f) throw DataError("cannot open file: " + path.string());

  jpeg_decompress_struct cinfo;
  JpegErrorMgr jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    std::fclose(f);
    throw DataError("jpeg decode failed: " + path.string() + " (" + jerr.message + ")");
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  const bool color = cinfo.num_components > 1;
  cinfo.out_color_space = color ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_start_decompress(&cinfo);

  const int w = static_cast<int>(cinfo.output_width);
  const int h = static_cast<int>(cinfo.output_height);
  const int ch = cinfo.output_components;
  std::vector<uint8_t> buffer(static_cast<size_t>(w) * h * ch);
  while (cinfo.output_scanline < cinfo.output_height) {
    uint8_t* row = buffer.data() + static_cast<size_t>(cinfo.output_scanline) * w * ch;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  std::fclose(f);
  return ch == 3 ? from_rgb8(w, h, buffer) : from_gray8(w, h, buffer);
}

int pnm_next_int(const std::vector<uint8_t>& data, size_t& pos, const fs::path& path) {
  while (pos < data.size()) {
    if (data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (std::isspace(data[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= data.size() || !std::isdigit(data[pos]))
    throw DataError("malformed pnm header: " + path.string());
  int v = 0;
  while (pos < data.size() && std::isdigit(data[pos])) v = v * 10 + (data[pos++] - '0');
  return v;
}

LoadedImage load_pnm(const fs::path& path) {
  const auto data = read_binary_file(path);
  if (data.size() < 2 || data[0] != 'P') throw DataError("malformed pnm file: " + path.string());
  const char kind = static_cast<char>(data[1]);
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6')
    throw DataError("unsupported pnm variant: " + path.string());
  const bool color = (kind == '3' || kind == '6');
  const bool ascii = (kind == '2' || kind == '3');
  size_t pos = 2;
  const int w = pnm_next_int(data, pos, path);
  const int h = pnm_next_int(data, pos, path);
  const int maxval = pnm_next_int(data, pos, path);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw DataError("malformed pnm header: " + path.string());
  const size_t nsamples = static_cast<size_t>(w) * h * (color ? 3 : 1);
  std::vector<double> samples(nsamples);
  if (ascii) {
    for (size_t i = 0; i < nsamples; ++i)
      samples[i] = static_cast<double>(pnm_next_int(data, pos, path)) / maxval;
  } else {
    ++pos;  // single whitespace byte after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    if (pos + nsamples * bytes > data.size()) throw DataError("truncated pnm data: " + path.string());
    for (size_t i = 0; i < nsamples; ++i) {
      int v = data[pos + i * bytes];
      if (bytes == 2) v = (v << 8) | data[pos + i * bytes + 1];
      samples[i] = static_cast<double>(v) / maxval;
    }
  }
  LoadedImage out;
  out.is_color = color;
  if (color) {
    out.color.width = w;
    out.color.height = h;
    out.color.rgb = std::move(samples);
  } else {
    out.gray.width = w;
    out.gray.height = h;
    out.gray.intensity = std::move(samples);
  }
  return out;
}

}  // namespace

LoadedImage load_image(const fs::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open image: " + path.string());
  uint8_t magic[8] = {0};
  probe.read(reinterpret_cast<char*>(magic), sizeof(magic));
  probe.close();
  static const uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (std::memcmp(magic, png_sig, 8) == 0) return load_png(path);
  if (magic[0] == 0xff && magic[1] == 0xd8) return load_jpeg(path);
  if (magic[0] == 'P') return load_pnm(path);
  throw DataError("unrecognized image format: " + path.string());
}

GrayscaleImage load_grayscale(const fs::path& path) {
  LoadedImage img = load_image(path);
  return img.is_color ? to_grayscale(img.color) : std::move(img.gray);
}

void write_pgm(const fs::path& path, const GrayscaleImage& img) {
  std::ostringstream out;
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (const double v : img.intensity)
    out.put(static_cast<char>(std::clamp<int>(static_cast<int>(std::lround(v * 255.0)), 0, 255)));
  atomic_write_text(path, out.str());
}

void write_pgm(const fs::path& path, const BinaryImage& img) {
  std::ostringstream out;
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (const uint8_t m : img.mask) out.put(m ? '\0' : static_cast<char>(255));
  atomic_write_text(path, out.str());
}

}  // namespace ecsflow
