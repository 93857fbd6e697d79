#include "blindcapon/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace blindcapon {

namespace {

// WAV is little endian; assemble bytes explicitly so the host order never matters.
std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }

void put32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}
void put16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back(v >> 8);
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::Format, path + " is not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const unsigned char* chunk = buf.data() + pos;
    const std::size_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > buf.size() && std::memcmp(chunk, "data", 4) != 0)
      throw Error(ErrorCode::Format, "truncated chunk in " + path);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw Error(ErrorCode::Format, "short fmt chunk in " + path);
      const unsigned char* f = buf.data() + body;
      format = le16(f);
      channels = le16(f + 2);
      rate = le32(f + 4);
      bits = le16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorCode::Format, "short extensible fmt chunk in " + path);
        format = le16(f + 24);  // first two bytes of the subformat GUID
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = buf.data() + body;
      data_size = std::min(size, buf.size() - body);  // tolerate streaming writers
    }
    pos = body + size + (size & 1);
  }
  if (channels == 0 || rate == 0) throw Error(ErrorCode::Format, "missing fmt chunk in " + path);
  if (!data) throw Error(ErrorCode::Format, "missing data chunk in " + path);

  const bool ok = (format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32)) ||
                  (format == kFormatFloat && bits == 32);
  if (!ok)
    throw Error(ErrorCode::Format, "unsupported sample format (format " +
                                       std::to_string(format) + ", " +
                                       std::to_string(bits) + " bits) in " + path);

  const std::size_t bytes = bits / 8;
  const std::size_t frames = data_size / (bytes * channels);
  WavData out;
  out.sample_rate = rate;
  out.samples.resize(channels, static_cast<Eigen::Index>(frames));
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const unsigned char* p = data + (n * channels + ch) * bytes;
      double v = 0.0;
      if (format == kFormatFloat) {
        const std::uint32_t u = le32(p);
        float fv;
        std::memcpy(&fv, &u, 4);
        v = fv;
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(le16(p)) / 32768.0;
      } else if (bits == 24) {
        std::int32_t s = std::int32_t(p[0]) | std::int32_t(p[1]) << 8 | std::int32_t(p[2]) << 16;
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      } else {
        v = static_cast<std::int32_t>(le32(p)) / 2147483648.0;
      }
      out.samples(static_cast<Eigen::Index>(ch), static_cast<Eigen::Index>(n)) = v;
    }
  }
  return out;
}

void write_wav(const std::string& path, const rmat& samples, double sample_rate,
               WavEncoding encoding) {
  require(samples.rows() >= 1, "need at least one channel");
  require(sample_rate > 0.0 && sample_rate < 4.3e9, "invalid sample rate");
  const std::uint16_t channels = static_cast<std::uint16_t>(samples.rows());
  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint32_t frames = static_cast<std::uint32_t>(samples.cols());
  const std::uint32_t data_size = frames * channels * (bits / 8);
  const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(sample_rate));

  std::vector<unsigned char> b;
  b.reserve(44 + data_size);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  put32(b, 36 + data_size);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(b, 16);
  put16(b, encoding == WavEncoding::Pcm16 ? kFormatPcm : kFormatFloat);
  put16(b, channels);
  put32(b, rate);
  put32(b, rate * channels * (bits / 8));
  put16(b, static_cast<std::uint16_t>(channels * (bits / 8)));
  put16(b, bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  put32(b, data_size);
  for (std::uint32_t n = 0; n < frames; ++n) {
    for (std::uint16_t ch = 0; ch < channels; ++ch) {
      const double v = samples(ch, n);
      if (encoding == WavEncoding::Pcm16) {
        const double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        put16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
      } else {
        const float fv = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &fv, 4);
        put32(b, u);
      }
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

}  // namespace blindcapon
