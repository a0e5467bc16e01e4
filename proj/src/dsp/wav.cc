#include "twfr/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "twfr/error.h"

namespace twfr {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t read_u64(const std::uint8_t* p) {
  return static_cast<std::uint64_t>(read_u32(p)) |
         (static_cast<std::uint64_t>(read_u32(p + 4)) << 32);
}

[[noreturn]] void unreadable(const std::filesystem::path& path, const std::string& why) {
  throw IoError("unreadable file: " + path.string() + ": " + why);
}

struct Format {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

double decode_sample(const std::uint8_t* p, const Format& fmt) {
  if (fmt.tag == kFormatPcm) {
    return static_cast<std::int16_t>(read_u16(p)) / 32768.0;
  }
  if (fmt.bits == 32) {
    return static_cast<double>(std::bit_cast<float>(read_u32(p)));
  }
  return std::bit_cast<double>(read_u64(p));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) unreadable(path, "cannot open");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    unreadable(path, "missing RIFF/WAVE header");
  }

  Format fmt;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || available < 16) unreadable(path, "truncated fmt chunk");
      const std::uint8_t* f = bytes.data() + body;
      fmt.tag = read_u16(f);
      fmt.channels = read_u16(f + 2);
      fmt.sample_rate = read_u32(f + 4);
      fmt.block_align = read_u16(f + 12);
      fmt.bits = read_u16(f + 14);
      if (fmt.tag == kFormatExtensible) {
        if (size < 40 || available < 40) unreadable(path, "truncated extensible fmt chunk");
        fmt.tag = read_u16(f + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      // Streaming writers leave the size unset; take what is there.
      data_size = std::min(size, available);
    }
    pos = body + size + (size & 1);
  }

  if (!have_fmt) unreadable(path, "no fmt chunk");
  if (data == nullptr) unreadable(path, "no data chunk");
  const bool pcm16 = fmt.tag == kFormatPcm && fmt.bits == 16;
  const bool fp = fmt.tag == kFormatFloat && (fmt.bits == 32 || fmt.bits == 64);
  if (!pcm16 && !fp) {
    throw IoError("unsupported codec: " + path.string() + ": format tag " +
                  std::to_string(fmt.tag) + ", " + std::to_string(fmt.bits) + " bits");
  }
  if (fmt.channels == 0 || fmt.sample_rate == 0) unreadable(path, "invalid fmt fields");
  const std::size_t sample_bytes = fmt.bits / 8;
  const std::size_t frame_bytes = sample_bytes * fmt.channels;
  const std::size_t n_frames = data_size / frame_bytes;
  if (n_frames == 0) throw IoError("zero-length audio: " + path.string());

  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt.sample_rate);
  clip.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const std::uint8_t* frame = data + i * frame_bytes;
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      acc += decode_sample(frame + c * sample_bytes, fmt);
    }
    const double v = acc / fmt.channels;
    if (!std::isfinite(v)) unreadable(path, "non-finite sample");
    clip.samples[i] = v;
  }
  return clip;
}

void write_wav(const std::filesystem::path& path, const std::vector<std::vector<double>>& channels,
               int sample_rate, WavEncoding encoding) {
  if (channels.empty() || sample_rate <= 0) throw ConfigError("write_wav: no channels or bad rate");
  const std::size_t n = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != n) throw ConfigError("write_wav: channels differ in length");
  }
  const std::uint16_t n_ch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t block = static_cast<std::uint16_t>(n_ch * bits / 8);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(n * block);

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, n_ch);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * block);
  put_u16(out, block);
  put_u16(out, bits);
  out += "data";
  put_u32(out, data_bytes);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& ch : channels) {
      if (encoding == WavEncoding::kPcm16) {
        const double v = std::clamp(ch[i], -1.0, 32767.0 / 32768.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(v * 32768.0))));
      } else {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(ch[i])));
      }
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace twfr
