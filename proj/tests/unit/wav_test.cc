#include "twfr/wav.h"

#include <gtest/gtest.h>

#include <bit>

#include "test_util.h"
#include "twfr/error.h"

namespace twfr {
namespace {

using test::append_le;
using test::wav_bytes;
using test::write_bytes;

std::string pcm16(std::initializer_list<int> values) {
  std::string out;
  for (int v : values) append_le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)), 2);
  return out;
}

std::string expect_io_error(const std::filesystem::path& path) {
  try {
    load_wav(path);
  } catch (const IoError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected IoError for " << path;
  return {};
}

TEST(LoadWav, Pcm16IsScaledByInverse32768) {
  const auto dir = test::scratch_dir("wav_pcm16");
  write_bytes(dir / "a.wav", wav_bytes(1, 1, 16000, 16, pcm16({0, 16384, -16384, 32767})));
  const AudioClip clip = load_wav(dir / "a.wav");
  EXPECT_EQ(clip.sample_rate, 16000);
  ASSERT_EQ(clip.samples.size(), 4u);
  EXPECT_EQ(clip.samples[0], 0.0);
  EXPECT_EQ(clip.samples[1], 0.5);
  EXPECT_EQ(clip.samples[2], -0.5);
  EXPECT_NEAR(clip.samples[3], 0.99997, 1e-5);
  EXPECT_EQ(clip.samples[3], 32767.0 / 32768.0);
}

TEST(LoadWav, StereoIsAveragedToMono) {
  const auto dir = test::scratch_dir("wav_stereo");
  std::string payload;
  for (int frame = 0; frame < 2; ++frame) {
    append_le(payload, std::bit_cast<std::uint32_t>(1.0f), 4);
    append_le(payload, std::bit_cast<std::uint32_t>(0.0f), 4);
  }
  write_bytes(dir / "s.wav", wav_bytes(3, 2, 8000, 32, payload));
  const AudioClip clip = load_wav(dir / "s.wav");
  EXPECT_EQ(clip.sample_rate, 8000);
  EXPECT_EQ(clip.samples, (std::vector<double>{0.5, 0.5}));
}

TEST(LoadWav, TruncatedHeaderIsUnreadable) {
  const auto dir = test::scratch_dir("wav_trunc");
  const std::string full = wav_bytes(1, 1, 16000, 16, pcm16({1, 2, 3}));
  write_bytes(dir / "t.wav", full.substr(0, 20));
  EXPECT_NE(expect_io_error(dir / "t.wav").find("unreadable file"), std::string::npos);
  write_bytes(dir / "r.wav", "RIFX");
  EXPECT_NE(expect_io_error(dir / "r.wav").find("unreadable file"), std::string::npos);
  EXPECT_NE(expect_io_error(dir / "missing.wav").find("unreadable file"), std::string::npos);
}

TEST(LoadWav, UnsupportedCodecAndEmptyData) {
  const auto dir = test::scratch_dir("wav_codec");
  write_bytes(dir / "alaw.wav", wav_bytes(6, 1, 8000, 8, "\x01\x02"));
  EXPECT_NE(expect_io_error(dir / "alaw.wav").find("unsupported codec"), std::string::npos);
  write_bytes(dir / "pcm24.wav", wav_bytes(1, 1, 8000, 24, std::string(6, '\0')));
  EXPECT_NE(expect_io_error(dir / "pcm24.wav").find("unsupported codec"), std::string::npos);
  write_bytes(dir / "empty.wav", wav_bytes(1, 1, 8000, 16, ""));
  EXPECT_NE(expect_io_error(dir / "empty.wav").find("zero-length audio"), std::string::npos);
}

TEST(LoadWav, SkipsUnknownChunksAndReadsExtensibleFloat) {
  const auto dir = test::scratch_dir("wav_ext");
  std::string out = "RIFF";
  std::string body = "WAVE";
  body += "LIST";
  append_le(body, 3, 4);
  body += "abc";
  body.push_back('\0');  // pad byte for the odd-sized chunk
  body += "fmt ";
  append_le(body, 40, 4);
  append_le(body, 0xFFFE, 2);
  append_le(body, 1, 2);
  append_le(body, 22050, 4);
  append_le(body, 22050 * 4, 4);
  append_le(body, 4, 2);
  append_le(body, 32, 2);
  append_le(body, 22, 2);
  append_le(body, 32, 2);
  append_le(body, 4, 4);
  append_le(body, 3, 2);  // KSDATAFORMAT_SUBTYPE_IEEE_FLOAT
  body += std::string(14, '\x11');
  body += "data";
  append_le(body, 8, 4);
  append_le(body, std::bit_cast<std::uint32_t>(0.25f), 4);
  append_le(body, std::bit_cast<std::uint32_t>(-0.75f), 4);
  append_le(out, body.size(), 4);
  out += body;
  write_bytes(dir / "x.wav", out);
  const AudioClip clip = load_wav(dir / "x.wav");
  EXPECT_EQ(clip.sample_rate, 22050);
  EXPECT_EQ(clip.samples, (std::vector<double>{0.25, -0.75}));
}

TEST(WriteWav, Pcm16RoundTripWithinOneQuantum) {
  const auto dir = test::scratch_dir("wav_rt");
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  AudioClip clip{{}, 16000};
  for (int i = 0; i < 1000; ++i) clip.samples.push_back(dist(gen));
  write_wav(dir / "rt.wav", clip);
  const AudioClip back = load_wav(dir / "rt.wav");
  ASSERT_EQ(back.samples.size(), clip.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    EXPECT_LE(std::abs(back.samples[i] - clip.samples[i]), 1.0 / 32768.0);
  }
  write_wav(dir / "rt_f.wav", clip, WavEncoding::kFloat32);
  const AudioClip fback = load_wav(dir / "rt_f.wav");
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    EXPECT_EQ(fback.samples[i], static_cast<double>(static_cast<float>(clip.samples[i])));
  }
}

}  // namespace
}  // namespace twfr
