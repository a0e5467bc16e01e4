#pragma once

#include <filesystem>
#include <vector>

namespace twfr {

// Mono waveform. Samples are nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 16000;
};

enum class WavEncoding { kPcm16, kFloat32 };

// Reads a RIFF/WAVE file holding PCM16 or IEEE float (32 or 64 bit) samples.
// Multi-channel input is averaged to mono. PCM16 is scaled by 1/32768.
// Throws IoError with "unreadable file", "unsupported codec" or
// "zero-length audio" in the message.
AudioClip load_wav(const std::filesystem::path& path);

// Writes one or more channels of equal length. PCM16 values are clipped to
// [-1, 1) before quantisation.
void write_wav(const std::filesystem::path& path, const std::vector<std::vector<double>>& channels,
               int sample_rate, WavEncoding encoding = WavEncoding::kPcm16);

inline void write_wav(const std::filesystem::path& path, const AudioClip& clip,
                      WavEncoding encoding = WavEncoding::kPcm16) {
  write_wav(path, std::vector<std::vector<double>>{clip.samples}, clip.sample_rate, encoding);
}

}  // namespace twfr
