#include "twfr/synthetic.h"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "twfr/error.h"

namespace twfr {
namespace {

// White noise through a two-pole resonator, scaled to unit RMS.
std::vector<double> resonant_noise(std::size_t n, double hz, double pole_radius, int sample_rate,
                                   Rng& rng) {
  const double w = 2.0 * std::numbers::pi * hz / sample_rate;
  const double a1 = 2.0 * pole_radius * std::cos(w);
  const double a2 = -pole_radius * pole_radius;
  std::vector<double> y(n);
  double y1 = 0.0, y2 = 0.0, energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = rng.normal() + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = v;
    y[i] = v;
    energy += v * v;
  }
  const double rms = std::sqrt(energy / static_cast<double>(std::max<std::size_t>(n, 1)));
  if (rms > 0.0) {
    for (double& v : y) v /= rms;
  }
  return y;
}

}  // namespace

AudioClip synth_normal_clip(const SyntheticMachine& machine, Rng& rng) {
  const auto n = static_cast<std::size_t>(machine.duration_s * machine.sample_rate);
  const double hz = machine.resonance_hz * (1.0 + 0.01 * rng.normal());
  const double gain = machine.noise_level * std::pow(10.0, machine.gain_jitter_db * rng.normal() / 20.0);

  const std::vector<double> hum = resonant_noise(n, hz, 0.995, machine.sample_rate, rng);
  AudioClip clip;
  clip.sample_rate = machine.sample_rate;
  clip.samples.resize(n);
  // Broadband floor through a one-pole low-pass so every Mel band sees energy.
  double lp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lp = 0.7 * lp + 0.3 * rng.normal();
    clip.samples[i] = gain * (hum[i] + 0.3 * lp);
  }
  return clip;
}

AudioClip synth_anomalous_clip(const SyntheticMachine& machine, Rng& rng) {
  AudioClip clip = synth_normal_clip(machine, rng);
  const auto n = clip.samples.size();
  const auto len = static_cast<std::size_t>(machine.burst_ms * machine.sample_rate / 1000.0);
  if (len == 0 || len >= n) return clip;
  for (int b = 0; b < machine.bursts; ++b) {
    const std::size_t start = rng.index(n - len);
    const std::vector<double> burst = resonant_noise(len, machine.burst_hz, 0.9, machine.sample_rate, rng);
    for (std::size_t i = 0; i < len; ++i) {
      const double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / len);
      clip.samples[start + i] += machine.burst_level * env * burst[i];
    }
  }
  return clip;
}

void write_synthetic_dataset(const std::filesystem::path& root, const SyntheticLayout& layout,
                             const SyntheticMachine& machine, std::uint64_t seed) {
  const auto train_dir = root / layout.machine / "train";
  const auto test_dir = root / layout.machine / "test";
  std::filesystem::create_directories(train_dir);
  std::filesystem::create_directories(test_dir);

  Rng rng(seed);
  char name[128];
  for (int s = 0; s < layout.sections; ++s) {
    const auto emit = [&](const std::filesystem::path& dir, const char* domain, const char* split,
                          const char* label, int count, bool anomalous) {
      for (int i = 0; i < count; ++i) {
        std::snprintf(name, sizeof(name), "section_%02d_%s_%s_%s_%04d.wav", s, domain, split, label, i);
        const AudioClip clip = anomalous ? synth_anomalous_clip(machine, rng) : synth_normal_clip(machine, rng);
        write_wav(dir / name, clip);
      }
    };
    emit(train_dir, "source", "train", "normal", layout.train_source, false);
    emit(train_dir, "target", "train", "normal", layout.train_target, false);
    for (const char* domain : {"source", "target"}) {
      emit(test_dir, domain, "test", "normal", layout.test_normal, false);
      emit(test_dir, domain, "test", "anomaly", layout.test_anomaly, true);
    }
  }
}

}  // namespace twfr
