#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "twfr/random.h"
#include "twfr/wav.h"

namespace twfr {

// Toy machine sound: stationary resonant noise, optionally with short
// broadband-high transient bursts standing in for a fault.
struct SyntheticMachine {
  int sample_rate = 16000;
  double duration_s = 4.0;
  double resonance_hz = 900.0;
  double noise_level = 0.05;
  double gain_jitter_db = 1.0;   // per-clip loudness variation
  int bursts = 2;                // bursts per anomalous clip
  double burst_ms = 24.0;
  double burst_hz = 4500.0;
  double burst_level = 0.25;
};

AudioClip synth_normal_clip(const SyntheticMachine& machine, Rng& rng);
AudioClip synth_anomalous_clip(const SyntheticMachine& machine, Rng& rng);

struct SyntheticLayout {
  std::string machine = "synth";
  int sections = 1;
  int train_source = 60;
  int train_target = 6;
  int test_normal = 20;   // per domain
  int test_anomaly = 20;  // per domain
};

// Writes <root>/<machine>/{train,test}/section_NN_... PCM16 files.
void write_synthetic_dataset(const std::filesystem::path& root, const SyntheticLayout& layout,
                             const SyntheticMachine& machine, std::uint64_t seed);

}  // namespace twfr
