#pragma once

#include <Eigen/Dense>
#include <vector>

#include "twfr/wav.h"

namespace twfr {

enum class WindowType {
  kHann,         // periodic Hann
  kRectangular,  // debugging / closed-form checks
};

struct SpectrogramConfig {
  int window_size = 1024;
  int hop_size = 512;
  int n_mels = 128;
  double f_min = 0.0;
  double f_max = 8000.0;
  double log_floor = 1e-10;
  WindowType window = WindowType::kHann;

  // Throws ConfigError when a field is out of range for the given rate.
  void validate(int sample_rate) const;
  int n_bins() const { return window_size / 2 + 1; }
};

// M x N matrix of log Mel-band energies in dB (rows = Mel bands, columns = frames).
struct LogMelSpectrogram {
  Eigen::MatrixXd values;

  int n_mels() const { return static_cast<int>(values.rows()); }
  int n_frames() const { return static_cast<int>(values.cols()); }
};

// Frames start at sample 0 and the trailing partial frame is dropped:
// N = floor((num_samples - window_size) / hop_size) + 1. Throws when the clip
// is shorter than one window.
int frame_count(std::size_t num_samples, int window_size, int hop_size);

std::vector<double> make_window(WindowType type, int size);

// |STFT|^2, (window_size/2 + 1) x N.
Eigen::MatrixXd power_spectrogram(const AudioClip& clip, const SpectrogramConfig& cfg);

// Slaney Mel scale: linear below 1 kHz, logarithmic above.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// n_mels + 2 filter edge frequencies in Hz, equally spaced on the Mel scale.
std::vector<double> mel_band_edges(int n_mels, double f_min, double f_max);

// Triangular filters with Slaney area normalisation (each triangle scaled by
// 2 / (upper edge - lower edge)). Shape n_mels x (window_size/2 + 1). Throws
// ConfigError if any filter covers no FFT bin.
Eigen::MatrixXd mel_filterbank(int sample_rate, int window_size, int n_mels, double f_min,
                               double f_max);

// 10 * log10(max(filterbank * power, log_floor)).
LogMelSpectrogram log_mel(const AudioClip& clip, const SpectrogramConfig& cfg);

// Same, reusing a filterbank built for cfg and clip.sample_rate.
LogMelSpectrogram log_mel(const AudioClip& clip, const SpectrogramConfig& cfg,
                          const Eigen::MatrixXd& filterbank);

}  // namespace twfr
