#include "twfr/spectrogram.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "twfr/error.h"

namespace twfr {
namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Real-to-complex transform of one fixed length with its own buffers.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(static_cast<std::size_t>(n));
    out_ = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  void execute() { fftw_execute(plan_); }
  double power(int bin) const { return out_[bin][0] * out_[bin][0] + out_[bin][1] * out_[bin][1]; }

 private:
  int n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

constexpr double kLinearHzPerMel = 200.0 / 3.0;
constexpr double kMinLogHz = 1000.0;
constexpr double kMinLogMel = kMinLogHz / kLinearHzPerMel;  // 15
const double kLogStep = std::log(6.4) / 27.0;

}  // namespace

void SpectrogramConfig::validate(int sample_rate) const {
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
  if (window_size < 2) throw ConfigError("window_size must be >= 2");
  if (hop_size <= 0 || hop_size > window_size) {
    throw ConfigError("hop_size must satisfy 0 < hop_size <= window_size");
  }
  if (n_mels < 1) throw ConfigError("n_mels must be >= 1");
  if (!(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0)) {
    throw ConfigError("need 0 <= f_min < f_max <= sample_rate/2 (f_min=" + std::to_string(f_min) +
                      ", f_max=" + std::to_string(f_max) +
                      ", sample_rate=" + std::to_string(sample_rate) + ")");
  }
  if (!(log_floor > 0.0) || !std::isfinite(log_floor)) throw ConfigError("log_floor must be > 0");
}

int frame_count(std::size_t num_samples, int window_size, int hop_size) {
  if (num_samples < static_cast<std::size_t>(window_size)) {
    throw ConfigError("clip shorter than one window (" + std::to_string(num_samples) + " < " +
                      std::to_string(window_size) + " samples)");
  }
  return static_cast<int>((num_samples - window_size) / hop_size) + 1;
}

std::vector<double> make_window(WindowType type, int size) {
  std::vector<double> w(static_cast<std::size_t>(size), 1.0);
  if (type == WindowType::kHann) {
    for (int i = 0; i < size; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / size);
    }
  }
  return w;
}

Eigen::MatrixXd power_spectrogram(const AudioClip& clip, const SpectrogramConfig& cfg) {
  cfg.validate(clip.sample_rate);
  const int n_frames = frame_count(clip.samples.size(), cfg.window_size, cfg.hop_size);
  const int n_bins = cfg.n_bins();
  const std::vector<double> window = make_window(cfg.window, cfg.window_size);

  Eigen::MatrixXd power(n_bins, n_frames);
  RealFft fft(cfg.window_size);
  double* buf = fft.input();
  for (int t = 0; t < n_frames; ++t) {
    const double* frame = clip.samples.data() + static_cast<std::size_t>(t) * cfg.hop_size;
    for (int i = 0; i < cfg.window_size; ++i) buf[i] = frame[i] * window[i];
    fft.execute();
    for (int b = 0; b < n_bins; ++b) power(b, t) = fft.power(b);
  }
  return power;
}

double hz_to_mel(double hz) {
  if (hz < kMinLogHz) return hz / kLinearHzPerMel;
  return kMinLogMel + std::log(hz / kMinLogHz) / kLogStep;
}

double mel_to_hz(double mel) {
  if (mel < kMinLogMel) return mel * kLinearHzPerMel;
  return kMinLogHz * std::exp((mel - kMinLogMel) * kLogStep);
}

std::vector<double> mel_band_edges(int n_mels, double f_min, double f_max) {
  const double lo = hz_to_mel(f_min);
  const double hi = hz_to_mel(f_max);
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * i / (n_mels + 1));
  }
  return edges;
}

Eigen::MatrixXd mel_filterbank(int sample_rate, int window_size, int n_mels, double f_min,
                               double f_max) {
  SpectrogramConfig check;
  check.window_size = window_size;
  check.hop_size = window_size;
  check.n_mels = n_mels;
  check.f_min = f_min;
  check.f_max = f_max;
  check.validate(sample_rate);

  const int n_bins = window_size / 2 + 1;
  const std::vector<double> edges = mel_band_edges(n_mels, f_min, f_max);
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_mels, n_bins);
  for (int m = 0; m < n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    const double norm = 2.0 / (right - left);
    bool any = false;
    for (int b = 0; b < n_bins; ++b) {
      const double f = static_cast<double>(b) * sample_rate / window_size;
      const double rising = (f - left) / (center - left);
      const double falling = (right - f) / (right - center);
      const double w = std::max(0.0, std::min(rising, falling));
      if (w > 0.0) {
        fb(m, b) = w * norm;
        any = true;
      }
    }
    if (!any) {
      throw ConfigError("mel filter " + std::to_string(m) + " (" + std::to_string(left) + "-" +
                        std::to_string(right) + " Hz) covers no FFT bin; reduce n_mels or " +
                        "increase window_size");
    }
  }
  return fb;
}

LogMelSpectrogram log_mel(const AudioClip& clip, const SpectrogramConfig& cfg,
                          const Eigen::MatrixXd& filterbank) {
  const Eigen::MatrixXd power = power_spectrogram(clip, cfg);
  if (filterbank.rows() != cfg.n_mels || filterbank.cols() != power.rows()) {
    throw ConfigError("filterbank shape does not match the spectrogram config");
  }
  const double floor = cfg.log_floor;
  LogMelSpectrogram out;
  out.values = (filterbank * power).unaryExpr([floor](double v) {
    return 10.0 * std::log10(std::max(v, floor));
  });
  return out;
}

LogMelSpectrogram log_mel(const AudioClip& clip, const SpectrogramConfig& cfg) {
  cfg.validate(clip.sample_rate);
  return log_mel(clip, cfg,
                 mel_filterbank(clip.sample_rate, cfg.window_size, cfg.n_mels, cfg.f_min, cfg.f_max));
}

}  // namespace twfr
