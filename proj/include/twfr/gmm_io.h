#pragma once

#include <filesystem>
#include <json.hpp>

#include "twfr/gmm.h"

namespace twfr {

// On-disk layout:
//   8 bytes   magic "TWFRGMM\0"
//   8 bytes   header length L, little-endian uint64
//   L bytes   JSON header (format version, shapes, config echo)
//   payload   weights[K], means[K][M], covariances[K][M][M]; little-endian f64
inline constexpr int kGmmFormatVersion = 1;

struct GmmFile {
  GmmModel model;
  nlohmann::json config;  // echoed verbatim from save_gmm
};

void save_gmm(const std::filesystem::path& path, const GmmModel& model,
              const nlohmann::json& config = nlohmann::json::object());
GmmFile load_gmm(const std::filesystem::path& path);

}  // namespace twfr
