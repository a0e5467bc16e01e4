#include "twfr/gmm_io.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "twfr/error.h"

namespace twfr {
namespace {

constexpr char kMagic[8] = {'T', 'W', 'F', 'R', 'G', 'M', 'M', '\0'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

}  // namespace

void save_gmm(const std::filesystem::path& path, const GmmModel& model,
              const nlohmann::json& config) {
  const int k = model.n_components();
  const int m = model.dim();
  const nlohmann::json header = {
      {"format", "twfr-gmm"},
      {"format_version", kGmmFormatVersion},
      {"n_components", k},
      {"n_features", m},
      {"dtype", "float64"},
      {"byte_order", "little"},
      {"layout", {"weights", "means", "covariances"}},
      {"config", config},
  };
  const std::string text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put_u64(out, text.size());
  out += text;
  for (int c = 0; c < k; ++c) put_f64(out, model.weights()[c]);
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < m; ++i) put_f64(out, model.means()[c][i]);
  }
  for (int c = 0; c < k; ++c) {
    const Eigen::MatrixXd& cov = model.covariances()[c];
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) put_f64(out, cov(i, j));
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write model file " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

GmmFile load_gmm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open model file " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  const auto bad = [&](const std::string& why) -> IoError {
    return IoError("invalid model file " + path.string() + ": " + why);
  };

  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw bad("bad magic");
  }
  const std::uint64_t header_len = get_u64(bytes.data() + 8);
  if (header_len > bytes.size() - 16) throw bad("truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw bad(std::string("header is not JSON: ") + e.what());
  }
  if (header.value("format", "") != "twfr-gmm") throw bad("unknown format");
  if (header.value("format_version", -1) != kGmmFormatVersion) {
    throw bad("unsupported format_version " + header.value("format_version", nlohmann::json()).dump());
  }
  const long long k = header.value("n_components", -1LL);
  const long long m = header.value("n_features", -1LL);
  if (k < 1 || m < 1) throw bad("bad shape metadata");

  const std::uint64_t count = static_cast<std::uint64_t>(k + k * m + k * m * m);
  const std::size_t payload = 16 + header_len;
  if (bytes.size() - payload != count * 8) throw bad("payload size does not match header shapes");

  const char* p = bytes.data() + payload;
  const auto next = [&p]() {
    const double v = std::bit_cast<double>(get_u64(p));
    p += 8;
    return v;
  };
  Eigen::VectorXd weights(k);
  for (long long c = 0; c < k; ++c) weights[c] = next();
  std::vector<Eigen::VectorXd> means(static_cast<std::size_t>(k), Eigen::VectorXd(m));
  for (auto& mu : means) {
    for (long long i = 0; i < m; ++i) mu[i] = next();
  }
  std::vector<Eigen::MatrixXd> covs(static_cast<std::size_t>(k), Eigen::MatrixXd(m, m));
  for (auto& cov : covs) {
    for (long long i = 0; i < m; ++i) {
      for (long long j = 0; j < m; ++j) cov(i, j) = next();
    }
  }
  return GmmFile{GmmModel(std::move(weights), std::move(means), std::move(covs)),
                 header.value("config", nlohmann::json::object())};
}

}  // namespace twfr
