#include "twfr/dataset.h"

#include <algorithm>
#include <regex>
#include <string>

#include "twfr/error.h"

namespace twfr {

std::string_view to_string(Domain d) { return d == Domain::kSource ? "source" : "target"; }
std::string_view to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }
std::string_view to_string(Label l) {
  switch (l) {
    case Label::kNormal: return "normal";
    case Label::kAnomaly: return "anomaly";
    case Label::kUnknown: break;
  }
  return "unknown";
}

Domain parse_domain(std::string_view s) {
  if (s == "source") return Domain::kSource;
  if (s == "target") return Domain::kTarget;
  throw ParseError("unknown domain '" + std::string(s) + "' (expected source or target)");
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  throw ParseError("unknown split '" + std::string(s) + "' (expected train or test)");
}

Label parse_label(std::string_view s) {
  if (s == "normal") return Label::kNormal;
  if (s == "anomaly") return Label::kAnomaly;
  if (s == "unknown") return Label::kUnknown;
  throw ParseError("unknown label '" + std::string(s) + "'");
}

ClipMetadata parse_filename(std::string_view name) {
  static const std::regex pattern(
      R"(^section_(\d{2})_(source|target)_(train|test)_(?:(normal|anomaly)_)?([^_.]+)(?:_[^/]*)?\.wav$)");
  const std::string s(name);
  std::smatch m;
  if (!std::regex_match(s, m, pattern)) {
    throw ParseError("cannot parse clip name '" + s +
                     "': expected section_<NN>_<source|target>_<train|test>_<normal|anomaly>_<id>"
                     "[_attrs].wav");
  }
  ClipMetadata meta;
  meta.section = std::stoi(m[1].str());
  meta.domain = parse_domain(m[2].str());
  meta.split = parse_split(m[3].str());
  meta.label = m[4].matched ? parse_label(m[4].str()) : Label::kUnknown;
  meta.clip_id = m[5].str();
  if (meta.split == Split::kTrain && meta.label != Label::kNormal) {
    throw ParseError("training clip '" + s + "' must be labelled normal");
  }
  return meta;
}

SplitListing list_split(const std::filesystem::path& root, std::string_view machine, Split split) {
  const std::filesystem::path dir = root / std::string(machine) / std::string(to_string(split));
  if (!std::filesystem::is_directory(dir)) throw IoError("missing directory: " + dir.string());

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") files.push_back(entry.path());
  }
  if (files.empty()) throw IoError("zero files: no .wav files in " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });

  SplitListing out;
  for (const auto& path : files) {
    try {
      ClipMetadata meta = parse_filename(path.filename().string());
      meta.machine_type = std::string(machine);
      if (meta.split != split) throw ParseError(path.filename().string() + " is in the wrong split");
      out.entries.push_back(ClipEntry{path, std::move(meta)});
    } catch (const ParseError& e) {
      out.warnings.emplace_back(e.what());
    }
  }
  if (out.entries.empty()) throw IoError("zero files: no conforming clip names in " + dir.string());
  return out;
}

LoadedSplit load_split(const std::filesystem::path& root, std::string_view machine, Split split) {
  SplitListing listing = list_split(root, machine, split);
  LoadedSplit out;
  out.warnings = std::move(listing.warnings);
  for (ClipEntry& entry : listing.entries) {
    try {
      out.clips.push_back(LabeledClip{load_wav(entry.path), std::move(entry.meta)});
    } catch (const IoError& e) {
      out.warnings.emplace_back(e.what());
    }
  }
  if (out.clips.empty()) {
    throw IoError("no readable clips under " + (root / std::string(machine)).string());
  }
  return out;
}

}  // namespace twfr
