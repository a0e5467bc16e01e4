#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "twfr/wav.h"

namespace twfr {

enum class Domain { kSource, kTarget };
enum class Split { kTrain, kTest };
enum class Label { kNormal, kAnomaly, kUnknown };

std::string_view to_string(Domain d);
std::string_view to_string(Split s);
std::string_view to_string(Label l);
Domain parse_domain(std::string_view s);
Split parse_split(std::string_view s);
Label parse_label(std::string_view s);

struct ClipMetadata {
  std::string machine_type;
  int section = 0;
  Domain domain = Domain::kSource;
  Split split = Split::kTrain;
  Label label = Label::kNormal;
  std::string clip_id;

  bool operator==(const ClipMetadata&) const = default;
};

// Parses `section_<NN>_<domain>_<split>_<label>_<id>[_attrs].wav`. On test
// files the label token may be missing (label = unknown). Training files must
// be labelled normal. machine_type is left empty. Throws ParseError.
ClipMetadata parse_filename(std::string_view name);

struct ClipEntry {
  std::filesystem::path path;
  ClipMetadata meta;
};

struct LabeledClip {
  AudioClip clip;
  ClipMetadata meta;
};

// Files under <root>/<machine>/<split>/*.wav in lexicographic order.
struct SplitListing {
  std::vector<ClipEntry> entries;
  std::vector<std::string> warnings;  // non-conforming names, skipped
};

// Throws IoError for a missing directory or when it holds no .wav files.
SplitListing list_split(const std::filesystem::path& root, std::string_view machine, Split split);

struct LoadedSplit {
  std::vector<LabeledClip> clips;
  std::vector<std::string> warnings;  // one per skipped file

  std::size_t warning_count() const { return warnings.size(); }
};

// Like list_split, also decoding audio. Unreadable files are skipped and
// tallied; throws IoError if nothing could be loaded.
LoadedSplit load_split(const std::filesystem::path& root, std::string_view machine, Split split);

}  // namespace twfr
