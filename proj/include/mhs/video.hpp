#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mhs/rng.hpp"

namespace mhs {

/// One encoding of a chunk.
struct Mode {
  double size_bits = 0.0;
  double quality = 0.0;  // SSIM

  friend bool operator==(const Mode&, const Mode&) = default;
};

using ChunkModes = std::vector<Mode>;

struct QualityBounds {
  double d_min = 0.0;
  double d_max = 0.0;
};

class ProfileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-chunk, per-mode (bits, SSIM) ladders of one VBR video. Within each chunk,
/// sizes strictly increase and qualities do not decrease with the mode index.
class VideoProfile {
 public:
  static constexpr double kGopSeconds = 0.5;

  VideoProfile() = default;
  explicit VideoProfile(std::vector<ChunkModes> chunks) : chunks_(std::move(chunks)) {
    if (chunks_.empty()) throw ProfileError("no chunks");
    for (std::size_t c = 0; c < chunks_.size(); ++c) check_chunk(c, chunks_[c]);
  }

  std::size_t length() const { return chunks_.size(); }
  const ChunkModes& chunk(std::size_t index) const { return chunks_.at(index); }
  const std::vector<ChunkModes>& chunks() const { return chunks_; }

  friend bool operator==(const VideoProfile&, const VideoProfile&) = default;

  static void check_chunk(std::size_t c, const ChunkModes& modes) {
    if (modes.empty()) throw ProfileError("chunk " + std::to_string(c) + ": no modes");
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const auto& md = modes[m];
      if (!(md.size_bits > 0.0) || !std::isfinite(md.size_bits))
        throw ProfileError("chunk " + std::to_string(c) + " mode " + std::to_string(m) + ": size must be positive");
      if (!(md.quality >= 0.0 && md.quality <= 1.0))
        throw ProfileError("chunk " + std::to_string(c) + " mode " + std::to_string(m) + ": quality outside [0,1]");
      if (m > 0) {
        if (!(md.size_bits > modes[m - 1].size_bits))
          throw ProfileError("chunk " + std::to_string(c) + " mode " + std::to_string(m) + ": sizes not strictly increasing");
        if (md.quality < modes[m - 1].quality)
          throw ProfileError("chunk " + std::to_string(c) + " mode " + std::to_string(m) + ": quality decreasing");
      }
    }
  }

 private:
  std::vector<ChunkModes> chunks_;
};

/// Parses `chunk,mode,bits,ssim` rows (0-based chunk and mode, any row order).
inline VideoProfile parse_profile(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::map<std::size_t, std::map<std::size_t, Mode>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    if (!header_seen) {
      std::string compact;
      for (char ch : line)
        if (ch != ' ' && ch != '\t') compact.push_back(ch);
      if (compact != "chunk,mode,bits,ssim") throw ProfileError("line " + std::to_string(line_no) + ": expected header chunk,mode,bits,ssim");
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != 4) throw ProfileError(where + ": expected 4 fields");
    double chunk = 0, mode = 0, bits = 0, ssim = 0;
    try {
      chunk = std::stod(fields[0]);
      mode = std::stod(fields[1]);
      bits = std::stod(fields[2]);
      ssim = std::stod(fields[3]);
    } catch (const std::exception&) {
      throw ProfileError(where + ": malformed number");
    }
    if (chunk < 0 || mode < 0 || chunk != std::floor(chunk) || mode != std::floor(mode))
      throw ProfileError(where + ": chunk and mode must be non-negative integers");
    if (!(ssim >= 0.0 && ssim <= 1.0)) throw ProfileError(where + ": quality outside [0,1]");
    if (!(bits > 0.0)) throw ProfileError(where + ": size must be positive");
    auto& modes = rows[static_cast<std::size_t>(chunk)];
    if (!modes.emplace(static_cast<std::size_t>(mode), Mode{bits, ssim}).second)
      throw ProfileError(where + ": duplicate (chunk, mode)");
  }
  if (rows.empty()) throw ProfileError("no chunks");
  std::vector<ChunkModes> chunks;
  std::size_t expected_chunk = 0;
  for (const auto& [c, modes] : rows) {
    if (c != expected_chunk) throw ProfileError("chunk " + std::to_string(expected_chunk) + ": missing");
    ChunkModes ladder;
    std::size_t expected_mode = 0;
    for (const auto& [m, md] : modes) {
      if (m != expected_mode) throw ProfileError("chunk " + std::to_string(c) + ": missing mode " + std::to_string(expected_mode));
      ladder.push_back(md);
      ++expected_mode;
    }
    chunks.push_back(std::move(ladder));
    ++expected_chunk;
  }
  return VideoProfile(std::move(chunks));
}

inline VideoProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProfileError("cannot open profile file " + path);
  return parse_profile(in);
}

inline void write_profile(std::ostream& out, const VideoProfile& profile) {
  out << "chunk,mode,bits,ssim\n";
  out.precision(17);
  for (std::size_t c = 0; c < profile.length(); ++c) {
    const auto& modes = profile.chunk(c);
    for (std::size_t m = 0; m < modes.size(); ++m) out << c << ',' << m << ',' << modes[m].size_bits << ',' << modes[m].quality << '\n';
  }
}

/// A run of consecutive chunks sharing one mode count and (size, quality) ranges.
struct ProfileSegment {
  std::size_t chunks = 0;
  std::size_t modes = 1;
  double size_lo = 0.0;
  double size_hi = 0.0;
  double quality_lo = 0.0;
  double quality_hi = 0.0;
};

/// Synthetic VBR profile. Sizes are log-spaced over the segment range with per-mode
/// jitter; quality is a saturating function of log-size scaled down by a per-chunk
/// complexity draw, so each ladder is strictly increasing in size and concave in
/// quality. Segments repeat cyclically until `length` chunks are produced.
inline VideoProfile synth_profile(std::size_t length, const std::vector<ProfileSegment>& segments, Rng& rng) {
  if (segments.empty()) throw ProfileError("synth_profile: empty segment list");
  if (length == 0) throw ProfileError("synth_profile: length must be >= 1");
  for (const auto& s : segments) {
    if (s.chunks == 0 || s.modes == 0) throw ProfileError("synth_profile: segment needs chunks and modes");
    if (!(s.size_lo > 0.0) || !(s.size_hi >= s.size_lo)) throw ProfileError("synth_profile: bad size range");
    if (!(s.quality_lo >= 0.0 && s.quality_hi <= 1.0 && s.quality_lo <= s.quality_hi))
      throw ProfileError("synth_profile: bad quality range");
    if (s.modes > 1 && s.size_hi == s.size_lo) throw ProfileError("synth_profile: multi-mode segment needs a size range");
  }
  constexpr double kSaturation = 3.0;
  constexpr double kComplexitySpread = 0.3;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<ChunkModes> chunks;
  chunks.reserve(length);
  std::size_t seg = 0;
  std::size_t used = 0;
  while (chunks.size() < length) {
    const auto& s = segments[seg];
    const double complexity = uni(rng);
    const double ratio = s.size_hi / s.size_lo;
    ChunkModes ladder(s.modes);
    for (std::size_t m = 0; m < s.modes; ++m) {
      const double x = s.modes == 1 ? uni(rng) : (static_cast<double>(m) + uni(rng)) / static_cast<double>(s.modes);
      const double shape = (1.0 - std::exp(-kSaturation * x)) / (1.0 - std::exp(-kSaturation));
      ladder[m].size_bits = s.size_lo * std::pow(ratio, x);
      ladder[m].quality = s.quality_lo + (s.quality_hi - s.quality_lo) * shape * (1.0 - kComplexitySpread * complexity);
      if (m > 0) ladder[m].quality = std::max(ladder[m].quality, ladder[m - 1].quality);
    }
    chunks.push_back(std::move(ladder));
    if (++used == s.chunks) {
      used = 0;
      seg = (seg + 1) % segments.size();
    }
  }
  return VideoProfile(std::move(chunks));
}

/// Modes of the k-th requested chunk (k >= 1) of a session that starts at
/// `start_offset`, cycling through the profile.
inline const ChunkModes& chunk_at(const VideoProfile& profile, std::size_t k, std::size_t start_offset) {
  if (k == 0) throw std::out_of_range("chunk_at: request index is 1-based");
  return profile.chunk((start_offset + k - 1) % profile.length());
}

inline QualityBounds quality_bounds(const VideoProfile& profile) {
  QualityBounds b{1.0, 0.0};
  for (const auto& modes : profile.chunks()) {
    b.d_min = std::min(b.d_min, modes.front().quality);
    b.d_max = std::max(b.d_max, modes.back().quality);
  }
  return b;
}

}  // namespace mhs
