#pragma once

#include <string>

#include "blindcapon/core.hpp"

namespace blindcapon {

enum class WavEncoding { Pcm16, Float32 };

struct WavData {
  rmat samples;  // channels x frames, full scale is [-1, 1]
  double sample_rate = 0.0;
};

/// Reads RIFF/WAVE with 16-bit PCM, 24-bit PCM, 32-bit PCM or 32-bit float
/// samples (plain or WAVE_FORMAT_EXTENSIBLE headers).
WavData read_wav(const std::string& path);

void write_wav(const std::string& path, const rmat& samples, double sample_rate,
               WavEncoding encoding = WavEncoding::Float32);

}  // namespace blindcapon
