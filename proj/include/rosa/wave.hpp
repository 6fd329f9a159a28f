#pragma once

#include <filesystem>

#include "rosa/types.hpp"

namespace rosa {

// Reads a mono RIFF/WAVE file. PCM 16/24/32-bit integer and 32/64-bit float
// are accepted, any sample rate >= 8 kHz. Multi-channel input is rejected
// rather than silently downmixed; split channels upstream.
AudioBuffer load_audio(const std::filesystem::path& path);

// Writes the buffer as 32-bit float WAVE.
void save_wave_float32(const std::filesystem::path& path,
                       const AudioBuffer& buffer);

}  // namespace rosa
