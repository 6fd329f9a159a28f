#include "rosa/wave.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace rosa {

namespace {

constexpr uint16_t kFormatPcm = 0x0001;
constexpr uint16_t kFormatFloat = 0x0003;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

struct FmtChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits_per_sample = 0;
};

double decode_sample(const uint8_t* p, uint16_t format, uint16_t bits) {
  switch (format) {
    case kFormatPcm:
      if (bits == 16) {
        int16_t v;
        std::memcpy(&v, p, 2);
        return v / 32768.0;
      }
      if (bits == 24) {
        int32_t v = p[0] | p[1] << 8 | p[2] << 16;
        if (v & 0x800000) v |= ~0xFFFFFF;  // sign extend
        return v / 8388608.0;
      }
      if (bits == 32) {
        int32_t v;
        std::memcpy(&v, p, 4);
        return v / 2147483648.0;
      }
      break;
    case kFormatFloat:
      if (bits == 32) {
        float v;
        std::memcpy(&v, p, 4);
        return v;
      }
      if (bits == 64) {
        double v;
        std::memcpy(&v, p, 8);
        return v;
      }
      break;
    default:
      break;
  }
  throw UnsupportedFormat("unsupported sample format: code " +
                          std::to_string(format) + ", " +
                          std::to_string(bits) + " bit");
}

void append_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8 & 0xFF));
  out.push_back(static_cast<char>(v >> 16 & 0xFF));
  out.push_back(static_cast<char>(v >> 24 & 0xFF));
}

void append_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8 & 0xFF));
}

}  // namespace

AudioBuffer load_audio(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw FileNotFound("cannot open " + path.string());

  std::string raw((std::istreambuf_iterator<char>(file)),
                  std::istreambuf_iterator<char>());
  const uint8_t* data = reinterpret_cast<const uint8_t*>(raw.data());
  const size_t size = raw.size();

  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw UnsupportedFormat(path.string() + " is not a RIFF/WAVE file");
  }

  FmtChunk fmt;
  bool have_fmt = false;
  const uint8_t* payload = nullptr;
  size_t payload_bytes = 0;

  size_t pos = 12;
  while (pos + 8 <= size) {
    const char* id = reinterpret_cast<const char*>(data + pos);
    const uint32_t chunk_size = read_u32(data + pos + 4);
    const size_t body = pos + 8;
    if (body + chunk_size > size)
      throw UnsupportedFormat(path.string() + ": truncated chunk");

    if (std::memcmp(id, "fmt ", 4) == 0 && chunk_size >= 16) {
      fmt.format = read_u16(data + body);
      fmt.channels = read_u16(data + body + 2);
      fmt.sample_rate = read_u32(data + body + 4);
      fmt.bits_per_sample = read_u16(data + body + 14);
      if (fmt.format == kFormatExtensible && chunk_size >= 40) {
        // wFormatTag lives in the SubFormat GUID's first two bytes
        fmt.format = read_u16(data + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      payload = data + body;
      payload_bytes = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word aligned
  }

  if (!have_fmt || payload == nullptr)
    throw UnsupportedFormat(path.string() + ": missing fmt or data chunk");
  if (fmt.channels != 1)
    throw MultiChannelInput(path.string() + " has " +
                            std::to_string(fmt.channels) +
                            " channels; split channels before analysis");
  if (fmt.sample_rate < 8000)
    throw UnsupportedFormat(path.string() + ": sample rate " +
                            std::to_string(fmt.sample_rate) +
                            " Hz below the 8 kHz minimum");

  const size_t bytes_per_sample = fmt.bits_per_sample / 8;
  if (bytes_per_sample == 0)
    throw UnsupportedFormat(path.string() + ": zero sample width");
  const size_t frames = payload_bytes / bytes_per_sample;

  AudioBuffer out;
  out.sample_rate = static_cast<int>(fmt.sample_rate);
  out.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    const double v = decode_sample(payload + i * bytes_per_sample, fmt.format,
                                   fmt.bits_per_sample);
    if (!std::isfinite(v))
      throw UnsupportedFormat(path.string() + ": non-finite sample at index " +
                              std::to_string(i));
    out.samples[i] = v;
  }
  return out;
}

void save_wave_float32(const std::filesystem::path& path,
                       const AudioBuffer& buffer) {
  if (buffer.sample_rate <= 0)
    throw InvalidInput("cannot write buffer without a sample rate");

  const uint32_t data_bytes = static_cast<uint32_t>(buffer.samples.size() * 4);
  std::string out;
  out.reserve(58 + data_bytes);

  out += "RIFF";
  append_u32(out, 4 + 24 + 12 + 8 + data_bytes);
  out += "WAVE";

  out += "fmt ";
  append_u32(out, 16);
  append_u16(out, kFormatFloat);
  append_u16(out, 1);  // mono
  append_u32(out, static_cast<uint32_t>(buffer.sample_rate));
  append_u32(out, static_cast<uint32_t>(buffer.sample_rate) * 4);
  append_u16(out, 4);
  append_u16(out, 32);

  out += "fact";
  append_u32(out, 4);
  append_u32(out, static_cast<uint32_t>(buffer.samples.size()));

  out += "data";
  append_u32(out, data_bytes);
  for (double s : buffer.samples) {
    const float v = static_cast<float>(s);
    char bytes[4];
    std::memcpy(bytes, &v, 4);
    out.append(bytes, 4);
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("short write to " + path.string());
}

}  // namespace rosa
