#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gazefuse {

/// Mono PCM in [-1, 1].
struct PcmAudio {
  std::vector<float> samples;
  std::uint32_t sample_rate = 0;

  double duration_s() const { return sample_rate ? static_cast<double>(samples.size()) / sample_rate : 0.0; }
};

/// Reads uncompressed PCM WAV (8-bit unsigned or 16-bit signed, plain or
/// WAVE_FORMAT_EXTENSIBLE), averaging all channels to mono. 8-bit maps
/// (v - 128) / 128, 16-bit maps v / 32768. Compressed or other encodings
/// throw FormatError.
PcmAudio decode_wav(std::string_view bytes, const std::string& source = "<memory>");
PcmAudio parse_wav(const std::filesystem::path& path);

/// Writes 16-bit mono PCM: round(x * 32768) clamped to the int16 range.
std::string encode_wav(const PcmAudio& audio);
void write_wav(const PcmAudio& audio, const std::filesystem::path& path);

struct SyncConfig {
  double max_lag_s = 5.0;
  double envelope_rate_hz = 100.0;
  /// Estimates whose normalized peak correlation falls below this are
  /// flagged for manual validation.
  double min_confidence = 0.5;
  /// Envelope variance under which a stream counts as silent.
  double silence_variance = 1e-10;

  void validate() const;
  bool operator==(const SyncConfig&) const = default;
};

struct OffsetEstimate {
  /// Time of an event in stream B minus its time in stream A. Positive
  /// means B's content starts later.
  double offset_s = 0.0;
  /// Pearson correlation of the overlapping envelopes at the peak, clamped to [0, 1].
  double confidence = 0.0;
  bool low_confidence = false;
};

/// Mean absolute amplitude over consecutive windows of 1/rate_hz seconds.
std::vector<double> amplitude_envelope(const PcmAudio& audio, double rate_hz);

/// c[k + max_lag] = sum_n a[n] * b[n + k] for k in [-max_lag, max_lag],
/// computed by FFT.
std::vector<double> cross_correlation(std::span<const double> a, std::span<const double> b, std::size_t max_lag);

/// Envelope cross-correlation offset estimate with parabolic peak
/// refinement. Throws LowConfidenceError when either stream is near-silent
/// and InputError for empty input.
OffsetEstimate estimate_audio_offset(const PcmAudio& a, const PcmAudio& b, const SyncConfig& config = {});

}  // namespace gazefuse
