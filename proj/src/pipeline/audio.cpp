#include "gazefuse/pipeline/audio.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

#include "gazefuse/binary_io.hpp"
#include "gazefuse/error.hpp"

namespace gazefuse {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

PcmAudio decode_wav(std::string_view bytes, const std::string& source) {
  io::ByteReader r(bytes, source);
  if (r.bytes(4) != "RIFF") throw FormatError(source + ": not a RIFF file");
  r.u32();  // RIFF size; trusted less than the chunk walk below
  if (r.bytes(4) != "WAVE") throw FormatError(source + ": RIFF file is not WAVE");

  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (r.remaining() >= 8) {
    const std::string id(r.bytes(4));
    const std::uint32_t size = r.u32();
    if (size > r.remaining()) throw FormatError(source + ": chunk '" + id + "' runs past the end of the file");
    const auto body = r.bytes(size);
    io::ByteReader chunk(body, source + " chunk " + id);
    if (size % 2 == 1 && r.remaining() > 0) r.u8();  // pad byte

    if (id == "fmt ") {
      if (size < 16) throw FormatError(source + ": fmt chunk too short");
      std::uint16_t format = chunk.u16();
      channels = chunk.u16();
      rate = chunk.u32();
      chunk.u32();  // byte rate
      chunk.u16();  // block align
      bits = chunk.u16();
      if (format == kFormatExtensible) {
        if (size < 40) throw FormatError(source + ": extensible fmt chunk too short");
        chunk.bytes(8);  // cbSize, valid bits, channel mask
        format = chunk.u16();  // first two bytes of the subformat GUID
      }
      if (format != kFormatPcm) {
        throw FormatError(source + ": unsupported WAV encoding " + std::to_string(format) + " (only PCM is read)");
      }
      if (bits != 8 && bits != 16) throw FormatError(source + ": unsupported PCM bit depth " + std::to_string(bits));
      if (channels == 0 || rate == 0) throw FormatError(source + ": fmt chunk has zero channels or rate");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError(source + ": data chunk before fmt chunk");
      const std::size_t frame_bytes = std::size_t{channels} * bits / 8;
      const std::size_t frames = size / frame_bytes;
      PcmAudio audio;
      audio.sample_rate = rate;
      audio.samples.resize(frames);
      const auto data = body;
      for (std::size_t f = 0; f < frames; ++f) {
        double total = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
          const std::size_t at = f * frame_bytes + c * bits / 8;
          if (bits == 8) {
            total += (static_cast<double>(static_cast<unsigned char>(data[at])) - 128.0) / 128.0;
          } else {
            const auto lo = static_cast<unsigned char>(data[at]);
            const auto hi = static_cast<unsigned char>(data[at + 1]);
            total += static_cast<double>(static_cast<std::int16_t>(lo | (hi << 8))) / 32768.0;
          }
        }
        audio.samples[f] = static_cast<float>(total / channels);
      }
      return audio;
    }
  }
  throw FormatError(source + (have_fmt ? ": no data chunk" : ": no fmt chunk"));
}

PcmAudio parse_wav(const std::filesystem::path& path) { return decode_wav(io::read_file(path), path.string()); }

std::string encode_wav(const PcmAudio& audio) {
  const auto data_size = static_cast<std::uint32_t>(audio.samples.size() * 2);
  io::ByteWriter w;
  w.bytes("RIFF");
  w.u32(36 + data_size);
  w.bytes("WAVE");
  w.bytes("fmt ");
  w.u32(16);
  w.u16(kFormatPcm);
  w.u16(1);  // mono
  w.u32(audio.sample_rate);
  w.u32(audio.sample_rate * 2);
  w.u16(2);  // block align
  w.u16(16);
  w.bytes("data");
  w.u32(data_size);
  for (float x : audio.samples) {
    const long v = std::clamp(std::lround(static_cast<double>(x) * 32768.0), -32768L, 32767L);
    const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
    w.u16(u);
  }
  return w.take();
}

void write_wav(const PcmAudio& audio, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_wav(audio));
}

void SyncConfig::validate() const {
  if (!(max_lag_s > 0.0)) throw ConfigError("max_lag_s must be > 0");
  if (!(envelope_rate_hz > 0.0)) throw ConfigError("envelope_rate_hz must be > 0");
  if (!(min_confidence >= 0.0 && min_confidence <= 1.0)) throw ConfigError("min_confidence must lie in [0, 1]");
}

std::vector<double> amplitude_envelope(const PcmAudio& audio, double rate_hz) {
  if (audio.sample_rate == 0) throw InputError("audio has no sample rate");
  const double step = audio.sample_rate / rate_hz;
  const auto windows = static_cast<std::size_t>(std::floor(static_cast<double>(audio.samples.size()) / step));
  std::vector<double> env(windows);
  for (std::size_t w = 0; w < windows; ++w) {
    const auto begin = static_cast<std::size_t>(std::llround(w * step));
    const auto end = std::min(audio.samples.size(), static_cast<std::size_t>(std::llround((w + 1) * step)));
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) total += std::abs(static_cast<double>(audio.samples[i]));
    env[w] = end > begin ? total / static_cast<double>(end - begin) : 0.0;
  }
  return env;
}

std::vector<double> cross_correlation(std::span<const double> a, std::span<const double> b, std::size_t max_lag) {
  std::size_t n = 1;
  while (n < a.size() + b.size()) n <<= 1;
  const std::size_t bins = n / 2 + 1;

  std::vector<double> in_a(n, 0.0), in_b(n, 0.0), out(n);
  std::copy(a.begin(), a.end(), in_a.begin());
  std::copy(b.begin(), b.end(), in_b.begin());
  std::vector<std::complex<double>> fa(bins), fb(bins);

  // Planning is not thread-safe in FFTW; execution of distinct plans is.
  static std::mutex planner;
  fftw_plan pa, pb, inverse;
  {
    std::lock_guard lock(planner);
    pa = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_a.data(), reinterpret_cast<fftw_complex*>(fa.data()),
                              FFTW_ESTIMATE);
    pb = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_b.data(), reinterpret_cast<fftw_complex*>(fb.data()),
                              FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(fa.data()), out.data(),
                                   FFTW_ESTIMATE);
  }
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t k = 0; k < bins; ++k) fa[k] = std::conj(fa[k]) * fb[k];
  fftw_execute(inverse);
  {
    std::lock_guard lock(planner);
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(inverse);
  }

  std::vector<double> c(2 * max_lag + 1, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto lag = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(max_lag);
    if (lag >= static_cast<std::ptrdiff_t>(b.size()) || -lag >= static_cast<std::ptrdiff_t>(a.size())) continue;
    c[i] = out[static_cast<std::size_t>((lag + static_cast<std::ptrdiff_t>(n)) % static_cast<std::ptrdiff_t>(n))] /
           static_cast<double>(n);
  }
  return c;
}

namespace {

double variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return var / static_cast<double>(v.size());
}

void remove_mean(std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

// Pearson correlation of a[n] and b[n + lag] over their overlap.
double overlap_correlation(const std::vector<double>& a, const std::vector<double>& b, std::ptrdiff_t lag) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::ptrdiff_t n = std::max<std::ptrdiff_t>(0, -lag);
       n < static_cast<std::ptrdiff_t>(a.size()) && n + lag < static_cast<std::ptrdiff_t>(b.size()); ++n) {
    const double x = a[static_cast<std::size_t>(n)], y = b[static_cast<std::size_t>(n + lag)];
    ab += x * y;
    aa += x * x;
    bb += y * y;
  }
  return aa > 0.0 && bb > 0.0 ? ab / std::sqrt(aa * bb) : 0.0;
}

}  // namespace

OffsetEstimate estimate_audio_offset(const PcmAudio& a, const PcmAudio& b, const SyncConfig& config) {
  config.validate();
  if (a.samples.empty() || b.samples.empty()) throw InputError("estimate_audio_offset: empty audio stream");
  auto ea = amplitude_envelope(a, config.envelope_rate_hz);
  auto eb = amplitude_envelope(b, config.envelope_rate_hz);
  if (ea.size() < 2 || eb.size() < 2) throw InputError("estimate_audio_offset: audio shorter than two envelope windows");
  for (const auto* env : {&ea, &eb}) {
    if (variance(*env) < config.silence_variance) {
      throw LowConfidenceError(std::string("stream ") + (env == &ea ? "A" : "B") +
                               " is near-silent; the offset must be validated manually");
    }
  }
  remove_mean(ea);
  remove_mean(eb);

  const auto max_lag = static_cast<std::size_t>(std::llround(config.max_lag_s * config.envelope_rate_hz));
  const auto c = cross_correlation(ea, eb, max_lag);
  const auto peak = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());

  double refined = static_cast<double>(peak);
  if (peak > 0 && peak + 1 < c.size()) {
    const double l = c[peak - 1], m = c[peak], r = c[peak + 1];
    const double denom = l - 2.0 * m + r;
    if (denom < 0.0) refined += std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);
  }
  const auto lag = static_cast<std::ptrdiff_t>(peak) - static_cast<std::ptrdiff_t>(max_lag);

  OffsetEstimate est;
  est.offset_s = (refined - static_cast<double>(max_lag)) / config.envelope_rate_hz;
  est.confidence = std::clamp(overlap_correlation(ea, eb, lag), 0.0, 1.0);
  est.low_confidence = est.confidence < config.min_confidence;
  return est;
}

}  // namespace gazefuse
