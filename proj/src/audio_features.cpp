#include "gestsynth/audio_features.hpp"

#include "gestsynth/errors.hpp"
#include "gestsynth/random.hpp"
#include "text_io.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>

namespace gestsynth {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
    return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t read_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s += static_cast<char>((v >> (8 * i)) & 0xFF);
}
void put_u16(std::string& s, std::uint16_t v) {
    s += static_cast<char>(v & 0xFF);
    s += static_cast<char>((v >> 8) & 0xFF);
}

// fftw's planner is not reentrant; execution on a private plan is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

class RealDft {
   public:
    explicit RealDft(int n) : n_(n) {
        in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
        out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
        std::lock_guard lock(fftw_planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
    }
    ~RealDft() {
        {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(plan_);
        }
        fftw_free(in_);
        fftw_free(out_);
    }
    RealDft(const RealDft&) = delete;
    RealDft& operator=(const RealDft&) = delete;

    double* input() { return in_; }

    // |X_k|^2 for k = 0..n/2
    void power(Eigen::Ref<Eigen::VectorXd> out) {
        fftw_execute(plan_);
        for (int k = 0; k <= n_ / 2; ++k) out[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }

   private:
    int n_;
    double* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
    const std::string data = detail::read_text_file(path);
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    const std::string ctx = path.string();
    if (data.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
        throw MalformedHeader(ctx + ": not a RIFF/WAVE file");
    }
    std::size_t pos = 12;
    int channels = 0, bits = 0, format = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    while (pos + 8 <= data.size()) {
        const std::uint32_t size = read_u32(p + pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > data.size()) throw MalformedHeader(ctx + ": truncated chunk");
        if (std::memcmp(p + pos, "fmt ", 4) == 0) {
            if (size < 16) throw MalformedHeader(ctx + ": short fmt chunk");
            format = read_u16(p + body);
            channels = read_u16(p + body + 2);
            rate = read_u32(p + body + 4);
            bits = read_u16(p + body + 14);
            have_fmt = true;
        } else if (std::memcmp(p + pos, "data", 4) == 0) {
            if (!have_fmt) throw MalformedHeader(ctx + ": data before fmt");
            if (format != 1 || channels != 1 || bits != 16) {
                throw MalformedHeader(ctx + ": only 16-bit PCM mono is supported");
            }
            AudioBuffer audio;
            audio.sample_rate = static_cast<int>(rate);
            audio.samples.resize(size / 2);
            for (std::size_t i = 0; i < audio.samples.size(); ++i) {
                const auto s = static_cast<std::int16_t>(read_u16(p + body + 2 * i));
                audio.samples[i] = s / 32768.0;
            }
            return audio;
        }
        pos = body + size + (size & 1u);
    }
    throw MalformedHeader(ctx + ": no data chunk");
}

void write_wav(const AudioBuffer& audio, const std::filesystem::path& path) {
    const auto n = static_cast<std::uint32_t>(audio.samples.size());
    std::string out;
    out.reserve(44 + 2 * n);
    out += "RIFF";
    put_u32(out, 36 + 2 * n);
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, 1);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(audio.sample_rate) * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    out += "data";
    put_u32(out, 2 * n);
    for (double x : audio.samples) {
        const double scaled = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    }
    detail::write_text_file(path, out);
}

double rms(const AudioBuffer& audio) {
    if (audio.samples.empty()) return 0.0;
    long double acc = 0.0;
    for (double x : audio.samples) acc += static_cast<long double>(x) * x;
    return static_cast<double>(std::sqrt(acc / audio.samples.size()));
}

AudioBuffer rms_normalize(const AudioBuffer& audio, double target_rms) {
    if (!(target_rms > 0.0)) throw InvalidArgument("target_rms must be positive");
    if (audio.samples.empty()) throw InvalidArgument("empty audio");
    const double current = rms(audio);
    if (current < 1e-12) throw SilentInput("input RMS below 1e-12");
    const double scale = target_rms / current;
    AudioBuffer out = audio;
    for (double& x : out.samples) x *= scale;
    return out;
}

AudioBuffer add_white_noise(const AudioBuffer& audio, double amplitude, std::uint64_t seed) {
    if (!(amplitude >= 0.0)) throw InvalidArgument("noise amplitude must be >= 0");
    AudioBuffer out = audio;
    if (amplitude == 0.0) return out;
    Rng rng(seed);
    for (double& x : out.samples) x += amplitude * rng.uniform(-1.0, 1.0);
    return out;
}

MelFilterBank mel_filter_bank(int n_fft, int sample_rate, int n_filters) {
    MelFilterBank bank;
    const double nyquist = sample_rate / 2.0;
    const double mel_max = hz_to_mel(nyquist);
    bank.edges_hz.resize(n_filters + 2);
    for (int i = 0; i < n_filters + 2; ++i) {
        bank.edges_hz[i] = mel_to_hz(mel_max * i / (n_filters + 1));
    }
    const int bins = n_fft / 2 + 1;
    bank.weights = Eigen::MatrixXd::Zero(n_filters, bins);
    for (int m = 0; m < n_filters; ++m) {
        const double lo = bank.edges_hz[m], mid = bank.edges_hz[m + 1], hi = bank.edges_hz[m + 2];
        for (int k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * sample_rate / n_fft;
            if (f > lo && f < mid) {
                bank.weights(m, k) = (f - lo) / (mid - lo);
            } else if (f >= mid && f < hi) {
                bank.weights(m, k) = (hi - f) / (hi - mid);
            }
        }
    }
    return bank;
}

FrameGeometry frame_geometry(std::size_t n_samples, int sample_rate) {
    FrameGeometry g;
    g.window = static_cast<int>(std::lround(kFeatureWindow * sample_rate));
    g.hop = static_cast<int>(std::lround(kFeatureStride * sample_rate));
    g.count = n_samples < static_cast<std::size_t>(g.window)
                  ? 0
                  : static_cast<int>((n_samples - g.window) / g.hop) + 1;
    return g;
}

namespace {

void check_audio(const AudioBuffer& audio) {
    if (audio.sample_rate < 8000) throw InvalidArgument("sample rate must be >= 8000 Hz");
    for (double x : audio.samples) {
        if (!std::isfinite(x)) throw NonFinite("audio sample is not finite");
    }
}

Eigen::VectorXd hamming(int n) {
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    return w;
}

// Calls fn(frame_index, windowed_samples, power_spectrum) per analysis window.
template <class Fn>
void for_each_window(const AudioBuffer& audio, const FrameGeometry& g, Fn&& fn) {
    const Eigen::VectorXd win = hamming(g.window);
    RealDft dft(g.window);
    Eigen::VectorXd windowed(g.window);
    Eigen::VectorXd power(g.window / 2 + 1);
    for (int k = 0; k < g.count; ++k) {
        const std::size_t start = static_cast<std::size_t>(k) * g.hop;
        for (int i = 0; i < g.window; ++i) windowed[i] = win[i] * audio.samples[start + i];
        std::copy(windowed.data(), windowed.data() + g.window, dft.input());
        dft.power(power);
        fn(k, windowed, power);
    }
}

}  // namespace

Eigen::MatrixXd filter_bank_energies(const AudioBuffer& audio) {
    check_audio(audio);
    const FrameGeometry g = frame_geometry(audio.samples.size(), audio.sample_rate);
    if (g.count == 0) throw TooShort("audio shorter than one 25 ms window");
    const MelFilterBank bank = mel_filter_bank(g.window, audio.sample_rate);
    Eigen::MatrixXd energies(g.count, kMelFilters);
    for_each_window(audio, g, [&](int k, const Eigen::VectorXd&, const Eigen::VectorXd& power) {
        energies.row(k) = (bank.weights * power).transpose();
    });
    return energies;
}

FeatureSequence mfcc_features(const AudioBuffer& audio) {
    check_audio(audio);
    const FrameGeometry g = frame_geometry(audio.samples.size(), audio.sample_rate);
    if (g.count == 0) throw TooShort("audio shorter than one 25 ms window");
    const MelFilterBank bank = mel_filter_bank(g.window, audio.sample_rate);

    // Orthonormal DCT-II rows 1..13.
    Eigen::MatrixXd dct(kCepstralCoeffs, kMelFilters);
    const double scale = std::sqrt(2.0 / kMelFilters);
    for (int c = 0; c < kCepstralCoeffs; ++c) {
        for (int m = 0; m < kMelFilters; ++m) {
            dct(c, m) = scale * std::cos(std::numbers::pi * (c + 1) * (m + 0.5) / kMelFilters);
        }
    }

    FeatureSequence out;
    out.stride = kFeatureStride;
    out.values = Eigen::MatrixXd::Zero(g.count, kAudioFeatureDim);
    Eigen::VectorXd log_mel(kMelFilters);
    for_each_window(audio, g, [&](int k, const Eigen::VectorXd& windowed, const Eigen::VectorXd& power) {
        log_mel = (bank.weights * power).array().max(kLogFloor).log();
        out.values.row(k).head(kCepstralCoeffs) = (dct * log_mel).transpose();
        out.values(k, kCepstralCoeffs) = std::log(std::max(windowed.squaredNorm() / g.window, kLogFloor));
    });
    for (int k = 1; k < g.count; ++k) {
        out.values.row(k).tail(kStaticFeatureDim) =
            out.values.row(k).head(kStaticFeatureDim) - out.values.row(k - 1).head(kStaticFeatureDim);
    }
    return out;
}

void write_features(const FeatureSequence& f, const std::filesystem::path& path) {
    std::string out = "FEAT 1 " + detail::format_double(f.stride) + " " +
                      std::to_string(f.frame_count()) + " " + std::to_string(f.dim()) + "\n";
    for (int k = 0; k < f.frame_count(); ++k) {
        for (int i = 0; i < f.dim(); ++i) {
            if (i) out += ' ';
            out += detail::format_double(f.values(k, i));
        }
        out += '\n';
    }
    detail::write_text_file(path, out);
}

FeatureSequence read_features(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    const std::string ctx = path.string();
    if (lines.empty()) throw MalformedHeader(ctx + ": empty file");
    const auto h = detail::split_ws(lines[0]);
    if (h.size() != 5 || h[0] != "FEAT" || h[1] != "1") {
        throw MalformedHeader(ctx + ": expected 'FEAT 1 <stride> <count> <dim>'");
    }
    FeatureSequence f;
    f.stride = detail::parse_double(h[2], ctx);
    const auto count = detail::parse_int(h[3], ctx);
    const auto dim = detail::parse_int(h[4], ctx);
    if (!(f.stride > 0.0) || count < 0 || dim <= 0) throw MalformedHeader(ctx + ": bad header values");
    if (lines.size() < static_cast<std::size_t>(count) + 1) throw MalformedHeader(ctx + ": truncated");
    f.values.resize(count, dim);
    for (long long k = 0; k < count; ++k) {
        const auto tok = detail::split_ws(lines[static_cast<std::size_t>(k) + 1]);
        if (static_cast<long long>(tok.size()) != dim) throw MalformedHeader(ctx + ": wrong row width");
        for (long long i = 0; i < dim; ++i) f.values(k, i) = detail::parse_double(tok[i], ctx);
    }
    return f;
}

}  // namespace gestsynth
