#include "bolostat/dspchain.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bolostat/errors.hpp"
#include "bolostat/rng.hpp"

namespace bolostat {
namespace {

using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

double window_value(Window w, std::size_t k, std::size_t n) {
    if (n == 1) return 1.0;
    const double x = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n - 1);
    switch (w) {
    case Window::Rectangular: return 1.0;
    case Window::Hann: return 0.5 - 0.5 * std::cos(x);
    case Window::Hamming: return 0.54 - 0.46 * std::cos(x);
    case Window::Blackman: return 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
    }
    return 1.0;
}

} // namespace

void RawTrace::validate() const {
    require(std::isfinite(fs) && fs > 0.0, "RawTrace: fs must be positive");
    require(std::isfinite(t0), "RawTrace: t0 must be finite");
}

void IqStream::validate() const {
    require(std::isfinite(rate) && rate > 0.0, "IqStream: rate must be positive");
    require(std::isfinite(t0), "IqStream: t0 must be finite");
}

void FirSpec::validate(double rate) const {
    require(n_taps >= 1 && n_taps % 2 == 1, "FirSpec: n_taps must be odd and positive");
    require(std::isfinite(cutoff) && cutoff > 0.0 && cutoff < rate / 2.0,
            "FirSpec: cutoff must lie in (0, rate/2)");
}

RawTrace synth_raw_trace(double amp, double phase, double f_if, double noise_rms, double duration, double fs,
                         std::uint64_t seed) {
    require(std::isfinite(fs) && fs > 0.0, "synth_raw_trace: fs must be positive");
    require(std::isfinite(f_if) && f_if >= 0.0 && f_if < fs / 2.0, "synth_raw_trace: f_if must lie in [0, fs/2)");
    require(std::isfinite(noise_rms) && noise_rms >= 0.0, "synth_raw_trace: noise_rms must be >= 0");
    require(std::isfinite(duration) && duration > 0.0, "synth_raw_trace: duration must be positive");
    require(std::isfinite(amp) && std::isfinite(phase), "synth_raw_trace: amp and phase must be finite");

    RawTrace out;
    out.fs = fs;
    const auto n = static_cast<std::size_t>(std::llround(duration * fs));
    out.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double cycles = std::fmod(f_if * static_cast<double>(k) / fs, 1.0);
        out.samples[k] = amp * std::cos(2.0 * kPi * cycles + phase);
    }
    if (noise_rms > 0.0) {
        auto engine = make_engine(seed, 0);
        std::normal_distribution<double> normal(0.0, noise_rms);
        for (auto& s : out.samples) s += normal(engine);
    }
    return out;
}

IqStream digital_downconvert(const RawTrace& trace, double f_if) {
    trace.validate();
    require(std::isfinite(f_if) && f_if >= 0.0 && f_if < trace.fs / 2.0,
            "digital_downconvert: f_if must lie in [0, fs/2)");
    IqStream out;
    out.rate = trace.fs;
    out.t0 = trace.t0;
    out.iq.resize(trace.samples.size());
    const double start = std::fmod(f_if * trace.t0, 1.0);
    for (std::size_t k = 0; k < trace.samples.size(); ++k) {
        const double cycles = start + std::fmod(f_if * static_cast<double>(k) / trace.fs, 1.0);
        out.iq[k] = trace.samples[k] * std::polar(1.0, -2.0 * kPi * cycles);
    }
    return out;
}

IqStream decimate(const IqStream& stream, int factor) {
    stream.validate();
    require(factor >= 1, "decimate: factor must be >= 1");
    const auto m = static_cast<std::size_t>(factor);
    IqStream out;
    out.rate = stream.rate / factor;
    out.t0 = stream.t0 + 0.5 * (factor - 1) / stream.rate;
    out.iq.resize(stream.iq.size() / m);
    for (std::size_t b = 0; b < out.iq.size(); ++b) {
        Complex acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += stream.iq[b * m + j];
        out.iq[b] = acc / static_cast<double>(factor);
    }
    return out;
}

std::vector<double> design_fir(const FirSpec& spec, double rate) {
    spec.validate(rate);
    const auto n = static_cast<std::size_t>(spec.n_taps);
    const double fc = spec.cutoff / rate;
    const double mid = 0.5 * static_cast<double>(n - 1);
    std::vector<double> h(n);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) - mid;
        const double sinc = t == 0.0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * t) / (kPi * t);
        h[k] = sinc * window_value(spec.window, k, n);
    }
    // Enforce exact symmetry, then unit DC gain.
    for (std::size_t k = 0; k < n / 2; ++k) h[n - 1 - k] = h[k];
    for (double v : h) sum += v;
    for (double& v : h) v /= sum;
    return h;
}

Complex fir_response(std::span<const double> taps, double f, double rate) {
    const double mid = 0.5 * static_cast<double>(taps.size() - 1);
    Complex acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k)
        acc += taps[k] * std::polar(1.0, -2.0 * kPi * f * (static_cast<double>(k) - mid) / rate);
    return acc;
}

std::size_t fir_group_delay(const FirSpec& spec) {
    return static_cast<std::size_t>((spec.n_taps - 1) / 2);
}

IqStream fir_lowpass(const IqStream& stream, const FirSpec& spec) {
    stream.validate();
    const auto h = design_fir(spec, stream.rate);
    const std::size_t n = h.size();
    require(stream.iq.size() >= n, "fir_lowpass: stream shorter than n_taps");
    IqStream out;
    out.rate = stream.rate;
    out.t0 = stream.t0 + static_cast<double>(fir_group_delay(spec)) / stream.rate;
    out.iq.resize(stream.iq.size() - n + 1);
    for (std::size_t k = 0; k < out.iq.size(); ++k) {
        Complex acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += h[j] * stream.iq[k + j];
        out.iq[k] = acc;
    }
    return out;
}

IqStream demodulate(const RawTrace& trace, const ChainConfig& cfg) {
    return fir_lowpass(decimate(digital_downconvert(trace, cfg.f_if), cfg.decimation), cfg.fir);
}

void IqAccumulator::add(const IqStream& stream) {
    stream.validate();
    if (count_ == 0) {
        sum_.assign(stream.iq.begin(), stream.iq.end());
        rate_ = stream.rate;
        t0_ = stream.t0;
    } else {
        require(stream.iq.size() == sum_.size(), "average_traces: stream lengths differ");
        require(stream.rate == rate_, "average_traces: stream rates differ");
        for (std::size_t k = 0; k < sum_.size(); ++k) sum_[k] += stream.iq[k];
    }
    ++count_;
}

IqStream IqAccumulator::mean() const {
    require(count_ > 0, "average_traces: no streams to average");
    IqStream out;
    out.rate = rate_;
    out.t0 = t0_;
    out.iq.resize(sum_.size());
    for (std::size_t k = 0; k < sum_.size(); ++k) out.iq[k] = sum_[k] / static_cast<double>(count_);
    return out;
}

IqStream average_traces(std::span<const IqStream> streams) {
    IqAccumulator acc;
    for (const auto& s : streams) acc.add(s);
    return acc.mean();
}

IqStream average_traces(std::size_t n_rep, const std::function<IqStream(std::size_t)>& make) {
    IqAccumulator acc;
    for (std::size_t i = 0; i < n_rep; ++i) acc.add(make(i));
    return acc.mean();
}

double rms(std::span<const std::complex<double>> iq) {
    require(!iq.empty(), "rms: empty stream");
    double acc = 0.0;
    for (const auto& v : iq) acc += std::norm(v);
    return std::sqrt(acc / static_cast<double>(iq.size()));
}

} // namespace bolostat
