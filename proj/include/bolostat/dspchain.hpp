#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bolostat {

/// Real digitizer record.
struct RawTrace {
    std::vector<double> samples;  ///< V
    double fs = 250e6;            ///< Hz
    double t0 = 0.0;              ///< s

    void validate() const;
};

/// Complex baseband samples. t0 is the time of the first sample.
struct IqStream {
    std::vector<std::complex<double>> iq;
    double rate = 0.0;  ///< Hz
    double t0 = 0.0;    ///< s

    void validate() const;
};

enum class Window { Rectangular, Hann, Hamming, Blackman };

/// Windowed-sinc low-pass. The default is a 500 kHz, 129-tap Blackman design
/// for a 62.5 Msps IQ stream.
struct FirSpec {
    double cutoff = 500e3;  ///< Hz
    int n_taps = 129;       ///< odd
    Window window = Window::Blackman;

    /// Throws DomainError unless 0 < cutoff < rate/2 and n_taps is odd and >= 1.
    void validate(double rate) const;
};

/// Receiver chain: downconvert at f_if, decimate by block averaging, FIR.
struct ChainConfig {
    double f_if = 62.5e6;
    int decimation = 4;
    FirSpec fir;
};

/// amp cos(2 pi f_if t + phase) plus white Gaussian noise of RMS noise_rms,
/// sampled at fs for round(duration*fs) samples from t = 0.
RawTrace synth_raw_trace(double amp, double phase, double f_if, double noise_rms, double duration, double fs,
                         std::uint64_t seed);

/// Multiplies by exp(-i 2 pi f_if t). A tone A cos(2 pi f_if t + theta)
/// becomes (A/2) exp(i theta) plus an image at -2 f_if.
IqStream digital_downconvert(const RawTrace& trace, double f_if);

/// Averages consecutive blocks of `factor` samples; a trailing partial block
/// is dropped. Block averaging over one IF period nulls the -2 f_if image
/// exactly when fs = factor * f_if.
IqStream decimate(const IqStream& stream, int factor);

/// Symmetric taps with unit DC gain.
std::vector<double> design_fir(const FirSpec& spec, double rate);

/// sum_k h[k] exp(-i 2 pi f k / rate), referenced to the filter centre.
std::complex<double> fir_response(std::span<const double> taps, double f, double rate);

/// (n_taps - 1) / 2 samples.
std::size_t fir_group_delay(const FirSpec& spec);

/// Linear-phase filtering keeping only steady-state output: the
/// (n_taps-1)/2 transient samples at each end are dropped and t0 advances by
/// the group delay. Throws DomainError if the stream is shorter than n_taps.
IqStream fir_lowpass(const IqStream& stream, const FirSpec& spec);

/// Downconvert, decimate and filter one trace.
IqStream demodulate(const RawTrace& trace, const ChainConfig& cfg);

/// Running pointwise mean of equal-length, equal-rate streams.
class IqAccumulator {
public:
    void add(const IqStream& stream);
    std::size_t count() const { return count_; }
    IqStream mean() const;

private:
    std::vector<std::complex<double>> sum_;
    double rate_ = 0.0;
    double t0_ = 0.0;
    std::size_t count_ = 0;
};

/// Pointwise complex mean. Throws DomainError on an empty set or on
/// mismatched lengths or rates.
IqStream average_traces(std::span<const IqStream> streams);

/// Mean of make(0) .. make(n_rep-1), accumulated in index order without
/// holding all traces.
IqStream average_traces(std::size_t n_rep, const std::function<IqStream(std::size_t)>& make);

/// Root-mean-square modulus of the samples.
double rms(std::span<const std::complex<double>> iq);

} // namespace bolostat
