#include "bolostat/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "bolostat/dspchain.hpp"
#include "bolostat/errors.hpp"
#include "bolostat/io.hpp"
#include "bolostat/photonstats.hpp"
#include "bolostat/pipeline.hpp"

namespace bolostat {
namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::uint64_t parse_seed(const std::string& s, const std::string& field) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used, 10);
        if (used != s.size() || s.front() == '-') throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(field, "must be a non-negative integer (got '" + s + "')");
    }
}

// --seed, then BOLOSTAT_SEED, then the fallback.
std::uint64_t resolve_seed(const std::optional<std::string>& flag, std::uint64_t fallback) {
    if (flag) return parse_seed(*flag, "--seed");
    if (const char* env = std::getenv("BOLOSTAT_SEED"); env && *env) return parse_seed(env, "BOLOSTAT_SEED");
    return fallback;
}

void emit(const std::optional<std::string>& path, const std::string& text, std::ostream& out) {
    if (path) write_file(*path, text);
    else out << text;
}

struct SimulateArgs {
    std::string config, out;
    std::optional<std::string> seed, csv_dir;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
    SweepConfig cfg = load_config(a.config);
    cfg.seed = resolve_seed(a.seed, cfg.seed);
    const Dataset data = simulate_sweep(cfg);
    save_dataset(a.out, data);
    if (a.csv_dir) {
        std::filesystem::create_directories(*a.csv_dir);
        const std::filesystem::path dir(*a.csv_dir);
        write_file((dir / "base.csv").string(), trace_csv(data.freqs, data.base.values));
        for (std::size_t i = 0; i < data.traces.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "trace_%03zu.csv", i);
            write_file((dir / name).string(), trace_csv(data.freqs, data.traces[i].values));
        }
    }
    out << "wrote " << data.traces.size() << " traces (+ base) to " << a.out << "\n";
    return kExitOk;
}

struct FitArgs {
    std::string dataset;
    std::optional<std::string> out;
    std::optional<int> workers;
};

int run_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    const Dataset data = load_dataset(a.dataset);
    const int workers = a.workers.value_or(data.config.workers);
    if (workers < 1) throw ValidationError("--workers", "must be >= 1");
    const Extraction ex = extract_statistics(data, workers);
    emit(a.out, stats_csv(ex), out);
    if (!ex.calibration.fit.converged) {
        err << "base calibration did not converge\n";
        return kExitNotConverged;
    }
    if (!ex.all_converged()) {
        for (const auto& r : ex.records)
            if (!r.converged) err << "fit did not converge at control " << num(r.control) << ": " << r.warnings << "\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

struct StatsArgs {
    std::optional<double> thermal_mean, coherent_mean, temperature, frequency, sigma, alpha_per_mhz, power_mean;
    std::vector<double> mixed;
    double bandwidth = 133e6;
};

void print_moments(const PhotonMoments& m, std::ostream& out) {
    out << "mean_n " << num(m.mean) << "\n";
    out << "variance_n " << num(m.variance) << "\n";
    if (m.mean > 0.0) out << "g2 " << num(g2_zero(m)) << "\n";
    else out << "g2 undefined (mean_n <= 0)\n";
}

int run_stats(const StatsArgs& a, std::ostream& out) {
    int actions = 0;
    if (a.thermal_mean) {
        ++actions;
        if (*a.thermal_mean < 0.0) throw ValidationError("--thermal-mean", "must be >= 0");
        print_moments({*a.thermal_mean, thermal_variance(*a.thermal_mean)}, out);
    }
    if (a.coherent_mean) {
        ++actions;
        if (*a.coherent_mean < 0.0) throw ValidationError("--coherent-mean", "must be >= 0");
        print_moments({*a.coherent_mean, coherent_variance(*a.coherent_mean)}, out);
    }
    if (!a.mixed.empty()) {
        ++actions;
        if (a.mixed.size() != 2 || a.mixed[0] < 0.0 || a.mixed[1] < 0.0)
            throw ValidationError("--mixed", "expects two values N_COH N_TH, both >= 0");
        print_moments(mixed_moments({a.mixed[0], a.mixed[1]}), out);
    }
    if (a.temperature) {
        ++actions;
        const double f = a.frequency.value_or(8.428e9);
        const double n = planck_mean_photon({*a.temperature, f});
        print_moments({n, thermal_variance(n)}, out);
    }
    if (a.sigma) {
        ++actions;
        if (!a.alpha_per_mhz) throw ValidationError("--alpha", "required with --sigma");
        out << "variance_n " << num(sigma_to_variance(*a.sigma * 1e6, CalibrationScale::per_mhz(*a.alpha_per_mhz)))
            << "\n";
    }
    if (a.power_mean) {
        ++actions;
        out << "power_w " << num(flux_to_power(*a.power_mean, a.frequency.value_or(8.428e9), a.bandwidth)) << "\n";
    }
    if (actions == 0) throw ValidationError("stats", "give one of --thermal-mean, --coherent-mean, --mixed, "
                                                     "--temperature, --sigma, --power");
    return kExitOk;
}

struct DemodArgs {
    std::vector<std::string> in;
    std::optional<std::string> out, seed;
    ChainConfig chain;
    std::optional<double> synth_amp;
    double synth_phase = 0.0, noise_rms = 0.0, duration = 32e-6, fs = 250e6;
    std::size_t n_avg = 1;
};

int run_demod(const DemodArgs& a, std::ostream& out) {
    IqStream avg;
    if (!a.in.empty()) {
        if (a.synth_amp) throw ValidationError("--synth-amp", "cannot be combined with --in");
        avg = average_traces(a.in.size(), [&](std::size_t i) {
            return demodulate(parse_raw_trace_csv(read_file(a.in[i])), a.chain);
        });
    } else if (a.synth_amp) {
        const std::uint64_t seed = resolve_seed(a.seed, 1);
        if (a.n_avg < 1) throw ValidationError("--n-avg", "must be >= 1");
        avg = average_traces(a.n_avg, [&](std::size_t i) {
            return demodulate(synth_raw_trace(*a.synth_amp, a.synth_phase, a.chain.f_if, a.noise_rms, a.duration,
                                              a.fs, seed + i),
                              a.chain);
        });
    } else {
        throw ValidationError("demod", "give --in FILE... or --synth-amp");
    }
    emit(a.out, iq_csv(avg), out);
    return kExitOk;
}

struct ReportArgs {
    std::optional<std::string> thermal, coherent, mixed, out;
};

int run_report(const ReportArgs& a, std::ostream& out) {
    std::vector<std::pair<std::string, StatsTable>> series;
    if (a.thermal) series.emplace_back("thermal", parse_stats_csv(read_file(*a.thermal)));
    if (a.coherent) series.emplace_back("coherent", parse_stats_csv(read_file(*a.coherent)));
    if (a.mixed) series.emplace_back("mixed", parse_stats_csv(read_file(*a.mixed)));
    if (series.empty()) throw ValidationError("report", "give at least one of --thermal, --coherent, --mixed");
    emit(a.out, report_csv(series), out);
    return kExitOk;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Photon statistics from nanobolometer resonance traces"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Synthesise a sweep dataset from a JSON config");
    simulate->add_option("--config", sim.config, "Sweep configuration (JSON)")->required();
    simulate->add_option("--out", sim.out, "Dataset output path (JSON)")->required();
    simulate->add_option("--seed", sim.seed, "Overrides BOLOSTAT_SEED and the config seed");
    simulate->add_option("--csv-dir", sim.csv_dir, "Also write each trace as f_p_hz,re,im CSV");

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "Fit a dataset and write the statistics table (CSV)");
    fit->add_option("--dataset", fa.dataset, "Dataset from `simulate`")->required();
    fit->add_option("--out", fa.out, "CSV output path (default: stdout)");
    fit->add_option("--workers", fa.workers, "Concurrent fits (default: config value)");

    StatsArgs sa;
    auto* stats = app.add_subcommand("stats", "Photon-statistics calculators");
    stats->add_option("--thermal-mean", sa.thermal_mean, "Thermal state with this mean photon flux");
    stats->add_option("--coherent-mean", sa.coherent_mean, "Coherent state with this mean photon flux");
    stats->add_option("--mixed", sa.mixed, "Displaced thermal state: N_COH N_TH")->expected(2);
    stats->add_option("--temperature", sa.temperature, "Planck occupation at this radiation temperature (K)");
    stats->add_option("--frequency", sa.frequency, "Mode frequency for --temperature/--power (Hz, default 8.428e9)");
    stats->add_option("--sigma", sa.sigma, "Fitted broadening (MHz) to convert to a variance");
    stats->add_option("--alpha", sa.alpha_per_mhz, "Scaling factor for --sigma (photon/MHz)");
    stats->add_option("--power", sa.power_mean, "Photon flux to convert to power (W)");
    stats->add_option("--bandwidth", sa.bandwidth, "Bandwidth for --power (Hz, default 133e6)");

    DemodArgs da;
    auto* demod = app.add_subcommand("demod", "Down-convert, filter and average digitizer traces");
    demod->add_option("--in", da.in, "Raw traces (CSV t_s,sample_v); averaged after demodulation");
    demod->add_option("--out", da.out, "IQ output (CSV t_s,i_v,q_v; default: stdout)");
    demod->add_option("--f-if", da.chain.f_if, "Intermediate frequency (Hz)");
    demod->add_option("--decimation", da.chain.decimation, "Block-averaging decimation factor");
    demod->add_option("--cutoff", da.chain.fir.cutoff, "FIR cutoff (Hz)");
    demod->add_option("--taps", da.chain.fir.n_taps, "FIR length (odd)");
    demod->add_option("--synth-amp", da.synth_amp, "Synthesise tone traces of this amplitude (V) instead of --in");
    demod->add_option("--synth-phase", da.synth_phase, "Tone phase (rad)");
    demod->add_option("--noise-rms", da.noise_rms, "Additive white noise (V)");
    demod->add_option("--duration", da.duration, "Trace length (s)");
    demod->add_option("--fs", da.fs, "Sampling rate (Hz)");
    demod->add_option("--n-avg", da.n_avg, "Number of synthetic traces to average");
    demod->add_option("--seed", da.seed, "Seed for synthetic traces");

    ReportArgs ra;
    auto* report = app.add_subcommand("report", "Merge fit tables into a plot-ready CSV");
    report->add_option("--thermal", ra.thermal, "Stats CSV of a thermal sweep");
    report->add_option("--coherent", ra.coherent, "Stats CSV of a coherent sweep");
    report->add_option("--mixed", ra.mixed, "Stats CSV of a mixed sweep");
    report->add_option("--out", ra.out, "Output path (default: stdout)");

    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return kExitValidation;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim, out);
        if (fit->parsed()) return run_fit(fa, out, err);
        if (stats->parsed()) return run_stats(sa, out);
        if (demod->parsed()) return run_demod(da, out);
        if (report->parsed()) return run_report(ra, out);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}

int cli_main(int argc, char** argv) {
    return cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

} // namespace bolostat
