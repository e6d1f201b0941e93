#pragma once

#include <string>
#include <vector>

#include "bolostat/dspchain.hpp"
#include "bolostat/pipeline.hpp"

namespace bolostat {

/// Sweep configuration as one JSON document. Parsing validates and throws
/// ValidationError with the offending field path.
SweepConfig parse_config(const std::string& json_text);
std::string dump_config(const SweepConfig& cfg);
SweepConfig load_config(const std::string& path);

/// Dataset as one JSON document with the generating config embedded.
std::string dump_dataset(const Dataset& data);
Dataset parse_dataset(const std::string& json_text);
void save_dataset(const std::string& path, const Dataset& data);
Dataset load_dataset(const std::string& path);

/// f_p_hz,re,im
std::string trace_csv(const std::vector<double>& freqs, const std::vector<Complex>& values);

/// One row per record; header carries units. Doubles use 17 significant
/// digits so a read-back is exact.
std::string stats_csv(const Extraction& ex);

struct StatsTable {
    SweepMode mode = SweepMode::Thermal;
    std::vector<StatsRecord> records;
};
StatsTable parse_stats_csv(const std::string& text);

/// Plot table: series,mean_n,variance_n,g2,control,control_unit.
std::string report_csv(const std::vector<std::pair<std::string, StatsTable>>& series);

/// t_s,sample_v with uniform sampling; fs is taken from the time column.
RawTrace parse_raw_trace_csv(const std::string& text);
std::string raw_trace_csv(const RawTrace& trace);

/// t_s,i_v,q_v
std::string iq_csv(const IqStream& stream);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

} // namespace bolostat
