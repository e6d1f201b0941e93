#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bolostat/errors.hpp"
#include "bolostat/io.hpp"
#include "json.hpp"

namespace bolostat {
namespace {

using nlohmann::json;

constexpr const char* kDatasetFormat = "bolostat-dataset";
constexpr int kDatasetVersion = 1;

constexpr const char* kStatsHeader =
    "mode,control,control_unit,mu_hz,sigma_hz,mean_n,variance_n,g2,power_w,truth_mean_n,truth_variance_n,"
    "residual_rms,converged,sigma_at_floor,warnings";

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& field) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(field, "not a number: '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

std::string control_unit(SweepMode mode) {
    return mode == SweepMode::Coherent ? "photon_per_s_hz" : "K";
}

json trace_json(const Trace& t) {
    std::vector<double> re, im;
    for (const auto& z : t.values) {
        re.push_back(z.real());
        im.push_back(z.imag());
    }
    return {{"control", t.truth.control},
            {"truth",
             {{"mean_n", t.truth.mean_n},
              {"variance_n", t.truth.variance_n},
              {"mu_hz", t.truth.mu},
              {"sigma_hz", t.truth.sigma}}},
            {"re", re},
            {"im", im}};
}

Trace parse_trace(const json& j, std::size_t n, const std::string& path) {
    Trace t;
    try {
        t.truth.control = j.at("control").get<double>();
        const auto& truth = j.at("truth");
        t.truth.mean_n = truth.at("mean_n").get<double>();
        t.truth.variance_n = truth.at("variance_n").get<double>();
        t.truth.mu = truth.at("mu_hz").get<double>();
        t.truth.sigma = truth.at("sigma_hz").get<double>();
        const auto re = j.at("re").get<std::vector<double>>();
        const auto im = j.at("im").get<std::vector<double>>();
        if (re.size() != n || im.size() != n) throw ValidationError(path, "re/im length differs from freqs_hz");
        for (std::size_t i = 0; i < n; ++i) t.values.emplace_back(re[i], im[i]);
    } catch (const json::exception& e) {
        throw ValidationError(path, e.what());
    }
    return t;
}

} // namespace

std::string dump_dataset(const Dataset& data) {
    json traces = json::array();
    for (const auto& t : data.traces) traces.push_back(trace_json(t));
    const json j = {{"format", kDatasetFormat},
                    {"version", kDatasetVersion},
                    {"config", json::parse(dump_config(data.config))},
                    {"freqs_hz", data.freqs},
                    {"base", trace_json(data.base)},
                    {"traces", traces}};
    return j.dump() + "\n";
}

Dataset parse_dataset(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError("<dataset>", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != kDatasetFormat)
        throw ValidationError("format", "not a bolostat dataset");
    if (j.value("version", 0) != kDatasetVersion)
        throw ValidationError("version", "unsupported dataset version");
    if (!j.contains("config")) throw ValidationError("config", "is required");
    Dataset data;
    data.config = parse_config(j["config"].dump());
    try {
        data.freqs = j.at("freqs_hz").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ValidationError("freqs_hz", e.what());
    }
    if (!j.contains("base")) throw ValidationError("base", "is required");
    data.base = parse_trace(j["base"], data.freqs.size(), "base");
    if (!j.contains("traces") || !j["traces"].is_array()) throw ValidationError("traces", "must be an array");
    for (std::size_t i = 0; i < j["traces"].size(); ++i)
        data.traces.push_back(parse_trace(j["traces"][i], data.freqs.size(), "traces[" + std::to_string(i) + "]"));
    return data;
}

void save_dataset(const std::string& path, const Dataset& data) { write_file(path, dump_dataset(data)); }

Dataset load_dataset(const std::string& path) { return parse_dataset(read_file(path)); }

std::string trace_csv(const std::vector<double>& freqs, const std::vector<Complex>& values) {
    std::string out = "f_p_hz,re,im\n";
    for (std::size_t i = 0; i < freqs.size(); ++i)
        out += fmt(freqs[i]) + "," + fmt(values[i].real()) + "," + fmt(values[i].imag()) + "\n";
    return out;
}

std::string stats_csv(const Extraction& ex) {
    std::string out = std::string(kStatsHeader) + "\n";
    const std::string mode = to_string(ex.mode);
    const std::string unit = control_unit(ex.mode);
    for (const auto& r : ex.records) {
        std::string warn = r.warnings;
        for (char& c : warn)
            if (c == ',' || c == '\n') c = ';';
        out += mode + "," + fmt(r.control) + "," + unit + "," + fmt(r.mu) + "," + fmt(r.sigma) + "," +
               fmt(r.mean_n) + "," + fmt(r.variance_n) + "," + fmt(r.g2) + "," + fmt(r.power) + "," +
               fmt(r.truth_mean_n) + "," + fmt(r.truth_variance_n) + "," + fmt(r.residual_rms) + "," +
               (r.converged ? "1" : "0") + "," + (r.sigma_at_floor ? "1" : "0") + "," + warn + "\n";
    }
    return out;
}

StatsTable parse_stats_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != kStatsHeader) throw ValidationError("header", "not a bolostat stats table");
    StatsTable table;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string where = "line " + std::to_string(i + 1);
        auto cells = split(lines[i]);
        if (cells.size() != 15) throw ValidationError(where, "expected 15 columns");
        const SweepMode mode = parse_mode(cells[0]);
        if (i == 1) table.mode = mode;
        else if (mode != table.mode) throw ValidationError(where, "mixed modes in one table");
        StatsRecord r;
        r.control = parse_double(cells[1], where + " control");
        r.mu = parse_double(cells[3], where + " mu_hz");
        r.sigma = parse_double(cells[4], where + " sigma_hz");
        r.mean_n = parse_double(cells[5], where + " mean_n");
        r.variance_n = parse_double(cells[6], where + " variance_n");
        r.g2 = parse_double(cells[7], where + " g2");
        r.power = parse_double(cells[8], where + " power_w");
        r.truth_mean_n = parse_double(cells[9], where + " truth_mean_n");
        r.truth_variance_n = parse_double(cells[10], where + " truth_variance_n");
        r.residual_rms = parse_double(cells[11], where + " residual_rms");
        r.converged = cells[12] == "1";
        r.sigma_at_floor = cells[13] == "1";
        r.warnings = cells[14];
        table.records.push_back(std::move(r));
    }
    return table;
}

std::string report_csv(const std::vector<std::pair<std::string, StatsTable>>& series) {
    std::string out = "series,mean_n,variance_n,g2,control,control_unit\n";
    for (const auto& [label, table] : series)
        for (const auto& r : table.records)
            out += label + "," + fmt(r.mean_n) + "," + fmt(r.variance_n) + "," + fmt(r.g2) + "," + fmt(r.control) +
                   "," + control_unit(table.mode) + "\n";
    return out;
}

RawTrace parse_raw_trace_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != "t_s,sample_v") throw ValidationError("header", "expected 't_s,sample_v'");
    std::vector<double> t;
    RawTrace trace;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string where = "line " + std::to_string(i + 1);
        const auto cells = split(lines[i]);
        if (cells.size() != 2) throw ValidationError(where, "expected 2 columns");
        t.push_back(parse_double(cells[0], where + " t_s"));
        trace.samples.push_back(parse_double(cells[1], where + " sample_v"));
    }
    if (t.size() < 2) throw ValidationError("t_s", "need at least two samples");
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(dt > 0.0)) throw ValidationError("t_s", "times must increase");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs(t[i] - t[i - 1] - dt) > 1e-6 * dt)
            throw ValidationError("t_s", "sampling must be uniform (line " + std::to_string(i + 2) + ")");
    trace.fs = 1.0 / dt;
    trace.t0 = t.front();
    return trace;
}

std::string raw_trace_csv(const RawTrace& trace) {
    std::string out = "t_s,sample_v\n";
    for (std::size_t k = 0; k < trace.samples.size(); ++k)
        out += fmt(trace.t0 + static_cast<double>(k) / trace.fs) + "," + fmt(trace.samples[k]) + "\n";
    return out;
}

std::string iq_csv(const IqStream& stream) {
    std::string out = "t_s,i_v,q_v\n";
    for (std::size_t k = 0; k < stream.iq.size(); ++k)
        out += fmt(stream.t0 + static_cast<double>(k) / stream.rate) + "," + fmt(stream.iq[k].real()) + "," +
               fmt(stream.iq[k].imag()) + "\n";
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(path, "cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError(path, "cannot open for writing");
    out << contents;
    if (!out) throw ValidationError(path, "write failed");
}

} // namespace bolostat
