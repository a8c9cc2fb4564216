#include "expsum/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "expsum/errors.hpp"

namespace expsum::io {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view field, int line_no) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw FormatError("line " + std::to_string(line_no) + ": cannot parse number '" +
                          std::string(field) + "'");
    if (!std::isfinite(v))
        throw FormatError("line " + std::to_string(line_no) + ": non-finite value '" +
                          std::string(field) + "'");
    return v;
}

void check_monotone(double prev_t, double t, int line_no) {
    if (t == prev_t)
        throw FormatError("line " + std::to_string(line_no) + ": duplicate sample time " + fmt17(t));
    if (t < prev_t)
        throw FormatError("line " + std::to_string(line_no) +
                          ": sample times must be strictly increasing (" + fmt17(t) + " after " +
                          fmt17(prev_t) + ")");
}

json model_to_json_obj(const ExpSumModel& model) {
    json terms = json::array();
    for (const auto& term : model.terms()) terms.push_back({{"c", term.coeff}, {"alpha", term.rate}});
    json obj{{"terms", std::move(terms)}};
    if (model.constant()) obj["constant"] = *model.constant();
    return obj;
}

}  // namespace

std::string model_to_json(const ExpSumModel& model) { return model_to_json_obj(model).dump(2) + "\n"; }

ExpSumModel model_from_json(const std::string& text) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("model JSON: ") + e.what());
    }
    if (!obj.is_object() || !obj.contains("terms") || !obj["terms"].is_array())
        throw FormatError("model JSON: expected an object with a 'terms' array");
    std::vector<ExpSumTerm> terms;
    for (const auto& item : obj["terms"]) {
        if (!item.is_object() || !item.contains("c") || !item.contains("alpha") ||
            !item["c"].is_number() || !item["alpha"].is_number())
            throw FormatError("model JSON: each term needs numeric 'c' and 'alpha'");
        terms.push_back({item["c"].get<double>(), item["alpha"].get<double>()});
    }
    std::optional<double> constant;
    if (obj.contains("constant")) {
        if (!obj["constant"].is_number())
            throw FormatError("model JSON: 'constant' must be a number");
        constant = obj["constant"].get<double>();
    }
    try {
        return ExpSumModel(std::move(terms), constant);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("model JSON: ") + e.what());
    }
}

std::string result_to_json(const RecoveryResult& result, double wall_seconds) {
    json obj;
    obj["mode"] = to_string(result.mode_used);
    obj["model"] = model_to_json_obj(result.model);
    obj["x"] = result.x_vector;
    obj["frobenius_low_coeffs"] = result.frobenius.low_coeffs;
    obj["cond_estimate"] = result.cond_estimate;
    obj["collocation_residual"] = result.collocation_residual;
    obj["reconstruction_residual"] = result.reconstruction_residual;
    obj["warnings"] = result.warnings;
    obj["wall_seconds"] = wall_seconds;
    return obj.dump(2) + "\n";
}

std::string records_to_csv(const std::vector<SampleRecord>& records) {
    if (records.empty()) throw std::invalid_argument("records_to_csv: no records");
    const std::size_t depth = records.front().integrals.size();
    std::ostringstream out;
    out << "t,f";
    for (std::size_t k = 1; k <= depth; ++k) out << ",J" << k;
    out << "\n";
    for (const auto& rec : records) {
        if (rec.integrals.size() != depth)
            throw std::invalid_argument("records_to_csv: ragged integral columns");
        out << fmt17(rec.t) << "," << fmt17(rec.f_value);
        for (double j : rec.integrals) out << "," << fmt17(j);
        out << "\n";
    }
    return out.str();
}

std::vector<SampleRecord> records_from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("line 1: empty records file");
    auto header = split_fields(line);
    if (header.size() < 3 || header[0] != "t" || header[1] != "f")
        throw FormatError("line 1: expected header t,f,J1,...,JN");
    for (std::size_t k = 2; k < header.size(); ++k)
        if (header[k] != "J" + std::to_string(k - 1))
            throw FormatError("line 1: expected column J" + std::to_string(k - 1) + ", found '" +
                              std::string(header[k]) + "'");
    const std::size_t depth = header.size() - 2;

    std::vector<SampleRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw FormatError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields, got " +
                              std::to_string(fields.size()));
        SampleRecord rec;
        rec.t = parse_double(fields[0], line_no);
        rec.f_value = parse_double(fields[1], line_no);
        rec.integrals.resize(depth);
        for (std::size_t k = 0; k < depth; ++k) rec.integrals[k] = parse_double(fields[k + 2], line_no);
        if (!records.empty()) check_monotone(records.back().t, rec.t, line_no);
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw FormatError("line 1: records file has a header but no rows");
    return records;
}

std::string signal_to_csv(const DenseSignal& signal) {
    std::ostringstream out;
    out << "t,f\n";
    for (std::size_t i = 0; i < signal.size(); ++i)
        out << fmt17(signal.grid()[i]) << "," << fmt17(signal.values()[i]) << "\n";
    return out.str();
}

DenseSignal signal_from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("line 1: empty signal file");
    auto header = split_fields(line);
    if (header.size() != 2 || header[0] != "t" || header[1] != "f")
        throw FormatError("line 1: expected header t,f");

    std::vector<double> grid, values;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != 2)
            throw FormatError("line " + std::to_string(line_no) + ": expected 2 fields, got " +
                              std::to_string(fields.size()));
        const double t = parse_double(fields[0], line_no);
        const double f = parse_double(fields[1], line_no);
        if (!grid.empty()) check_monotone(grid.back(), t, line_no);
        grid.push_back(t);
        values.push_back(f);
    }
    try {
        return DenseSignal(std::move(grid), std::move(values));
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("signal CSV: ") + e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace expsum::io
