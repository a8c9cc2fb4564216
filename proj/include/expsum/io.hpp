#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "expsum/calculus.hpp"
#include "expsum/model.hpp"
#include "expsum/recovery.hpp"

namespace expsum::io {

/// Model JSON: {"terms":[{"c":…,"alpha":…},…],"constant":…} with
/// round-trip-exact number printing; "constant" omitted when absent.
std::string model_to_json(const ExpSumModel& model);
ExpSumModel model_from_json(const std::string& text);

/// Recovery result JSON for the command-line front end.
std::string result_to_json(const RecoveryResult& result, double wall_seconds);

/// Records CSV: header `t,f,J1,…,JN` (N inferred on read), one row per
/// sample, %.17g floats, LF line endings.
std::string records_to_csv(const std::vector<SampleRecord>& records);
std::vector<SampleRecord> records_from_csv(std::istream& in);

/// Dense-signal CSV: header `t,f`.
std::string signal_to_csv(const DenseSignal& signal);
DenseSignal signal_from_csv(std::istream& in);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace expsum::io
