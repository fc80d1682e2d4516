#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "openden/metrics/trial_log.hpp"

namespace openden::metrics {

// Shortest decimal text that parses back to the same double.
std::string format_real(double value);

// One row per task. Header:
//   trial_id,t,category_id,A_t,expanded,neurons_l1..neurons_lL,selected_l1..selected_lL,seconds
// Task 1 lists its two categories as "a|b".
std::string trial_csv(const TrialLog& log);
void write_trial_csv(const std::filesystem::path& path, const TrialLog& log);

// Inverse of trial_csv. Malformed input raises DataError naming the row.
// `source` labels diagnostics (usually the file name).
TrialLog parse_trial_csv(const std::string& text, const std::string& source = "<csv>");
TrialLog read_trial_csv(const std::filesystem::path& path);

// Every trial_*.csv in `dir`, sorted by file name. UsageError when none exist.
std::vector<TrialLog> read_trial_dir(const std::filesystem::path& dir);

}  // namespace openden::metrics
