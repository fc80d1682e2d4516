#include "openden/metrics/log_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "openden/error.hpp"

namespace openden::metrics {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string header_for(std::size_t layers) {
  std::string h = "trial_id,t,category_id,A_t,expanded";
  for (std::size_t l = 1; l <= layers; ++l) h += ",neurons_l" + std::to_string(l);
  for (std::size_t l = 1; l <= layers; ++l) h += ",selected_l" + std::to_string(l);
  return h + ",seconds";
}

struct RowParser {
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(source + ": row " + std::to_string(line) + ": " + what);
  }

  std::size_t count(const std::string& field, const char* name) const {
    std::size_t v = 0;
    const auto* end = field.data() + field.size();
    auto [p, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc{} || p != end) fail(std::string("bad ") + name + " '" + field + "'");
    return v;
  }

  double real(const std::string& field, const char* name) const {
    double v = 0.0;
    const auto* end = field.data() + field.size();
    auto [p, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc{} || p != end) fail(std::string("bad ") + name + " '" + field + "'");
    return v;
  }
};

}  // namespace

std::string format_real(double value) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw NumericalError("format_real: cannot format value");
  return std::string(buf, p);
}

std::string trial_csv(const TrialLog& log) {
  std::size_t layers = 0;
  for (const auto& t : log.tasks) layers = std::max({layers, t.neurons.size(), t.selected.size()});
  std::ostringstream out;
  out << header_for(layers) << '\n';
  for (const auto& t : log.tasks) {
    out << log.trial_id << ',' << t.task << ',';
    for (std::size_t i = 0; i < t.categories.size(); ++i) out << (i ? "|" : "") << t.categories[i];
    out << ',' << format_real(t.accuracy) << ',' << (t.expanded ? 1 : 0);
    for (std::size_t l = 0; l < layers; ++l) out << ',' << (l < t.neurons.size() ? t.neurons[l] : 0);
    for (std::size_t l = 0; l < layers; ++l) out << ',' << (l < t.selected.size() ? t.selected[l] : 0);
    out << ',' << format_real(t.seconds) << '\n';
  }
  return out.str();
}

void write_trial_csv(const std::filesystem::path& path, const TrialLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << trial_csv(log);
  if (!out) throw IoError("failed writing " + path.string());
}

TrialLog parse_trial_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": row 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto head = split(line, ',');
  if (head.size() < 6 || (head.size() - 6) % 2 != 0) throw DataError(source + ": row 1: unexpected header");
  const std::size_t layers = (head.size() - 6) / 2;
  if (line != header_for(layers)) throw DataError(source + ": row 1: unexpected header '" + line + "'");

  TrialLog log;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    RowParser p{source, row};
    const auto f = split(line, ',');
    if (f.size() != head.size()) {
      p.fail("expected " + std::to_string(head.size()) + " fields, got " + std::to_string(f.size()));
    }
    TaskResult t;
    const std::size_t trial_id = p.count(f[0], "trial_id");
    if (log.tasks.empty()) {
      log.trial_id = trial_id;
    } else if (trial_id != log.trial_id) {
      p.fail("trial_id changes within one file");
    }
    t.task = p.count(f[1], "t");
    if (t.task != log.tasks.size() + 1) p.fail("task indices must be contiguous from 1");
    for (const auto& c : split(f[2], '|')) t.categories.push_back(p.count(c, "category_id"));
    if (t.categories.size() != (t.task == 1 ? 2u : 1u)) p.fail("wrong number of categories for task");
    t.accuracy = p.real(f[3], "A_t");
    if (!(t.accuracy >= 0.0 && t.accuracy <= 1.0)) p.fail("A_t outside [0,1]");
    if (f[4] != "0" && f[4] != "1") p.fail("expanded must be 0 or 1");
    t.expanded = f[4] == "1";
    for (std::size_t l = 0; l < layers; ++l) t.neurons.push_back(p.count(f[5 + l], "neurons"));
    for (std::size_t l = 0; l < layers; ++l) t.selected.push_back(p.count(f[5 + layers + l], "selected"));
    t.seconds = p.real(f.back(), "seconds");
    log.order.insert(log.order.end(), t.categories.begin(), t.categories.end());
    log.tasks.push_back(std::move(t));
  }
  return log;
}

TrialLog read_trial_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trial_csv(ss.str(), path.filename().string());
}

std::vector<TrialLog> read_trial_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("trial_", 0) == 0 && e.path().extension() == ".csv") {
      files.push_back(e.path());
    }
  }
  if (files.empty()) throw UsageError("no trial_*.csv files in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<TrialLog> out;
  for (const auto& f : files) out.push_back(read_trial_csv(f));
  return out;
}

}  // namespace openden::metrics
