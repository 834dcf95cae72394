#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qtree/errors.hpp"
#include "qtree/tree/estimate.hpp"

#if defined(__unix__) || defined(__APPLE__)
#include <unistd.h>
#endif

namespace qtree::bench {

class StopWatch {
 public:
  StopWatch() : t0_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

inline std::string machine_tag() {
#if defined(__unix__) || defined(__APPLE__)
  char buf[256] = {0};
  if (gethostname(buf, sizeof buf - 1) == 0 && buf[0] != '\0') return buf;
#endif
  return "unknown";
}

/// One benchmark line per run: the command, its parameters and the phase
/// wall times. Rerunning with the recorded parameters reproduces every
/// numeric output; only the timings move.
struct BenchRecord {
  std::string command;
  std::string parameters;  // "key=value key=value ..."
  std::string machine = machine_tag();
  tree::BuildPhases phases;

  std::string csv_line() const {
    std::ostringstream os;
    os << command << ',' << machine << ',' << parameters << ',' << phases.simulate_ms << ','
       << phases.nn_ms << ',' << phases.merge_ms << ',' << phases.normalize_ms << ','
       << phases.total_ms;
    return os.str();
  }
};

inline constexpr const char* kBenchRecordHeader =
    "command,machine,parameters,simulate_ms,nn_ms,merge_ms,normalize_ms,total_ms";

inline void append_record(const std::filesystem::path& path, const BenchRecord& rec) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("bench record: cannot open " + path.string());
  if (fresh) out << kBenchRecordHeader << '\n';
  out << rec.csv_line() << '\n';
  if (!out) throw IoError("bench record: write failed for " + path.string());
}

}  // namespace qtree::bench
