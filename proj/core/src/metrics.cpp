#include "eventgrad/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace eventgrad {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

void write_metrics_csv(const std::string& path, const RunMetrics& metrics) {
  auto out = open_out(path);
  out << "iter,loss,disagreement,messages_cum,volume_cum,events\n";
  for (const auto& r : metrics.rows) {
    out << r.iter << ',' << format_double(r.loss) << ',' << format_double(r.disagreement)
        << ',' << r.messages_cum << ',' << r.volume_cum << ',' << r.events << '\n';
  }
}

void write_metrics_jsonl(const std::string& path, const RunMetrics& metrics) {
  auto out = open_out(path);
  for (const auto& r : metrics.rows) {
    out << "{\"iter\":" << r.iter << ",\"loss\":" << format_double(r.loss)
        << ",\"disagreement\":" << format_double(r.disagreement)
        << ",\"messages_cum\":" << r.messages_cum << ",\"volume_cum\":" << r.volume_cum
        << ",\"events\":" << r.events << "}\n";
  }
}

}  // namespace eventgrad
