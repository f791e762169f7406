#pragma once

#include <string>

#include "eventgrad/engine.hpp"

namespace eventgrad {

/// Shortest round-trippable decimal rendering of a double; stable across
/// runs so metrics files compare byte-for-byte.
std::string format_double(double v);

/// CSV with header `iter,loss,disagreement,messages_cum,volume_cum,events`.
void write_metrics_csv(const std::string& path, const RunMetrics& metrics);

/// JSONL alternative, one object per iteration with the same fields.
void write_metrics_jsonl(const std::string& path, const RunMetrics& metrics);

}  // namespace eventgrad
