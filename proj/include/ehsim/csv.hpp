#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "ehsim/experiment.hpp"

namespace ehsim {

/// Floats render at 6 significant digits, dot decimal separator.
inline std::string csv_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Sweep CSV contract: header always present, one row per (policy, N),
/// newline-terminated rows.
inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "policy,n_devices,misdetection_mean,misdetection_ci,ec_mean,ec_ci,"
         "info_mean,info_ci,n_runs,base_seed\n";
  for (const SweepRow& r : rows) {
    out << to_string(r.policy) << ',' << r.n_devices << ','
        << csv_number(r.misdetection.mean) << ',' << csv_number(r.misdetection.ci95) << ','
        << csv_number(r.mean_ec.mean) << ',' << csv_number(r.mean_ec.ci95) << ','
        << csv_number(r.mean_info.mean) << ',' << csv_number(r.mean_info.ci95) << ','
        << r.n_runs << ',' << r.base_seed << "\n";
  }
}

/// Per-TTI trace row; enabled by the --trace flag.
inline void write_trace_header(std::ostream& out) {
  out << "tti,event_id,event_x,event_y,detections,initial_info,woken_count,final_info,"
         "energy_spent,census_s1,census_s2,census_s3,census_s4\n";
}

inline void write_trace_row(std::ostream& out, const TtiLog& log) {
  out << log.tti << ',';
  if (log.event)
    out << log.event->id << ',' << csv_number(log.event->epicenter.x) << ','
        << csv_number(log.event->epicenter.y);
  else
    out << ",,";
  double initial = 0.0;
  for (const Report& r : log.detections) initial = std::max(initial, r.information);
  out << ',' << log.detections.size() << ',' << csv_number(initial) << ','
      << log.woken.woken.size() << ',' << csv_number(log.final_information) << ','
      << log.energy_spent << ',' << log.states_census[0] << ',' << log.states_census[1] << ','
      << log.states_census[2] << ',' << log.states_census[3] << "\n";
}

}  // namespace ehsim
