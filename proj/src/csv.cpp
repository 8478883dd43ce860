#include "snnpid/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace snnpid {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write file: " + path);
  }
  return out;
}

std::vector<double> parse_row(const std::string& line, std::size_t fields,
                              int line_no, const std::string& path) {
  std::vector<double> row;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    double v = 0.0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
      throw std::runtime_error(path + ": parse error at line " +
                               std::to_string(line_no));
    }
    row.push_back(v);
  }
  if (row.size() != fields) {
    throw std::runtime_error(path + ": wrong field count at line " +
                             std::to_string(line_no));
  }
  return row;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "t_s,setpoint,y,u,p_term,i_term,d_term,error\n";
  char buf[256];
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::snprintf(buf, sizeof(buf),
                  "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  traj.t[k], traj.setpoint[k], traj.y[k], traj.u[k],
                  traj.p_term[k], traj.i_term[k], traj.d_term[k],
                  traj.error[k]);
    out << buf;
  }
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path);
  }
  std::string line;
  if (!std::getline(in, line) ||
      line != "t_s,setpoint,y,u,p_term,i_term,d_term,error") {
    throw std::runtime_error(path + ": unexpected trajectory header");
  }
  Trajectory traj;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto row = parse_row(line, 8, line_no, path);
    traj.t.push_back(row[0]);
    traj.setpoint.push_back(row[1]);
    traj.y.push_back(row[2]);
    traj.u.push_back(row[3]);
    traj.p_term.push_back(row[4]);
    traj.i_term.push_back(row[5]);
    traj.d_term.push_back(row[6]);
    traj.error.push_back(row[7]);
  }
  return traj;
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepPoint>& points) {
  auto out = open_out(path);
  out << "freq_hz,mse,pearson_loss\n";
  char buf[128];
  for (const SweepPoint& p : points) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g\n", p.freq_hz, p.mse,
                  p.pearson_loss);
    out << buf;
  }
}

void write_loss_history_csv(const std::string& path,
                            const std::vector<EpochLosses>& history) {
  auto out = open_out(path);
  out << "epoch,p_loss,i_loss,d_loss\n";
  char buf[160];
  for (std::size_t e = 0; e < history.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g\n", e, history[e].p,
                  history[e].i, history[e].d);
    out << buf;
  }
}

}  // namespace snnpid
