#pragma once

#include <string>
#include <vector>

#include "snnpid/plants.hpp"
#include "snnpid/training.hpp"

namespace snnpid {

// `t_s,setpoint,y,u,p_term,i_term,d_term,error`
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

// `freq_hz,mse,pearson_loss`
void write_sweep_csv(const std::string& path,
                     const std::vector<SweepPoint>& points);

// `epoch,p_loss,i_loss,d_loss`
void write_loss_history_csv(const std::string& path,
                            const std::vector<EpochLosses>& history);

}  // namespace snnpid
