#pragma once

#include <ostream>
#include <string>

#include "gflsim/analysis.hpp"
#include "gflsim/scenario.hpp"

namespace gfl {

/// Columns, in order:
/// t,U_c,ang_U_c,delta_c,omega_c,theta_v,I_cd,I_cq,P_c,Q_c,s_r,U_dc,lvrt_active,mode
/// Floating point at 9 significant digits; output is deterministic.
void write_timeseries_csv(std::ostream& os, const TimeSeries& ts);

void write_surface_csv(std::ostream& os, const SurfaceGrid& grid);
void write_crossover_csv(std::ostream& os, const SurfaceGrid& grid);
void write_stability_map_csv(std::ostream& os, const StabilityMap& map);

[[nodiscard]] std::string format_double(double v);  ///< %.9g

}  // namespace gfl
