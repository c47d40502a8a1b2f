#pragma once

#include <filesystem>
#include <string>

#include "blimp/aero.hpp"
#include "blimp/params.hpp"

namespace blimp {

// Vehicle parameter file: `key = value` lines in [mass], [geometry],
// [environment] and [aero] sections. Units are fixed per key (see
// data/vehicle.ini for the documented header).
struct VehicleConfig {
  VehicleParams params;
  AeroModel aero;
};

VehicleConfig load_vehicle_file(const std::filesystem::path& path);

// Reads only the [aero] section. A_ref falls back to `default_area` when the
// file does not set A_ref_m2.
AeroModel load_aero_file(const std::filesystem::path& path, double default_area);

void write_vehicle_file(const std::filesystem::path& path, const VehicleConfig& cfg,
                        const std::string& header_comment);
void write_aero_file(const std::filesystem::path& path, const AeroModel& model,
                     const std::string& header_comment);

}  // namespace blimp
