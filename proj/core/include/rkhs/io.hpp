#pragma once

#include "rkhs/clustering.hpp"
#include "rkhs/common.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/kernel_ops.hpp"
#include "rkhs/multiscale.hpp"
#include "rkhs/transport.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace rkhs {

// Matrices as CSV: row-major, '.' decimal point, '\n' row terminator, shortest
// round-trip formatting. Reading back what was written is exact.
void write_csv(std::ostream& os, const Eigen::Ref<const Matrix>& m);
void write_csv(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& m);
Matrix read_csv(std::istream& is);
Matrix read_csv(const std::filesystem::path& path);

/// Shortest decimal string that parses back to v.
std::string format_double(double v);

/// Flat key=value text; '#' starts a comment line.
using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(std::istream& is);
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

void save_kernel(const std::filesystem::path& path, const ScaledKernel& k);
ScaledKernel load_kernel(const std::filesystem::path& path);

// Directory bundles.
void save_regressor(const std::filesystem::path& dir, const Regressor& r);
Regressor load_regressor(const std::filesystem::path& dir);

void save_cluster_model(const std::filesystem::path& dir, const ClusterModel& m);
ClusterModel load_cluster_model(const std::filesystem::path& dir);

void save_multiscale(const std::filesystem::path& dir, const MultiscaleRegressor& m);
MultiscaleRegressor load_multiscale(const std::filesystem::path& dir);

void save_sampler(const std::filesystem::path& dir, const SamplerMap& s);
SamplerMap load_sampler(const std::filesystem::path& dir);

}  // namespace rkhs
