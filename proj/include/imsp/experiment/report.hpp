#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "imsp/experiment/experiments.hpp"

namespace imsp::exp {

// Config and artifact hashes plus a wall-clock block kept apart so that two
// runs of the same recipe differ only there.
nlohmann::json provenance(Workbench& wb);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

nlohmann::json metrics_json(const rec::VerificationMetrics& m);
nlohmann::json rows_json(const std::vector<AttackRow>& rows);
void write_rows_csv(const std::filesystem::path& path, const std::vector<AttackRow>& rows);
// Fixed-width text table for the console.
std::string format_rows(const std::vector<AttackRow>& rows);

nlohmann::json subspace_json(const SubspaceReport& r);
// Per-sample CSV plus one gnuplot-ready histogram file per pair and region.
void write_subspace(const std::filesystem::path& dir, const SubspaceReport& r, int bins);

nlohmann::json audit_json(const AuditReport& r);
nlohmann::json blackbox_json(const BlackBoxReport& r, const std::vector<int>& checkpoints);
void write_blackbox_csv(const std::filesystem::path& path, const BlackBoxReport& r);
nlohmann::json sticker_json(const StickerReport& r);

}  // namespace imsp::exp
