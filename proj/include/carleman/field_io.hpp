#pragma once

#include <string>

#include "carleman/field.hpp"
#include "carleman/geometry.hpp"

namespace carleman {

// Little-endian binary field format: 64-byte header (magic "CARLFLD1",
// version, kind, dims, grid metadata) followed by component-major row-major
// doubles. Writes are atomic (temp file + rename).
void write_field(const std::string& path, const SpaceTimeField& f, const AnnulusGrid& grid);
void write_trace(const std::string& path, const ObservationTrace& z, const AnnulusGrid& grid);

SpaceTimeField read_field(const std::string& path, const AnnulusGrid& grid);
ObservationTrace read_trace(const std::string& path, const AnnulusGrid& grid);

// Plain-text export for inspection: comp,k,t,i,j,r,theta,value.
void export_field_csv(const std::string& path, const SpaceTimeField& f, const AnnulusGrid& grid);
void export_trace_csv(const std::string& path, const ObservationTrace& z, const AnnulusGrid& grid);

// Shared atomic text writer (temp then rename) used by every CSV emitter.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace carleman
