#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "polyenc/datagen.hpp"

namespace polyenc {

// Newline-delimited JSON, one sample per line:
//   {"id": ..., "label": int, "wkt": "..."}
//   {"id": ..., "relation": "...", "subject_wkt": "...", "object_wkt": "...",
//    "sliver": bool}

void save_shape_dataset(const std::vector<ShapeSample>& samples, std::ostream& os);
void save_relation_dataset(const std::vector<RelationSample>& samples, std::ostream& os);

std::vector<ShapeSample> load_shape_dataset(std::istream& is);
std::vector<RelationSample> load_relation_dataset(std::istream& is);

void save_shape_dataset_file(const std::vector<ShapeSample>& samples, const std::string& path);
void save_relation_dataset_file(const std::vector<RelationSample>& samples,
                                const std::string& path);
std::vector<ShapeSample> load_shape_dataset_file(const std::string& path);
std::vector<RelationSample> load_relation_dataset_file(const std::string& path);

// Peeks at the first line to decide whether a file holds shapes or relations.
enum class DatasetKind { shapes, relations };
DatasetKind sniff_dataset_kind(const std::string& path);

}  // namespace polyenc
