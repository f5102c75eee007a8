#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tsrkit/geometry.hpp"

namespace tsrkit {

// Canonical annotation JSON:
//   {"image_width": W, "image_height": H,
//    "cells": [{"quad": [x1,y1,...,x4,y4], "logical": [rs,re,cs,ce]}, ...]}
// Quads are normalized to clockwise-from-upper-left on ingestion.

TableAnnotation parse_annotation_json(std::string_view text);
std::string annotation_to_json(const TableAnnotation& ann, int indent = 1);

TableAnnotation load_annotation(const std::filesystem::path& path);
void save_annotation(const std::filesystem::path& path, const TableAnnotation& ann);

}  // namespace tsrkit
