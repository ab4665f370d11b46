// SPDX-License-Identifier: Apache-2.0
//
// rfimap - UAV-borne GNSS interference survey and transmitter mapping
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace rfimap {

/// Write `content` to `path` via a temporary file renamed into place, so a
/// failed write never leaves a partial artifact behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Read a whole file. Throws std::runtime_error if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace rfimap
