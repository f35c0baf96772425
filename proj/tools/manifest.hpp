// Copyright 2026 The nmfg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef NMFG_TOOLS_MANIFEST_HPP_
#define NMFG_TOOLS_MANIFEST_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace nmfg::tools {

/// SHA-1 of "blob <size>\0<content>", as `git hash-object` prints it.
std::string git_blob_sha1(std::string_view content);
std::string git_blob_sha1_of_file(const std::filesystem::path &path);

/// Writes `dir/manifest.json` echoing `config` and listing every output
/// file (relative to `dir`) with its size and content hash.
void write_manifest(const std::filesystem::path &dir,
                    const nlohmann::json &config,
                    const std::vector<std::string> &outputs);

}  // namespace nmfg::tools

#endif  // NMFG_TOOLS_MANIFEST_HPP_
