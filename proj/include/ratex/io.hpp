// Copyright 2026 The ratex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RATEX_IO_HPP_
#define RATEX_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace ratex {

std::string ReadTextFile(const std::filesystem::path& path);

/// Writes UTF-8 text, appending a trailing newline if missing. Parent
/// directories are created.
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

}  // namespace ratex

#endif  // RATEX_IO_HPP_
