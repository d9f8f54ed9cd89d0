/*
 * Copyright (C) 2026 The mwetag Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MWETAG_FILEIO_H_
#define MWETAG_FILEIO_H_

#include <string>
#include <string_view>

namespace mwetag {

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file. Throws Error on I/O failure.
void write_file_atomic(const std::string& path, std::string_view contents);

// Whole-file read in binary mode. Throws DataError if the file cannot be read.
std::string read_file(const std::string& path);

}  // namespace mwetag

#endif  // MWETAG_FILEIO_H_
