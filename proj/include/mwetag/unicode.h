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

#ifndef MWETAG_UNICODE_H_
#define MWETAG_UNICODE_H_

#include <string>
#include <string_view>
#include <vector>

namespace mwetag::unicode {

// Invalid sequences decode to U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view text);

bool is_upper(char32_t c);
bool is_letter(char32_t c);
// General category Nd.
bool is_digit(char32_t c);

// Locale-independent full lowercasing.
std::string to_lower(std::string_view text);

}  // namespace mwetag::unicode

#endif  // MWETAG_UNICODE_H_
