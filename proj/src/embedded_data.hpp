// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

// Contents of data/*.txt, compiled in at configure time.
namespace kombo::data {

extern const std::string_view kBtsTables;
extern const std::string_view kKeyboardAdjacency;

}  // namespace kombo::data
