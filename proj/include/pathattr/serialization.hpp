#pragma once

#include <string>
#include <string_view>

namespace pathattr {

// Shortest decimal form that round-trips the exact double; used everywhere a
// number lands in a text file so repeated runs stay byte-identical.
std::string format_double(double v);

// Whole-file read. Throws IoError when the file is missing or unreadable.
std::string read_file(const std::string& path);

// Write via a temp file in the same directory plus rename, so readers never
// observe a half-written file and failed runs leave no partial output.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace pathattr
