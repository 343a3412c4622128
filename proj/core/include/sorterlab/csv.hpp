#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sorterlab::csv {

// Round-trip-exact decimal rendering of a double.
std::string format_double(double v);

// RFC-4180 style quoting: returns the cell quoted iff it contains a comma,
// quote, or newline.
std::string quote(const std::string& cell);

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}
    // '#'-prefixed header comment line (config echo, seed, ...).
    void comment(const std::string& line);
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& out_;
};

// Reads all rows, skipping blank lines and '#' comments; handles quoted cells.
std::vector<std::vector<std::string>> read(std::istream& in);

} // namespace sorterlab::csv
