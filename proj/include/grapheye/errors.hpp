#pragma once

#include <stdexcept>
#include <string>

namespace grapheye {

struct LexError : std::runtime_error {
    int line, col;
    LexError(int line_, int col_, const std::string& msg)
        : std::runtime_error("lex error at " + std::to_string(line_) + ":" +
                             std::to_string(col_) + ": " + msg),
          line(line_), col(col_) {}
};

struct ParseError : std::runtime_error {
    int line, col;
    std::string expected, found;
    ParseError(int line_, int col_, std::string expected_, std::string found_)
        : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                             std::to_string(col_) + ": expected " + expected_ +
                             ", found " + found_),
          line(line_), col(col_),
          expected(std::move(expected_)), found(std::move(found_)) {}
};

struct CfgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LabelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VocabError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace grapheye
