#pragma once

// Template bodies for trace_io.hpp.

#include "fleetrel/error.hpp"

#include <istream>
#include <sstream>
#include <string>

namespace fleetrel {

namespace detail {

inline bool is_blank(const std::string& s)
{
    for (char c : s)
        if (c != ' ' && c != '\t' && c != '\r' && c != '\n')
            return false;
    return true;
}

} // namespace detail

template <class Fn> void for_each_jsonl(std::istream& in, Fn&& fn)
{
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_blank(line))
            continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw ParseError(lineno, "", std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object())
            throw ParseError(lineno, "", "expected a JSON object");
        fn(j, lineno);
    }
}

template <class T> std::vector<T> parse_jsonl(std::istream& in)
{
    std::vector<T> out;
    for_each_jsonl(in, [&](const Json& j, std::size_t line) { out.push_back(decode<T>(j, line)); });
    return out;
}

template <class T> std::vector<T> read_jsonl_file(const std::string& path)
{
    std::istringstream in(read_text_file(path));
    try {
        return parse_jsonl<T>(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.field(), e.detail() + " (" + path + ")");
    }
}

} // namespace fleetrel
