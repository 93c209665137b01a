// SPDX-License-Identifier: Apache-2.0

#include "aris/config.hpp"
#include "aris/types.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>

namespace aris
{
    namespace
    {
        [[noreturn]] void fail(int line, const std::string &what)
        {
            throw ConfigError("line " + std::to_string(line) + ": " + what);
        }

        class ValueParser
        {
        public:
            ValueParser(const std::string &text, int line) : s_(text), line_(line) {}

            ConfigValue parse_all()
            {
                ConfigValue v = parse_value();
                skip_ws();
                if (pos_ != s_.size())
                    fail(line_, "unexpected trailing text '" + s_.substr(pos_) + "'");
                return v;
            }

        private:
            void skip_ws()
            {
                while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
                    ++pos_;
            }

            ConfigValue parse_value()
            {
                skip_ws();
                if (pos_ >= s_.size())
                    fail(line_, "missing value");
                ConfigValue v;
                v.line = line_;
                const char c = s_[pos_];
                if (c == '[')
                {
                    ++pos_;
                    v.kind = ConfigValue::Kind::list;
                    skip_ws();
                    if (pos_ < s_.size() && s_[pos_] == ']')
                    {
                        ++pos_;
                        return v;
                    }
                    while (true)
                    {
                        v.items.push_back(parse_value());
                        skip_ws();
                        if (pos_ >= s_.size())
                            fail(line_, "unterminated list");
                        if (s_[pos_] == ',')
                        {
                            ++pos_;
                            continue;
                        }
                        if (s_[pos_] == ']')
                        {
                            ++pos_;
                            return v;
                        }
                        fail(line_, "expected ',' or ']' in list");
                    }
                }
                if (c == '"')
                {
                    const auto end = s_.find('"', pos_ + 1);
                    if (end == std::string::npos)
                        fail(line_, "unterminated string");
                    v.kind = ConfigValue::Kind::text;
                    v.text = s_.substr(pos_ + 1, end - pos_ - 1);
                    pos_ = end + 1;
                    return v;
                }
                // bare word: true/false or number with optional unit
                std::size_t end = pos_;
                while (end < s_.size() && s_[end] != ',' && s_[end] != ']')
                    ++end;
                std::string token = s_.substr(pos_, end - pos_);
                while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back())))
                    token.pop_back();
                pos_ = end;
                if (token == "true" || token == "false")
                {
                    v.kind = ConfigValue::Kind::boolean;
                    v.boolean = token == "true";
                    return v;
                }
                char *num_end = nullptr;
                v.number = std::strtod(token.c_str(), &num_end);
                if (num_end == token.c_str())
                    fail(line_, "cannot parse value '" + token + "'");
                std::string unit(num_end);
                const auto first = unit.find_first_not_of(" \t");
                unit = first == std::string::npos ? std::string() : unit.substr(first);
                if (unit.find_first_of(" \t") != std::string::npos)
                    fail(line_, "malformed unit '" + unit + "'");
                v.kind = ConfigValue::Kind::number;
                v.unit = unit;
                return v;
            }

            const std::string &s_;
            int line_;
            std::size_t pos_ = 0;
        };

        std::string strip_comment(const std::string &line)
        {
            bool in_string = false;
            for (std::size_t i = 0; i < line.size(); ++i)
            {
                if (line[i] == '"')
                    in_string = !in_string;
                else if (line[i] == '#' && !in_string)
                    return line.substr(0, i);
            }
            return line;
        }

        std::string trim(const std::string &s)
        {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos)
                return {};
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        }
    }

    ConfigDocument ConfigDocument::parse(std::istream &in)
    {
        ConfigDocument doc;
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw))
        {
            ++line_no;
            const std::string line = trim(strip_comment(raw));
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                fail(line_no, "expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                fail(line_no, "empty key");
            for (char c : key)
            {
                if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
                    fail(line_no, "invalid character in key '" + key + "'");
            }
            if (doc.entries_.count(key))
                fail(line_no, "duplicate key '" + key + "'");
            doc.entries_[key] = ValueParser(value, line_no).parse_all();
        }
        return doc;
    }

    ConfigDocument ConfigDocument::parse_file(const std::string &path)
    {
        std::ifstream f(path);
        if (!f)
            throw ConfigError("cannot open config file '" + path + "'");
        return parse(f);
    }

    const ConfigValue &ConfigDocument::at(const std::string &key) const
    {
        const auto it = entries_.find(key);
        if (it == entries_.end())
            throw ConfigError("missing key '" + key + "'");
        return it->second;
    }
}
