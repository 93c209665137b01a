// SPDX-License-Identifier: Apache-2.0
//
// Flat "key = value" configuration documents.
//
//   # comment
//   num_users = 8
//   p_max = 26 dBm            # scalar with optional unit suffix
//   rates = [10e6, 9.4e6]     # list
//   users.positions = [[1, 2], [3, 4]]
//   channel.departure_uses_x = false
//   sar.file = "model.txt"

#ifndef ARIS_CONFIG_HPP
#define ARIS_CONFIG_HPP

#include <istream>
#include <map>
#include <string>
#include <vector>

namespace aris
{
    struct ConfigValue
    {
        enum class Kind
        {
            number,
            boolean,
            text,
            list
        };

        Kind kind = Kind::number;
        double number = 0.0;
        std::string unit; // suffix after a number, e.g. "dBm"; empty if none
        bool boolean = false;
        std::string text;
        std::vector<ConfigValue> items;
        int line = 0;
    };

    class ConfigDocument
    {
    public:
        // Throws ConfigError("line N: ...") on malformed input or duplicate keys.
        static ConfigDocument parse(std::istream &in);
        static ConfigDocument parse_file(const std::string &path);

        bool has(const std::string &key) const { return entries_.count(key) != 0; }
        const ConfigValue &at(const std::string &key) const;
        const std::map<std::string, ConfigValue> &entries() const { return entries_; }

    private:
        std::map<std::string, ConfigValue> entries_;
    };
}

#endif
