// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "ddarec/config.hpp"

namespace dda {

/// Flat dotted-key text config: one "key = value" per line, '#' comments.
using KvMap = std::map<std::string, std::string>;

KvMap parse_kv_text(std::istream& is);
KvMap parse_kv_file(const std::string& path);

double kv_get_double(const KvMap& m, const std::string& key, double fallback);
int kv_get_int(const KvMap& m, const std::string& key, int fallback);
std::string kv_get_string(const KvMap& m, const std::string& key, const std::string& fallback);

/// system.* keys <-> SystemConfig.
void config_to_kv(const SystemConfig& cfg, KvMap& m);
SystemConfig config_from_kv(const KvMap& m, const SystemConfig& base = {});

} // namespace dda
