#pragma once

#include <map>
#include <string>

// Files under assets/ compiled into the library.
namespace twinworld::assets {

const std::map<std::string, std::string>& all();

// Throws ConfigError when the asset does not exist.
const std::string& get(const std::string& path);

}  // namespace twinworld::assets
