#include "twinworld/assets.hpp"

#include "twinworld/errors.hpp"

namespace twinworld::assets {

const std::string& get(const std::string& path) {
  const auto& table = all();
  auto it = table.find(path);
  if (it == table.end()) throw ConfigError("unknown embedded asset: " + path);
  return it->second;
}

}  // namespace twinworld::assets
