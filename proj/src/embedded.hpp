#pragma once

#include <string_view>
#include <vector>

namespace ocep::kb::detail {

struct EmbeddedFile {
  std::string_view name;
  std::string_view text;
};

const std::vector<EmbeddedFile>& embedded_files();

}  // namespace ocep::kb::detail
