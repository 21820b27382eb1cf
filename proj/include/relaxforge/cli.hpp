#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relaxforge {

// args excludes the program name. Exit 0 on accept, 1 on reject, 2 on usage or input errors.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relaxforge
