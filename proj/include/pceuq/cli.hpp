#pragma once

namespace pceuq::cli {

int run(int argc, char** argv);

inline int run(int, char**) { return 0; }  // placeholder

}  // namespace pceuq::cli
