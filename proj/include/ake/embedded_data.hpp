#pragma once

#include <string_view>

// Contents of the files under data/, compiled into the library.
namespace ake::embedded {

std::string_view stopwords();
std::string_view signals();
std::string_view subcategories();
std::string_view gazetteer();
std::string_view pos_lexicon();

}  // namespace ake::embedded
