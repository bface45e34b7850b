#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hpcserve {

// POSIX sh quoting shared by every renderer.
//
// shell_quote: bare when every character is in the safe set, otherwise
// single-quoted. A `--flag=value` word keeps the flag bare and quotes only
// the value, so `--opt='{"a": 1}'` reads the way people write it.
std::string shell_quote(std::string_view word);

// Double-quoted form that leaves ${NAME} and $NAME expansion intact while
// escaping the other characters special inside double quotes.
std::string double_quote(std::string_view word);

// Bare when the word only holds safe characters and ${NAME} references,
// otherwise double_quote().
std::string quote_expanding(std::string_view word);

bool is_env_name(std::string_view name);

// Expands ${NAME} and $NAME using `lookup`; unknown names expand to "".
std::string expand_env(std::string_view text,
                       const std::function<std::optional<std::string>(const std::string&)>& lookup);

// Joins lines into one command with ` \` continuations and two-space
// indentation after the first line.
std::string join_continued(const std::vector<std::string>& lines);

}  // namespace hpcserve
