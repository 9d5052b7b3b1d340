#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "condreach/model.hpp"

namespace condreach {

/*
 * Line-oriented explicit model format. `#` starts a comment, tokens are
 * whitespace-separated:
 *
 *   @type mdp
 *   @states <N>
 *   @initial <i>
 *   @label <name>: <i> <i> ...          (repeatable)
 *   @color <i> <colorId>                (optional, repeatable)
 *   <state> <actionName> : <succ>=<prob> <succ>=<prob> ...
 *
 * Probabilities are "num/den" or decimal literals, parsed exactly. Action
 * order within a state is file order. The parsed model is validated.
 */

struct ParseError : std::runtime_error {
    std::size_t line;
    ParseError(std::size_t line, const std::string& message);
};

Mdp parse_model(std::string_view text);

Mdp load_model(const std::string& path);

std::string serialize_model(const Mdp& m);

}  // namespace condreach
