#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "powergame/game.hpp"
#include "powergame/power.hpp"

namespace pg {

inline constexpr int kGamespecVersion = 1;

struct Diagnostic {
    int line = 0;    // 1-based, 0 when the problem has no single location
    int column = 0;  // 1-based byte column
    std::string message;
    std::string token;
    std::string to_string() const;
};

struct GameSpecDocument {
    int version = kGamespecVersion;
    Game game;
    PowerParams power;
};

struct ParseResult {
    std::optional<GameSpecDocument> doc;  // set only when diagnostics is empty
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return doc.has_value(); }
};

// Syntax, name resolution and validate_game; a game is returned only when all three pass.
ParseResult parse_gamespec(std::string_view text);

// throws Error(parse) with the joined diagnostics
GameSpecDocument parse_gamespec_or_throw(std::string_view text);

// Canonical text: states, actions and goals in id order, rows robot-major.
std::string serialize_game(const Game& game, const PowerParams& power = {});
std::string serialize_document(const GameSpecDocument& doc);

// structural equality; `why` receives the first difference
bool game_equal(const Game& a, const Game& b, std::string* why = nullptr);

// shortest decimal that parses back to the same double ("inf", "-inf", "nan" for specials)
std::string format_double(double x);
std::optional<double> parse_double(std::string_view s);

// names must be non-empty printable ASCII without whitespace, '#', '=' or ','
bool valid_name(std::string_view s);

}  // namespace pg
