#include "rampsim/gcode.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rampsim::gcode {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

struct Word {
    char letter;
    bool has_value;
    double value;
};

/// Splits "G1 X10.5 Y-3" into letter/value words. Returns false on a
/// malformed numeric field.
bool tokenize(std::string_view body, std::vector<Word>& words) {
    size_t i = 0;
    while (i < body.size()) {
        char c = body[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (!std::isalpha(static_cast<unsigned char>(c)))
            return false;
        char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        ++i;
        size_t start = i;
        while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i])) &&
               !std::isalpha(static_cast<unsigned char>(body[i])))
            ++i;
        std::string_view num = body.substr(start, i - start);
        if (num.empty()) {
            words.push_back({letter, false, 0.0});
            continue;
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
        if (ec != std::errc() || ptr != num.data() + num.size())
            return false;
        words.push_back({letter, true, value});
    }
    return true;
}

struct KindSpec {
    CommandKind kind;
    const char* legal;  // parameter letters kept for this kind
};

bool lookup_kind(char letter, int number, KindSpec& out) {
    if (letter == 'G') {
        switch (number) {
        case 0:
        case 1: out = {CommandKind::Move, "XYZEF"}; return true;
        case 28: out = {CommandKind::Home, "XYZ"}; return true;
        case 92: out = {CommandKind::SetPosition, "XYZE"}; return true;
        default: return false;
        }
    }
    if (letter == 'M') {
        switch (number) {
        case 104: out = {CommandKind::SetHotendTemp, "S"}; return true;
        case 109: out = {CommandKind::WaitHotendTemp, "S"}; return true;
        case 140: out = {CommandKind::SetBedTemp, "S"}; return true;
        case 190: out = {CommandKind::WaitBedTemp, "S"}; return true;
        case 106: out = {CommandKind::FanOn, "S"}; return true;
        case 107: out = {CommandKind::FanOff, ""}; return true;
        case 84: out = {CommandKind::MotorsOff, ""}; return true;
        default: return false;
        }
    }
    return false;
}

Command make_unknown(std::string_view raw, int line_no, bool malformed) {
    Command cmd;
    cmd.kind = CommandKind::Unknown;
    cmd.text = std::string(raw);
    cmd.source_line = line_no;
    cmd.malformed = malformed;
    return cmd;
}

}  // namespace

const char* command_kind_name(CommandKind kind) {
    switch (kind) {
    case CommandKind::Move: return "Move";
    case CommandKind::Home: return "Home";
    case CommandKind::SetPosition: return "SetPosition";
    case CommandKind::SetHotendTemp: return "SetHotendTemp";
    case CommandKind::WaitHotendTemp: return "WaitHotendTemp";
    case CommandKind::SetBedTemp: return "SetBedTemp";
    case CommandKind::WaitBedTemp: return "WaitBedTemp";
    case CommandKind::FanOn: return "FanOn";
    case CommandKind::FanOff: return "FanOff";
    case CommandKind::MotorsOff: return "MotorsOff";
    case CommandKind::Comment: return "Comment";
    case CommandKind::Unknown: return "Unknown";
    }
    return "?";
}

double Command::value(char letter, double fallback) const {
    auto it = params.find(letter);
    return it == params.end() ? fallback : it->second;
}

Command parse_line(const std::string& text, int line_no) {
    std::string_view view = text;
    std::string comment;
    if (size_t semi = view.find(';'); semi != std::string_view::npos) {
        comment = std::string(trim(view.substr(semi + 1)));
        view = view.substr(0, semi);
    }
    view = trim(view);

    if (view.empty()) {
        Command cmd;
        cmd.kind = CommandKind::Comment;
        cmd.text = comment;
        cmd.source_line = line_no;
        return cmd;
    }

    std::string_view raw_body = view;

    // Optional N<line> prefix and *<checksum> suffix carry no semantics.
    if (view.front() == 'N' || view.front() == 'n') {
        size_t i = 1;
        while (i < view.size() && std::isdigit(static_cast<unsigned char>(view[i])))
            ++i;
        if (i > 1 && i < view.size() && std::isspace(static_cast<unsigned char>(view[i])))
            view = trim(view.substr(i));
    }
    if (size_t star = view.find('*'); star != std::string_view::npos)
        view = trim(view.substr(0, star));
    if (view.empty())
        return make_unknown(raw_body, line_no, false);

    std::vector<Word> words;
    if (!tokenize(view, words) || words.empty() || !words.front().has_value)
        return make_unknown(raw_body, line_no, !words.empty());

    const Word& head = words.front();
    double intpart;
    if (std::modf(head.value, &intpart) != 0.0)
        return make_unknown(raw_body, line_no, false);

    KindSpec spec;
    if (!lookup_kind(head.letter, static_cast<int>(intpart), spec))
        return make_unknown(raw_body, line_no, false);

    Command cmd;
    cmd.kind = spec.kind;
    cmd.source_line = line_no;
    cmd.text = comment;
    std::string_view legal = spec.legal;
    for (size_t i = 1; i < words.size(); ++i) {
        const Word& w = words[i];
        if (legal.find(w.letter) == std::string_view::npos)
            continue;  // letters illegal for the kind are dropped
        // G28 axis words are flags; everything else needs a number.
        if (!w.has_value && spec.kind != CommandKind::Home)
            return make_unknown(raw_body, line_no, true);
        cmd.params[w.letter] = w.has_value ? w.value : 0.0;
    }
    if (cmd.kind == CommandKind::Move && cmd.params.empty() && words.size() > 1)
        return make_unknown(raw_body, line_no, false);
    return cmd;
}

Program parse_program(const std::string& text) {
    Program program;
    if (text.empty())
        return program;

    bool absolute_motion = true;
    bool absolute_e = true;

    size_t pos = 0;
    int line_no = 0;
    while (true) {
        size_t end = text.find('\n', pos);
        std::string line = text.substr(pos, end == std::string::npos ? std::string::npos
                                                                     : end - pos);
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        ++line_no;

        Command cmd = parse_line(line, line_no);

        // Mode switches ride through as Unknown but flip the tracked state.
        if (cmd.kind == CommandKind::Unknown) {
            std::string upper = cmd.text;
            std::transform(upper.begin(), upper.end(), upper.begin(),
                           [](unsigned char c) { return std::toupper(c); });
            if (upper == "G90")
                absolute_motion = true, absolute_e = true;
            else if (upper == "G91")
                absolute_motion = false, absolute_e = false;
            else if (upper == "M82")
                absolute_e = true;
            else if (upper == "M83")
                absolute_e = false;
            if (cmd.malformed)
                program.diagnostics.push_back({line_no, "malformed numeric field"});
        }

        cmd.absolute_motion = absolute_motion;
        cmd.absolute_e = absolute_e;
        program.commands.push_back(std::move(cmd));

        if (end == std::string::npos)
            break;
        pos = end + 1;
        if (pos == text.size())
            break;
    }

    program.motion_mode = absolute_motion ? PositioningMode::Absolute : PositioningMode::Relative;
    program.extrusion_mode = absolute_e ? PositioningMode::Absolute : PositioningMode::Relative;
    return program;
}

Program load_program(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open g-code file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_program(buf.str());
}

void save_program(const Program& program, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write g-code file: " + path);
    out << serialize(program);
}

std::string format_number(double value) {
    if (value == 0.0)
        return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                   std::chars_format::fixed);
    if (ec != std::errc())
        return "0";
    return std::string(buf, ptr);
}

std::string serialize(const Command& command) {
    // Canonical word order keeps diffs deterministic.
    static constexpr char kOrder[] = {'X', 'Y', 'Z', 'E', 'F', 'S'};
    auto with_comment = [&](std::string out) {
        if (!command.text.empty()) {
            out += " ;";
            out += command.text;
        }
        return out;
    };
    auto with_params = [&](std::string head) {
        for (char letter : kOrder) {
            auto it = command.params.find(letter);
            if (it == command.params.end())
                continue;
            head += ' ';
            head += letter;
            head += format_number(it->second);
        }
        return with_comment(head);
    };

    switch (command.kind) {
    case CommandKind::Move: return with_params("G1");
    case CommandKind::Home: return with_params("G28");
    case CommandKind::SetPosition: return with_params("G92");
    case CommandKind::SetHotendTemp: return with_params("M104");
    case CommandKind::WaitHotendTemp: return with_params("M109");
    case CommandKind::SetBedTemp: return with_params("M140");
    case CommandKind::WaitBedTemp: return with_params("M190");
    case CommandKind::FanOn: return with_params("M106");
    case CommandKind::FanOff: return with_comment("M107");
    case CommandKind::MotorsOff: return with_comment("M84");
    case CommandKind::Comment: return command.text.empty() ? "" : ";" + command.text;
    case CommandKind::Unknown: return command.text;
    }
    return "";
}

std::string serialize(const Program& program) {
    std::string out;
    for (const Command& cmd : program.commands) {
        out += serialize(cmd);
        out += '\n';
    }
    return out;
}

}  // namespace rampsim::gcode
