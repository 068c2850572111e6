#include "rampsim/mutation.hpp"

#include <cmath>
#include <stdexcept>

namespace rampsim::mutation {

namespace {

double round5(double v) {
    return std::llround(v * 1e5) / 1e5;
}

/// Shared walk state for E bookkeeping across both mutators.
struct ExtrusionWalk {
    double source_e = 0.0;   // E position as the original file sees it
    double written_e = 0.0;  // E position as the mutated file sees it
    double x = 0.0, y = 0.0;

    void on_set_position(const gcode::Command& cmd) {
        if (cmd.has('E')) {
            source_e = cmd.value('E');
            written_e = source_e;
        }
        if (cmd.has('X'))
            x = cmd.value('X');
        if (cmd.has('Y'))
            y = cmd.value('Y');
    }

    void track_motion(const gcode::Command& cmd) {
        if (cmd.has('X'))
            x = cmd.absolute_motion ? cmd.value('X') : x + cmd.value('X');
        if (cmd.has('Y'))
            y = cmd.absolute_motion ? cmd.value('Y') : y + cmd.value('Y');
    }

    double delta_e(const gcode::Command& cmd) const {
        if (!cmd.has('E'))
            return 0.0;
        return cmd.absolute_e ? cmd.value('E') - source_e : cmd.value('E');
    }

    /// Rewrites the E word of a move to carry `new_delta`, keeping the
    /// mutated cumulative track consistent.
    void write_delta(gcode::Command& cmd, double new_delta) {
        if (cmd.absolute_e) {
            double word = round5(written_e + new_delta);
            cmd.params['E'] = word;
            written_e = word;
        } else {
            double word = round5(new_delta);
            cmd.params['E'] = word;
            written_e += word;
        }
    }
};

}  // namespace

void MutationSpec::validate() const {
    if (kind == MutationKind::Reduction) {
        if (!(factor > 0.0) || factor > 1.0)
            throw std::invalid_argument("reduction factor must be in (0, 1]");
    } else {
        if (n_moves < 1)
            throw std::invalid_argument("relocation cadence must be at least 1");
    }
}

gcode::Program reduce_extrusion(const gcode::Program& program, double factor) {
    MutationSpec spec{MutationKind::Reduction, factor};
    spec.validate();

    gcode::Program out = program;
    ExtrusionWalk walk;
    for (gcode::Command& cmd : out.commands) {
        if (cmd.kind == gcode::CommandKind::SetPosition) {
            walk.on_set_position(cmd);
            continue;
        }
        if (cmd.kind != gcode::CommandKind::Move)
            continue;
        walk.track_motion(cmd);
        if (!cmd.has('E'))
            continue;
        double de = walk.delta_e(cmd);
        walk.source_e += de;
        walk.write_delta(cmd, de > 0 ? de * factor : de);
    }
    return out;
}

gcode::Program relocate(const gcode::Program& program, int n_moves, double offset_x_mm,
                        double offset_y_mm, const PrinterProfile& profile) {
    MutationSpec spec{MutationKind::Relocation, 1.0, n_moves, offset_x_mm, offset_y_mm};
    spec.validate();

    gcode::Program out;
    out.motion_mode = program.motion_mode;
    out.extrusion_mode = program.extrusion_mode;
    out.diagnostics = program.diagnostics;

    ExtrusionWalk walk;
    int extruding_seen = 0;

    auto reflect = [&](double pos, double offset, double limit) {
        double target = pos + offset;
        if (target < 0.0 || target > limit)
            target = pos - offset;
        return target;
    };

    for (const gcode::Command& src : program.commands) {
        gcode::Command cmd = src;
        if (cmd.kind == gcode::CommandKind::SetPosition) {
            walk.on_set_position(cmd);
            out.commands.push_back(std::move(cmd));
            continue;
        }
        if (cmd.kind != gcode::CommandKind::Move) {
            out.commands.push_back(std::move(cmd));
            continue;
        }

        walk.track_motion(cmd);
        double de = walk.delta_e(cmd);
        walk.source_e += de;
        if (de <= 0) {
            if (cmd.has('E'))
                walk.write_delta(cmd, de);
            out.commands.push_back(std::move(cmd));
            continue;
        }

        ++extruding_seen;
        if (extruding_seen % n_moves != 0) {
            walk.write_delta(cmd, de);
            out.commands.push_back(std::move(cmd));
            continue;
        }

        // This move travels dry; its filament reappears offset to the side.
        cmd.params.erase('E');
        bool absolute = cmd.absolute_motion;
        out.commands.push_back(cmd);

        double tx = reflect(walk.x, offset_x_mm, profile.build_volume_mm[0]);
        double ty = reflect(walk.y, offset_y_mm, profile.build_volume_mm[1]);

        gcode::Command go;
        go.kind = gcode::CommandKind::Move;
        go.source_line = src.source_line;
        go.absolute_motion = cmd.absolute_motion;
        go.absolute_e = cmd.absolute_e;
        if (absolute) {
            go.params['X'] = round5(tx);
            go.params['Y'] = round5(ty);
        } else {
            go.params['X'] = round5(tx - walk.x);
            go.params['Y'] = round5(ty - walk.y);
        }

        gcode::Command blob;
        blob.kind = gcode::CommandKind::Move;
        blob.source_line = src.source_line;
        blob.absolute_motion = cmd.absolute_motion;
        blob.absolute_e = cmd.absolute_e;
        walk.write_delta(blob, de);

        gcode::Command back;
        back.kind = gcode::CommandKind::Move;
        back.source_line = src.source_line;
        back.absolute_motion = cmd.absolute_motion;
        back.absolute_e = cmd.absolute_e;
        if (absolute) {
            back.params['X'] = round5(walk.x);
            back.params['Y'] = round5(walk.y);
        } else {
            back.params['X'] = round5(walk.x - tx);
            back.params['Y'] = round5(walk.y - ty);
        }

        out.commands.push_back(std::move(go));
        out.commands.push_back(std::move(blob));
        out.commands.push_back(std::move(back));
    }
    return out;
}

gcode::Program apply(const gcode::Program& program, const MutationSpec& spec,
                     const PrinterProfile& profile) {
    spec.validate();
    if (spec.kind == MutationKind::Reduction)
        return reduce_extrusion(program, spec.factor);
    return relocate(program, spec.n_moves, spec.offset_x_mm, spec.offset_y_mm, profile);
}

std::vector<std::pair<int, MutationSpec>> standard_suite() {
    std::vector<std::pair<int, MutationSpec>> cases;
    int id = 1;
    for (double factor : {0.5, 0.85, 0.9, 0.98})
        cases.push_back({id++, MutationSpec{MutationKind::Reduction, factor}});
    for (int n : {5, 10, 20, 100}) {
        MutationSpec spec;
        spec.kind = MutationKind::Relocation;
        spec.n_moves = n;
        cases.push_back({id++, spec});
    }
    return cases;
}

double total_extrusion_mm(const gcode::Program& program) {
    ExtrusionWalk walk;
    double total = 0.0;
    for (const gcode::Command& cmd : program.commands) {
        if (cmd.kind == gcode::CommandKind::SetPosition) {
            walk.on_set_position(cmd);
            continue;
        }
        if (cmd.kind != gcode::CommandKind::Move)
            continue;
        walk.track_motion(cmd);
        double de = walk.delta_e(cmd);
        walk.source_e += de;
        if (de > 0)
            total += de;
    }
    return total;
}

}  // namespace rampsim::mutation
