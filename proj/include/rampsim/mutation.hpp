#pragma once

#include <string>
#include <vector>

#include "rampsim/gcode.hpp"
#include "rampsim/profile.hpp"

namespace rampsim::mutation {

enum class MutationKind { Reduction, Relocation };

/// One g-code level attack: scale every extrusion by `factor`, or strip the
/// filament out of every n-th extruding move and deposit it at a fixed XY
/// offset instead.
struct MutationSpec {
    MutationKind kind = MutationKind::Reduction;
    double factor = 1.0;   // Reduction: 0 < factor <= 1
    int n_moves = 1;       // Relocation: every n-th extruding move
    double offset_x_mm = 5.0;
    double offset_y_mm = 5.0;

    void validate() const;
};

/// Multiplies the filament delta of every extruding move by `factor`,
/// rewriting absolute E words to the new cumulative values. Motion words are
/// untouched. E words are rounded to 5 decimals (below one extruder step).
gcode::Program reduce_extrusion(const gcode::Program& program, double factor);

/// Converts every n-th extruding move into a travel move and inserts a
/// relocation group after it: travel to position + offset, extrude the
/// removed filament there, travel back. Offsets that leave the build volume
/// are reflected inward. Total extrusion is conserved exactly.
gcode::Program relocate(const gcode::Program& program, int n_moves, double offset_x_mm,
                        double offset_y_mm,
                        const PrinterProfile& profile = PrinterProfile{});

gcode::Program apply(const gcode::Program& program, const MutationSpec& spec,
                     const PrinterProfile& profile = PrinterProfile{});

/// The standard eight-case severity grid: reductions 0.5/0.85/0.9/0.98 and
/// relocations every 5/10/20/100 moves.
std::vector<std::pair<int, MutationSpec>> standard_suite();

/// Sum of positive filament deltas over the program (mm).
double total_extrusion_mm(const gcode::Program& program);

}  // namespace rampsim::mutation
