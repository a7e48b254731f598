// dsl.hpp
// Line-oriented protocol script language (.qp files). One statement per
// line, `#` comments, key=value arguments:
//
//   mode NAME (vacuum | spin F=NUM N=NUM | light n=NUM | coherent x=NUM p=NUM)
//   squeeze NAME NAME r=NUM
//   qnd NAME NAME k=NUM
//   phase NAME theta=NUM
//   rotate NAME (x|y|z) angle=NUM
//   measure (x|p|angle=NUM) NAME -> NAME
//   displace NAME (x|p) { gain=NUM from=NAME } [const=NUM]
//
// parse() never throws on malformed input: every failure is a positioned
// diagnostic. A clean parse implies the script compiles and executes
// without engine-level errors (validation is complete). Measurement is
// destructive, so using a mode after measuring it is a compile error.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spinport/protocols.hpp"
#include "spinport/steps.hpp"

namespace spinport::dsl {

enum class DiagCode {
    SyntaxError,
    BadNumber,
    BadArgument,
    UndeclaredMode,
    DuplicateMode,
    SelfInteraction,
    UseAfterMeasure,
    ForwardOutcomeRef,
    DuplicateOutcome,
    RotateAxis,
    UnknownBuiltin,
};

std::string_view diag_code_name(DiagCode code);

struct Diagnostic {
    DiagCode code = DiagCode::SyntaxError;
    int line = 0;  // 1-based
    int col = 0;   // 1-based
    std::string message;
};

struct SourcePos {
    int line = 0;
    int col = 0;
    bool operator==(const SourcePos&) const { return true; }  // not structural
};

struct DeclVacuum {
    bool operator==(const DeclVacuum&) const = default;
};
struct DeclSpin {
    double spin_f = 0.0;
    double atom_count = 0.0;
    bool operator==(const DeclSpin&) const = default;
};
struct DeclLight {
    double photon_count = 0.0;
    bool operator==(const DeclLight&) const = default;
};
struct DeclCoherent {
    double x = 0.0, p = 0.0;
    bool operator==(const DeclCoherent&) const = default;
};

struct AstDecl {
    SourcePos pos;
    std::string name;
    std::variant<DeclVacuum, DeclSpin, DeclLight, DeclCoherent> kind;
    bool operator==(const AstDecl& other) const {
        return name == other.name && kind == other.kind;
    }
};

struct AstSqueeze {
    SourcePos pos;
    SourcePos pos_a, pos_b;
    std::string mode_a, mode_b;
    double r = 0.0;
    bool operator==(const AstSqueeze& o) const {
        return mode_a == o.mode_a && mode_b == o.mode_b && r == o.r;
    }
};
struct AstQnd {
    SourcePos pos;
    SourcePos pos_a, pos_b;
    std::string mode_a, mode_b;
    double kappa = 0.0;
    bool operator==(const AstQnd& o) const {
        return mode_a == o.mode_a && mode_b == o.mode_b && kappa == o.kappa;
    }
};
struct AstPhase {
    SourcePos pos;
    SourcePos mode_pos;
    std::string mode;
    double theta = 0.0;
    bool operator==(const AstPhase& o) const {
        return mode == o.mode && theta == o.theta;
    }
};
struct AstRotate {
    SourcePos pos;
    SourcePos mode_pos;
    std::string mode;
    char axis = 'x';
    double angle = 0.0;
    bool operator==(const AstRotate& o) const {
        return mode == o.mode && axis == o.axis && angle == o.angle;
    }
};
struct AstMeasure {
    SourcePos pos;
    SourcePos mode_pos;
    bool explicit_angle = false;  // true for angle=NUM form
    double angle = 0.0;           // 0 for x, pi/2 for p
    std::string mode;
    std::string outcome;
    bool operator==(const AstMeasure& o) const {
        return explicit_angle == o.explicit_angle && angle == o.angle &&
               mode == o.mode && outcome == o.outcome;
    }
};
struct AstDisplaceTerm {
    double gain = 0.0;
    std::string from;
    SourcePos from_pos;
    bool operator==(const AstDisplaceTerm& o) const {
        return gain == o.gain && from == o.from;
    }
};
struct AstDisplace {
    SourcePos pos;
    SourcePos mode_pos;
    std::string mode;
    Quadrature quad = Quadrature::X;
    std::vector<AstDisplaceTerm> terms;
    std::optional<double> constant;
    bool operator==(const AstDisplace& o) const {
        return mode == o.mode && quad == o.quad && terms == o.terms &&
               constant == o.constant;
    }
};

using AstStatement =
    std::variant<AstDecl, AstSqueeze, AstQnd, AstPhase, AstRotate, AstMeasure,
                 AstDisplace>;

struct ProtocolAst {
    std::vector<AstStatement> statements;
    std::string name;         // metadata, not part of structural equality
    std::string description;
    bool operator==(const ProtocolAst& other) const {
        return statements == other.statements;
    }
};

struct ParseResult {
    std::optional<ProtocolAst> ast;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return ast.has_value() && diagnostics.empty(); }
};

/// Parse and fully validate. Never throws on any byte input.
ParseResult parse(std::string_view text);

/// Canonical text form; parse(print(ast)) is structurally equal to ast.
std::string print(const ProtocolAst& ast);

/// Valid AST in, engine step list out.
ProtocolDef compile(const ProtocolAst& ast);

/// Built-in protocol scripts with the config substituted. Unknown names
/// yield an UnknownBuiltin diagnostic.
ParseResult builtin(std::string_view name, const protocols::ProtocolConfig& cfg = {});
std::string builtin_script(std::string_view name, const protocols::ProtocolConfig& cfg);
std::vector<std::string> builtin_names();

}  // namespace spinport::dsl
