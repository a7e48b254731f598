#include "spinport/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "spinport/format.hpp"
#include "spinport/spin_light.hpp"

namespace spinport::dsl {

namespace {

constexpr double kHalfPi = M_PI / 2.0;

struct Token {
    std::string text;
    int col = 0;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '#') break;
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        const std::size_t begin = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
               line[i] != '#')
            ++i;
        tokens.push_back(
            {std::string(line.substr(begin, i - begin)), static_cast<int>(begin) + 1});
    }
    return tokens;
}

bool valid_name(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ParseResult run() {
        ProtocolAst ast;
        int line_no = 0;
        std::size_t pos = 0;
        while (pos <= text_.size()) {
            const std::size_t nl = text_.find('\n', pos);
            std::string_view line = text_.substr(
                pos, nl == std::string_view::npos ? text_.size() - pos : nl - pos);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            ++line_no;
            parse_line(line, line_no, ast);
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }
        validate(ast);
        std::stable_sort(diags_.begin(), diags_.end(),
                         [](const Diagnostic& a, const Diagnostic& b) {
                             return a.line != b.line ? a.line < b.line : a.col < b.col;
                         });
        ParseResult result;
        result.diagnostics = std::move(diags_);
        if (result.diagnostics.empty()) result.ast = std::move(ast);
        return result;
    }

private:
    std::string_view text_;
    std::vector<Diagnostic> diags_;

    void error(DiagCode code, int line, int col, std::string message) {
        diags_.push_back({code, line, col, std::move(message)});
    }

    std::optional<double> parse_number(std::string_view s, int line, int col) {
        const std::string owned(s);
        char* end = nullptr;
        const double value = std::strtod(owned.c_str(), &end);
        if (end != owned.c_str() + owned.size() || owned.empty()) {
            error(DiagCode::BadNumber, line, col, "expected a number, got '" + owned + "'");
            return std::nullopt;
        }
        if (!std::isfinite(value)) {
            error(DiagCode::BadNumber, line, col, "number must be finite");
            return std::nullopt;
        }
        return value;
    }

    // key=value argument; returns the value part or nullopt with a diagnostic.
    std::optional<double> expect_kv(const std::vector<Token>& tokens, std::size_t index,
                                    std::string_view key, int line) {
        if (index >= tokens.size()) {
            error(DiagCode::SyntaxError, line,
                  tokens.empty() ? 1 : tokens.back().col + static_cast<int>(tokens.back().text.size()),
                  "expected " + std::string(key) + "=NUM");
            return std::nullopt;
        }
        const Token& tok = tokens[index];
        const std::string prefix = std::string(key) + "=";
        if (tok.text.rfind(prefix, 0) != 0) {
            error(DiagCode::SyntaxError, line, tok.col,
                  "expected " + prefix + "NUM, got '" + tok.text + "'");
            return std::nullopt;
        }
        return parse_number(std::string_view(tok.text).substr(prefix.size()), line,
                            tok.col + static_cast<int>(prefix.size()));
    }

    std::optional<std::string> expect_name(const std::vector<Token>& tokens,
                                           std::size_t index, int line,
                                           const char* what) {
        if (index >= tokens.size()) {
            error(DiagCode::SyntaxError, line,
                  tokens.empty() ? 1 : tokens.back().col + static_cast<int>(tokens.back().text.size()),
                  std::string("expected ") + what);
            return std::nullopt;
        }
        if (!valid_name(tokens[index].text)) {
            error(DiagCode::SyntaxError, line, tokens[index].col,
                  std::string("invalid ") + what + " '" + tokens[index].text + "'");
            return std::nullopt;
        }
        return tokens[index].text;
    }

    void expect_end(const std::vector<Token>& tokens, std::size_t index, int line) {
        if (index < tokens.size())
            error(DiagCode::SyntaxError, line, tokens[index].col,
                  "unexpected trailing token '" + tokens[index].text + "'");
    }

    void parse_line(std::string_view line, int line_no, ProtocolAst& ast) {
        const std::vector<Token> tokens = tokenize(line);
        if (tokens.empty()) return;
        const std::string& head = tokens[0].text;

        if (head == "mode") {
            parse_mode(tokens, line_no, ast);
        } else if (head == "squeeze") {
            auto a = expect_name(tokens, 1, line_no, "mode name");
            auto b = expect_name(tokens, 2, line_no, "mode name");
            auto r = expect_kv(tokens, 3, "r", line_no);
            expect_end(tokens, 4, line_no);
            if (a && b && r)
                ast.statements.push_back(AstSqueeze{{line_no, tokens[0].col},
                                                    {line_no, tokens[1].col},
                                                    {line_no, tokens[2].col},
                                                    *a, *b, *r});
        } else if (head == "qnd") {
            auto a = expect_name(tokens, 1, line_no, "mode name");
            auto b = expect_name(tokens, 2, line_no, "mode name");
            auto k = expect_kv(tokens, 3, "k", line_no);
            expect_end(tokens, 4, line_no);
            if (a && b && k)
                ast.statements.push_back(AstQnd{{line_no, tokens[0].col},
                                                {line_no, tokens[1].col},
                                                {line_no, tokens[2].col},
                                                *a, *b, *k});
        } else if (head == "phase") {
            auto m = expect_name(tokens, 1, line_no, "mode name");
            auto theta = expect_kv(tokens, 2, "theta", line_no);
            expect_end(tokens, 3, line_no);
            if (m && theta)
                ast.statements.push_back(AstPhase{{line_no, tokens[0].col},
                                                  {line_no, tokens[1].col},
                                                  *m, *theta});
        } else if (head == "rotate") {
            parse_rotate(tokens, line_no, ast);
        } else if (head == "measure") {
            parse_measure(tokens, line_no, ast);
        } else if (head == "displace") {
            parse_displace(tokens, line_no, ast);
        } else {
            error(DiagCode::SyntaxError, line_no, tokens[0].col,
                  "unknown statement '" + head + "'");
        }
    }

    void parse_mode(const std::vector<Token>& tokens, int line_no, ProtocolAst& ast) {
        auto name = expect_name(tokens, 1, line_no, "mode name");
        if (!name) return;
        if (tokens.size() < 3) {
            error(DiagCode::SyntaxError, line_no,
                  tokens.back().col + static_cast<int>(tokens.back().text.size()),
                  "expected mode kind (vacuum | spin | light | coherent)");
            return;
        }
        const std::string& kind = tokens[2].text;
        AstDecl decl;
        decl.pos = {line_no, tokens[1].col};
        decl.name = *name;
        if (kind == "vacuum") {
            expect_end(tokens, 3, line_no);
            decl.kind = DeclVacuum{};
        } else if (kind == "spin") {
            auto f = expect_kv(tokens, 3, "F", line_no);
            auto n = expect_kv(tokens, 4, "N", line_no);
            expect_end(tokens, 5, line_no);
            if (!(f && n)) return;
            decl.kind = DeclSpin{*f, *n};
        } else if (kind == "light") {
            auto n = expect_kv(tokens, 3, "n", line_no);
            expect_end(tokens, 4, line_no);
            if (!n) return;
            decl.kind = DeclLight{*n};
        } else if (kind == "coherent") {
            auto x = expect_kv(tokens, 3, "x", line_no);
            auto p = expect_kv(tokens, 4, "p", line_no);
            expect_end(tokens, 5, line_no);
            if (!(x && p)) return;
            decl.kind = DeclCoherent{*x, *p};
        } else {
            error(DiagCode::SyntaxError, line_no, tokens[2].col,
                  "unknown mode kind '" + kind + "'");
            return;
        }
        ast.statements.push_back(std::move(decl));
    }

    void parse_rotate(const std::vector<Token>& tokens, int line_no, ProtocolAst& ast) {
        auto m = expect_name(tokens, 1, line_no, "mode name");
        if (tokens.size() < 3) {
            error(DiagCode::SyntaxError, line_no, 1, "expected rotation axis");
            return;
        }
        const std::string& axis = tokens[2].text;
        if (axis != "x" && axis != "y" && axis != "z") {
            error(DiagCode::SyntaxError, line_no, tokens[2].col,
                  "rotation axis must be x, y or z");
            return;
        }
        auto angle = expect_kv(tokens, 3, "angle", line_no);
        expect_end(tokens, 4, line_no);
        if (m && angle)
            ast.statements.push_back(AstRotate{{line_no, tokens[0].col},
                                               {line_no, tokens[1].col},
                                               *m, axis[0], *angle});
    }

    void parse_measure(const std::vector<Token>& tokens, int line_no, ProtocolAst& ast) {
        if (tokens.size() < 2) {
            error(DiagCode::SyntaxError, line_no, 1, "expected quadrature");
            return;
        }
        AstMeasure meas;
        meas.pos = {line_no, tokens[0].col};
        meas.mode_pos = {line_no, tokens.size() > 2 ? tokens[2].col : tokens[0].col};
        const std::string& quad = tokens[1].text;
        if (quad == "x") {
            meas.angle = 0.0;
        } else if (quad == "p") {
            meas.angle = kHalfPi;
        } else if (quad.rfind("angle=", 0) == 0) {
            auto angle = expect_kv(tokens, 1, "angle", line_no);
            if (!angle) return;
            meas.explicit_angle = true;
            meas.angle = *angle;
        } else {
            error(DiagCode::SyntaxError, line_no, tokens[1].col,
                  "expected x, p or angle=NUM");
            return;
        }
        auto mode = expect_name(tokens, 2, line_no, "mode name");
        if (!mode) return;
        if (tokens.size() < 4 || tokens[3].text != "->") {
            error(DiagCode::SyntaxError, line_no,
                  tokens.size() < 4 ? tokens[2].col + static_cast<int>(tokens[2].text.size())
                                    : tokens[3].col,
                  "expected '->' outcome");
            return;
        }
        auto outcome = expect_name(tokens, 4, line_no, "outcome name");
        expect_end(tokens, 5, line_no);
        if (!outcome) return;
        meas.mode = *mode;
        meas.outcome = *outcome;
        ast.statements.push_back(std::move(meas));
    }

    void parse_displace(const std::vector<Token>& tokens, int line_no, ProtocolAst& ast) {
        auto mode = expect_name(tokens, 1, line_no, "mode name");
        if (!mode) return;
        if (tokens.size() < 3 || (tokens[2].text != "x" && tokens[2].text != "p")) {
            error(DiagCode::SyntaxError, line_no,
                  tokens.size() < 3 ? tokens[1].col + static_cast<int>(tokens[1].text.size())
                                    : tokens[2].col,
                  "expected quadrature x or p");
            return;
        }
        AstDisplace disp;
        disp.pos = {line_no, tokens[0].col};
        disp.mode_pos = {line_no, tokens[1].col};
        disp.mode = *mode;
        disp.quad = tokens[2].text == "x" ? Quadrature::X : Quadrature::P;
        std::size_t i = 3;
        while (i < tokens.size() && tokens[i].text.rfind("gain=", 0) == 0) {
            auto gain = expect_kv(tokens, i, "gain", line_no);
            if (!gain) return;
            if (i + 1 >= tokens.size() || tokens[i + 1].text.rfind("from=", 0) != 0) {
                error(DiagCode::SyntaxError, line_no,
                      i + 1 < tokens.size()
                          ? tokens[i + 1].col
                          : tokens[i].col + static_cast<int>(tokens[i].text.size()),
                      "each gain= must be followed by from=NAME");
                return;
            }
            const std::string from = tokens[i + 1].text.substr(5);
            if (!valid_name(from)) {
                error(DiagCode::SyntaxError, line_no, tokens[i + 1].col + 5,
                      "invalid outcome name '" + from + "'");
                return;
            }
            disp.terms.push_back({*gain, from, {line_no, tokens[i + 1].col}});
            i += 2;
        }
        if (i < tokens.size() && tokens[i].text.rfind("const=", 0) == 0) {
            auto constant = expect_kv(tokens, i, "const", line_no);
            if (!constant) return;
            disp.constant = *constant;
            ++i;
        }
        expect_end(tokens, i, line_no);
        ast.statements.push_back(std::move(disp));
    }

    // Semantic validation: declarations before use, destructive measurement,
    // outcome ordering, rotation constraints.
    void validate(const ProtocolAst& ast) {
        std::map<std::string, const AstDecl*> declared;
        std::set<std::string> measured;
        std::set<std::string> outcomes;

        auto check_mode = [&](const std::string& name, const SourcePos& pos,
                              bool also_alive = true) -> const AstDecl* {
            const auto it = declared.find(name);
            if (it == declared.end()) {
                error(DiagCode::UndeclaredMode, pos.line, pos.col,
                      "mode '" + name + "' is not declared");
                return nullptr;
            }
            if (also_alive && measured.count(name) > 0)
                error(DiagCode::UseAfterMeasure, pos.line, pos.col,
                      "mode '" + name + "' was destroyed by an earlier measurement");
            return it->second;
        };

        for (const AstStatement& stmt : ast.statements) {
            if (const auto* decl = std::get_if<AstDecl>(&stmt)) {
                if (declared.count(decl->name) > 0) {
                    error(DiagCode::DuplicateMode, decl->pos.line, decl->pos.col,
                          "mode '" + decl->name + "' is already declared");
                    continue;
                }
                if (const auto* spin = std::get_if<DeclSpin>(&decl->kind)) {
                    const double twice_f = 2.0 * spin->spin_f;
                    if (spin->spin_f <= 0.0 ||
                        std::abs(twice_f - std::round(twice_f)) > 1e-9)
                        error(DiagCode::BadArgument, decl->pos.line, decl->pos.col,
                              "spin F must be a positive half-integer");
                    if (spin->atom_count < 1.0)
                        error(DiagCode::BadArgument, decl->pos.line, decl->pos.col,
                              "spin N must be >= 1");
                } else if (const auto* light = std::get_if<DeclLight>(&decl->kind)) {
                    if (light->photon_count < 1.0)
                        error(DiagCode::BadArgument, decl->pos.line, decl->pos.col,
                              "light n must be >= 1");
                }
                declared.emplace(decl->name, decl);
            } else if (const auto* sq = std::get_if<AstSqueeze>(&stmt)) {
                check_mode(sq->mode_a, sq->pos_a);
                check_mode(sq->mode_b, sq->pos_b);
                if (sq->mode_a == sq->mode_b)
                    error(DiagCode::SelfInteraction, sq->pos.line, sq->pos.col,
                          "squeeze requires two distinct modes");
            } else if (const auto* qnd = std::get_if<AstQnd>(&stmt)) {
                check_mode(qnd->mode_a, qnd->pos_a);
                check_mode(qnd->mode_b, qnd->pos_b);
                if (qnd->mode_a == qnd->mode_b)
                    error(DiagCode::SelfInteraction, qnd->pos.line, qnd->pos.col,
                          "qnd requires two distinct modes");
            } else if (const auto* ph = std::get_if<AstPhase>(&stmt)) {
                check_mode(ph->mode, ph->mode_pos);
            } else if (const auto* rot = std::get_if<AstRotate>(&stmt)) {
                const AstDecl* decl = check_mode(rot->mode, rot->mode_pos);
                if (decl != nullptr) {
                    if (!std::holds_alternative<DeclSpin>(decl->kind)) {
                        error(DiagCode::BadArgument, rot->pos.line, rot->pos.col,
                              "rotate applies to spin modes");
                    } else if (rot->axis != 'x') {
                        // Script spins are polarized along x; only rotations
                        // about the polarization axis keep the linearized map.
                        error(DiagCode::RotateAxis, rot->pos.line, rot->pos.col,
                              "rotation must be about the polarization axis (x)");
                    }
                    const double a = rot->angle;
                    const bool allowed = std::abs(a) < 1e-12 ||
                                         std::abs(std::abs(a) - kHalfPi) < 1e-12 ||
                                         std::abs(std::abs(a) - M_PI) < 1e-12;
                    if (!allowed)
                        error(DiagCode::BadArgument, rot->pos.line, rot->pos.col,
                              "rotation angle must be 0, +-pi/2 or +-pi");
                }
            } else if (const auto* meas = std::get_if<AstMeasure>(&stmt)) {
                check_mode(meas->mode, meas->mode_pos);
                if (outcomes.count(meas->outcome) > 0)
                    error(DiagCode::DuplicateOutcome, meas->pos.line, meas->pos.col,
                          "outcome '" + meas->outcome + "' is already defined");
                outcomes.insert(meas->outcome);
                measured.insert(meas->mode);
            } else if (const auto* disp = std::get_if<AstDisplace>(&stmt)) {
                check_mode(disp->mode, disp->mode_pos);
                for (const AstDisplaceTerm& term : disp->terms)
                    if (outcomes.count(term.from) == 0)
                        error(DiagCode::ForwardOutcomeRef, term.from_pos.line,
                              term.from_pos.col,
                              "outcome '" + term.from +
                                  "' is not defined by a prior measurement");
            }
        }
    }
};

}  // namespace

std::string_view diag_code_name(DiagCode code) {
    switch (code) {
        case DiagCode::SyntaxError: return "SYNTAX_ERROR";
        case DiagCode::BadNumber: return "BAD_NUMBER";
        case DiagCode::BadArgument: return "BAD_ARGUMENT";
        case DiagCode::UndeclaredMode: return "UNDECLARED_MODE";
        case DiagCode::DuplicateMode: return "DUPLICATE_MODE";
        case DiagCode::SelfInteraction: return "SELF_INTERACTION";
        case DiagCode::UseAfterMeasure: return "USE_AFTER_MEASURE";
        case DiagCode::ForwardOutcomeRef: return "FORWARD_OUTCOME_REF";
        case DiagCode::DuplicateOutcome: return "DUPLICATE_OUTCOME";
        case DiagCode::RotateAxis: return "ROTATE_AXIS";
        case DiagCode::UnknownBuiltin: return "UNKNOWN_BUILTIN";
    }
    return "UNKNOWN";
}

ParseResult parse(std::string_view text) { return Parser(text).run(); }

std::string print(const ProtocolAst& ast) {
    std::ostringstream out;
    for (const AstStatement& stmt : ast.statements) {
        if (const auto* decl = std::get_if<AstDecl>(&stmt)) {
            out << "mode " << decl->name;
            if (std::holds_alternative<DeclVacuum>(decl->kind)) {
                out << " vacuum";
            } else if (const auto* spin = std::get_if<DeclSpin>(&decl->kind)) {
                out << " spin F=" << format_double(spin->spin_f)
                    << " N=" << format_double(spin->atom_count);
            } else if (const auto* light = std::get_if<DeclLight>(&decl->kind)) {
                out << " light n=" << format_double(light->photon_count);
            } else if (const auto* coh = std::get_if<DeclCoherent>(&decl->kind)) {
                out << " coherent x=" << format_double(coh->x)
                    << " p=" << format_double(coh->p);
            }
        } else if (const auto* sq = std::get_if<AstSqueeze>(&stmt)) {
            out << "squeeze " << sq->mode_a << " " << sq->mode_b
                << " r=" << format_double(sq->r);
        } else if (const auto* qnd = std::get_if<AstQnd>(&stmt)) {
            out << "qnd " << qnd->mode_a << " " << qnd->mode_b
                << " k=" << format_double(qnd->kappa);
        } else if (const auto* ph = std::get_if<AstPhase>(&stmt)) {
            out << "phase " << ph->mode << " theta=" << format_double(ph->theta);
        } else if (const auto* rot = std::get_if<AstRotate>(&stmt)) {
            out << "rotate " << rot->mode << " " << rot->axis
                << " angle=" << format_double(rot->angle);
        } else if (const auto* meas = std::get_if<AstMeasure>(&stmt)) {
            out << "measure ";
            if (meas->explicit_angle)
                out << "angle=" << format_double(meas->angle);
            else
                out << (meas->angle == 0.0 ? "x" : "p");
            out << " " << meas->mode << " -> " << meas->outcome;
        } else if (const auto* disp = std::get_if<AstDisplace>(&stmt)) {
            out << "displace " << disp->mode << " "
                << (disp->quad == Quadrature::X ? "x" : "p");
            for (const AstDisplaceTerm& term : disp->terms)
                out << " gain=" << format_double(term.gain) << " from=" << term.from;
            if (disp->constant.has_value())
                out << " const=" << format_double(*disp->constant);
        }
        out << "\n";
    }
    return out.str();
}

ProtocolDef compile(const ProtocolAst& ast) {
    ProtocolDef def;
    def.name = ast.name;
    std::map<std::string, int> mode_index;
    std::map<std::string, int> outcome_index;

    for (const AstStatement& stmt : ast.statements) {
        if (const auto* decl = std::get_if<AstDecl>(&stmt)) {
            ModeDecl mode;
            mode.label = decl->name;
            if (std::holds_alternative<DeclVacuum>(decl->kind)) {
                mode.kind = ModeKind::Vacuum;
            } else if (const auto* spin = std::get_if<DeclSpin>(&decl->kind)) {
                mode.kind = ModeKind::Spin;
                mode.spin_f = spin->spin_f;
                mode.atom_count = spin->atom_count;
                spin_light::SpinEnsemble ensemble{spin->spin_f, spin->atom_count,
                                                  spin_light::Axis::X, +1, decl->name};
                const auto map = spin_light::spin_to_mode(ensemble);
                mode.scale = map.scale;
                mode.signal = true;
                if (!map.linearization_ok)
                    def.warnings.push_back("mode '" + decl->name +
                                           "': N*F < 100, linearized spin map is marginal");
            } else if (const auto* light = std::get_if<DeclLight>(&decl->kind)) {
                mode.kind = ModeKind::Light;
                mode.photon_count = light->photon_count;
                spin_light::StokesField field{light->photon_count, decl->name};
                const auto map = spin_light::stokes_to_mode(field);
                mode.scale = map.scale;
                if (!map.linearization_ok)
                    def.warnings.push_back(
                        "mode '" + decl->name +
                        "': n < 100, bright-beam approximation is marginal");
            } else if (const auto* coh = std::get_if<DeclCoherent>(&decl->kind)) {
                mode.kind = ModeKind::Coherent;
                mode.x0 = coh->x;
                mode.p0 = coh->p;
                mode.signal = true;
            }
            mode_index.emplace(decl->name, static_cast<int>(def.modes.size()));
            def.modes.push_back(std::move(mode));
        } else if (const auto* sq = std::get_if<AstSqueeze>(&stmt)) {
            def.steps.push_back(
                SqueezeStep{mode_index.at(sq->mode_a), mode_index.at(sq->mode_b), sq->r});
        } else if (const auto* qnd = std::get_if<AstQnd>(&stmt)) {
            def.steps.push_back(QndStep{mode_index.at(qnd->mode_a),
                                        mode_index.at(qnd->mode_b), qnd->kappa});
        } else if (const auto* ph = std::get_if<AstPhase>(&stmt)) {
            def.steps.push_back(PhaseStep{mode_index.at(ph->mode), ph->theta});
        } else if (const auto* rot = std::get_if<AstRotate>(&stmt)) {
            // Physical spin rotation about the polarization axis is a
            // canonical phase-space rotation by the same angle.
            def.steps.push_back(PhaseStep{mode_index.at(rot->mode), rot->angle});
        } else if (const auto* meas = std::get_if<AstMeasure>(&stmt)) {
            const int id = static_cast<int>(def.outcome_names.size());
            outcome_index.emplace(meas->outcome, id);
            def.outcome_names.push_back(meas->outcome);
            def.steps.push_back(MeasureStep{mode_index.at(meas->mode), meas->angle, id});
        } else if (const auto* disp = std::get_if<AstDisplace>(&stmt)) {
            DisplaceStep step;
            step.mode = mode_index.at(disp->mode);
            step.quad = disp->quad;
            step.offset = disp->constant.value_or(0.0);
            for (const AstDisplaceTerm& term : disp->terms)
                step.terms.push_back({outcome_index.at(term.from), term.gain});
            def.steps.push_back(std::move(step));
        }
    }
    return def;
}

namespace {

std::string kv(const char* key, double value) {
    return std::string(key) + "=" + format_double(value);
}

}  // namespace

std::vector<std::string> builtin_names() {
    return {"atom_to_light", "atom_to_atom", "swap"};
}

std::string builtin_script(std::string_view name, const protocols::ProtocolConfig& cfg) {
    using protocols::kBuiltinAtomCount;
    using protocols::kBuiltinPhotonCount;
    using protocols::kBuiltinSpinF;
    const double kappa_probe = cfg.kappa * std::sqrt(cfg.readout_ratio);
    const double probe_photons = kBuiltinPhotonCount * cfg.readout_ratio;

    std::ostringstream s;
    if (name == "atom_to_light") {
        const std::vector<double> gains =
            cfg.feedforward_gains.value_or(std::vector<double>{-1.0, 1.0 / kappa_probe});
        s << "# Teleportation of a collective spin state onto light.\n"
          << "mode alice spin " << kv("F", kBuiltinSpinF) << " " << kv("N", kBuiltinAtomCount) << "\n"
          << "mode epr1 light " << kv("n", kBuiltinPhotonCount) << "\n"
          << "mode epr2 light " << kv("n", kBuiltinPhotonCount) << "\n"
          << "mode probe light " << kv("n", probe_photons) << "\n"
          << "squeeze epr1 epr2 " << kv("r", cfg.r) << "\n"
          << "qnd alice epr1 " << kv("k", cfg.kappa) << "\n"
          << "measure p epr1 -> d_light\n"
          << "rotate alice x " << kv("angle", kHalfPi) << "\n"
          << "qnd alice probe " << kv("k", kappa_probe) << "\n"
          << "measure p probe -> d_probe\n"
          << "displace epr2 p " << kv("gain", gains[0]) << " from=d_light\n"
          << "displace epr2 x " << kv("gain", gains[1]) << " from=d_probe\n"
          << "phase epr2 " << kv("theta", -kHalfPi) << "\n";
    } else if (name == "atom_to_atom") {
        const std::vector<double> gains = cfg.feedforward_gains.value_or(
            std::vector<double>{1.0 / kappa_probe, -1.0, 1.0, 1.0 / kappa_probe});
        s << "# Direct teleportation of one collective spin state onto another.\n"
          << "mode alice spin " << kv("F", kBuiltinSpinF) << " " << kv("N", kBuiltinAtomCount) << "\n"
          << "mode bob spin " << kv("F", kBuiltinSpinF) << " " << kv("N", kBuiltinAtomCount) << "\n"
          << "mode epr1 light " << kv("n", kBuiltinPhotonCount) << "\n"
          << "mode epr2 light " << kv("n", kBuiltinPhotonCount) << "\n"
          << "mode probe_b light " << kv("n", probe_photons) << "\n"
          << "mode probe_a light " << kv("n", probe_photons) << "\n"
          << "squeeze epr1 epr2 " << kv("r", cfg.r) << "\n"
          << "phase epr1 " << kv("theta", -kHalfPi) << "\n"
          << "qnd alice epr1 " << kv("k", cfg.kappa) << "\n"
          << "measure p epr1 -> d_a1\n"
          << "phase bob " << kv("theta", kHalfPi) << "\n"
          << "phase probe_b " << kv("theta", kHalfPi) << "\n"
          << "qnd bob probe_b " << kv("k", kappa_probe) << "\n"
          << "phase bob " << kv("theta", -kHalfPi) << "\n"
          << "phase probe_b " << kv("theta", -kHalfPi) << "\n"
          << "measure x probe_b -> d_b1\n"
          << "phase alice " << kv("theta", kHalfPi) << "\n"
          << "phase probe_a " << kv("theta", kHalfPi) << "\n"
          << "qnd alice probe_a " << kv("k", kappa_probe) << "\n"
          << "phase alice " << kv("theta", -kHalfPi) << "\n"
          << "phase probe_a " << kv("theta", -kHalfPi) << "\n"
          << "measure x probe_a -> d_a2\n"
          << "qnd bob epr2 " << kv("k", cfg.kappa) << "\n"
          << "measure p epr2 -> d_b2\n"
          << "displace bob x " << kv("gain", gains[0]) << " from=d_a2 "
          << kv("gain", gains[1]) << " from=d_b2\n"
          << "displace bob p " << kv("gain", gains[2]) << " from=d_a1 "
          << kv("gain", gains[3]) << " from=d_b1\n";
    } else if (name == "swap") {
        const std::vector<double> gains =
            cfg.feedforward_gains.value_or(std::vector<double>{-1.0, -1.0});
        s << "# Swap of the collective spin states of two samples.\n"
          << "mode a spin " << kv("F", kBuiltinSpinF) << " " << kv("N", kBuiltinAtomCount) << "\n"
          << "mode b spin " << kv("F", kBuiltinSpinF) << " " << kv("N", kBuiltinAtomCount) << "\n"
          << "mode epr1 light " << kv("n", kBuiltinPhotonCount) << "\n"
          << "mode epr2 light " << kv("n", kBuiltinPhotonCount) << "\n"
          << "squeeze epr1 epr2 " << kv("r", cfg.r) << "\n"
          << "qnd a epr1 " << kv("k", cfg.kappa) << "\n"
          << "qnd b epr1 " << kv("k", cfg.kappa) << "\n"
          << "measure p epr1 -> d1\n"
          << "phase a " << kv("theta", -kHalfPi) << "\n"
          << "phase b " << kv("theta", -kHalfPi) << "\n"
          << "phase epr2 " << kv("theta", kHalfPi) << "\n"
          << "qnd a epr2 " << kv("k", cfg.kappa) << "\n"
          << "qnd b epr2 " << kv("k", cfg.kappa) << "\n"
          << "phase a " << kv("theta", kHalfPi) << "\n"
          << "phase b " << kv("theta", kHalfPi) << "\n"
          << "phase epr2 " << kv("theta", -kHalfPi) << "\n"
          << "measure x epr2 -> d2\n"
          << "displace a x " << kv("gain", gains[0]) << " from=d1\n"
          << "displace b x " << kv("gain", gains[0]) << " from=d1\n"
          << "displace a p " << kv("gain", gains[1]) << " from=d2\n"
          << "displace b p " << kv("gain", gains[1]) << " from=d2\n";
    }
    return s.str();
}

ParseResult builtin(std::string_view name, const protocols::ProtocolConfig& cfg) {
    const auto names = builtin_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        ParseResult result;
        result.diagnostics.push_back({DiagCode::UnknownBuiltin, 0, 0,
                                      "unknown builtin '" + std::string(name) + "'"});
        return result;
    }
    protocols::validate_config(cfg);
    if (name == "atom_to_light" && cfg.kappa == 0.0)
        throw std::invalid_argument("atom_to_light: kappa = 0 gives no joint measurement");
    ParseResult result = parse(builtin_script(name, cfg));
    if (result.ast.has_value()) result.ast->name = std::string(name);
    return result;
}

}  // namespace spinport::dsl
