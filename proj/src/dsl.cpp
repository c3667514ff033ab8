#include "rrnlab/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace rrnlab {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    struct Token {
        enum Type { Ident, Decl, Arrow, Neq, LParen, RParen, Comma, Dot, End } type;
        std::string value;
        int line, col;
    };

    Token next() {
        skip_ws();
        const int line = line_, col = col_;
        if (eof()) return {Token::End, "", line, col};
        const char c = peek();
        if (c == '(') return advance(), Token{Token::LParen, "(", line, col};
        if (c == ')') return advance(), Token{Token::RParen, ")", line, col};
        if (c == ',') return advance(), Token{Token::Comma, ",", line, col};
        if (c == '.') return advance(), Token{Token::Dot, ".", line, col};
        if (c == ':') {
            advance();
            if (!eof() && peek() == '-') return advance(), Token{Token::Arrow, ":-", line, col};
            throw ParseError(line, col, "expected ':-'");
        }
        if (c == '!') {
            advance();
            if (!eof() && peek() == '=') return advance(), Token{Token::Neq, "!=", line, col};
            throw ParseError(line, col, "expected '!='");
        }
        if (c == '@') {
            advance();
            std::string word = read_ident(line, col);
            if (word != "class" && word != "relation")
                throw ParseError(line, col, "unknown declaration '@" + word + "'");
            return {Token::Decl, word, line, col};
        }
        if (ident_start(c)) return {Token::Ident, read_ident(line, col), line, col};
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }

private:
    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    void skip_ws() {
        while (!eof()) {
            const char c = peek();
            if (c == '%' || c == '#') {
                while (!eof() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }
    std::string read_ident(int line, int col) {
        if (eof() || !ident_start(peek())) throw ParseError(line, col, "expected identifier");
        std::string out;
        while (!eof() && ident_char(peek())) {
            out.push_back(peek());
            advance();
        }
        return out;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

Term make_term(const std::string& name) {
    if (name == "_") return Term::anon();
    if (std::isupper(static_cast<unsigned char>(name[0]))) return Term::variable(name);
    return Term::constant(name);
}

struct PredUse {
    int arity;
    int line, col;
};

class ProgramParser {
public:
    explicit ProgramParser(std::string_view text) : lexer_(text) { shift(); }

    Program parse() {
        while (tok_.type != Lexer::Token::End) {
            if (tok_.type == Lexer::Token::Decl)
                parse_declaration();
            else
                parse_rule();
        }
        return finish();
    }

private:
    using Token = Lexer::Token;

    void shift() { tok_ = lexer_.next(); }

    void expect(Token::Type t, const char* what) {
        if (tok_.type != t) throw ParseError(tok_.line, tok_.col, std::string("expected ") + what);
        shift();
    }

    void parse_declaration() {
        const bool is_class = tok_.value == "class";
        shift();
        while (true) {
            if (tok_.type != Token::Ident)
                throw ParseError(tok_.line, tok_.col, "expected predicate name");
            declare(tok_.value, is_class ? 1 : 2, tok_.line, tok_.col, true);
            shift();
            if (tok_.type == Token::Comma) {
                shift();
                continue;
            }
            break;
        }
        expect(Token::Dot, "'.'");
    }

    Atom parse_atom(bool in_body) {
        if (tok_.type != Token::Ident)
            throw ParseError(tok_.line, tok_.col, "expected atom");
        const Token name = tok_;
        shift();
        if (in_body && tok_.type == Token::Neq) {
            // term != term
            shift();
            if (tok_.type != Token::Ident)
                throw ParseError(tok_.line, tok_.col, "expected term after '!='");
            Term lhs = make_term(name.value);
            Term rhs = make_term(tok_.value);
            shift();
            if (lhs.kind == Term::Anonymous || rhs.kind == Term::Anonymous)
                throw ParseError(name.line, name.col, "'_' not allowed in inequality");
            return Atom::neq(std::move(lhs), std::move(rhs));
        }
        if (name.value == "false") {
            if (in_body)
                throw ParseError(name.line, name.col, "'false' only allowed as rule head");
            return Atom::bottom();
        }
        expect(Token::LParen, "'('");
        std::vector<Term> args;
        while (true) {
            if (tok_.type != Token::Ident)
                throw ParseError(tok_.line, tok_.col, "expected term");
            args.push_back(make_term(tok_.value));
            shift();
            if (tok_.type == Token::Comma) {
                shift();
                continue;
            }
            break;
        }
        expect(Token::RParen, "')'");
        if (args.size() != 1 && args.size() != 2)
            throw ParseError(name.line, name.col,
                             "predicate " + name.value + " used with arity " +
                                 std::to_string(args.size()));
        declare(name.value, static_cast<int>(args.size()), name.line, name.col, false);
        return Atom::pred(name.value, std::move(args));
    }

    void parse_rule() {
        const Token start = tok_;
        Atom head = parse_atom(/*in_body=*/false);
        std::vector<Atom> body;
        if (tok_.type == Token::Arrow) {
            shift();
            while (true) {
                body.push_back(parse_atom(/*in_body=*/true));
                if (tok_.type == Token::Comma) {
                    shift();
                    continue;
                }
                break;
            }
        }
        expect(Token::Dot, "'.'");
        if (body.empty())
            throw ParseError(start.line, start.col,
                             "facts are not allowed in programs (rule needs a body)");
        check_rule(head, body, start);
        rules_.push_back({std::move(head), std::move(body)});
    }

    void check_rule(const Atom& head, const std::vector<Atom>& body, const Token& at) {
        std::set<std::string> bound;  // variables bound by a relational/class atom
        bool has_pred_atom = false;
        for (const auto& atom : body) {
            if (atom.type == Atom::Pred) {
                has_pred_atom = true;
                for (const auto& t : atom.args)
                    if (t.kind == Term::Variable) bound.insert(t.name);
            }
        }
        if (!has_pred_atom)
            throw ParseError(at.line, at.col, "rule body needs at least one relational atom");
        for (const auto& atom : body) {
            if (atom.type != Atom::Neq) continue;
            for (const auto& t : atom.args)
                if (t.kind == Term::Variable && bound.count(t.name) == 0)
                    throw ParseError(at.line, at.col,
                                     "unsafe rule: inequality variable " + t.name +
                                         " not bound by a body atom");
        }
        for (const auto& t : head.args) {
            if (t.kind == Term::Anonymous)
                throw ParseError(at.line, at.col, "'_' not allowed in rule head");
            if (t.kind == Term::Variable && bound.count(t.name) == 0)
                throw ParseError(at.line, at.col,
                                 "unsafe rule: head variable " + t.name +
                                     " not bound by a body atom");
        }
    }

    void declare(const std::string& name, int arity, int line, int col, bool explicit_decl) {
        if (Vocabulary::is_reserved(name) && name != "false")
            throw ParseError(line, col, "reserved predicate name: " + name);
        if (name == "false")
            throw ParseError(line, col, "'false' cannot be used as a predicate name");
        auto it = uses_.find(name);
        if (it != uses_.end()) {
            if (it->second.arity != arity)
                throw ParseError(line, col,
                                 "predicate " + name + " used with arity " +
                                     std::to_string(arity) + " but previously " +
                                     std::to_string(it->second.arity));
            return;
        }
        uses_[name] = {arity, line, col};
        order_.push_back(name);
        (void)explicit_decl;
    }

    Program finish() {
        auto vocab = std::make_shared<Vocabulary>();
        for (const auto& name : order_) {
            if (uses_[name].arity == 1)
                vocab->add_class(name);
            else
                vocab->add_relation(name);
        }
        return Program(std::move(rules_), std::move(vocab));
    }

    Lexer lexer_;
    Token tok_{};
    std::vector<Rule> rules_;
    std::map<std::string, PredUse> uses_;
    std::vector<std::string> order_;
};

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

Literal parse_tsv_fact(std::string_view line, int lineno, const Vocabulary* vocab) {
    auto fields = split(line, '\t');
    if (fields.size() != 4)
        throw ParseError(lineno, 1, "expected 4 tab-separated fields");
    const std::string& subject = fields[0];
    const std::string& pred = fields[1];
    const std::string& object = fields[2];
    const std::string& polarity = fields[3];
    if (subject.empty() || pred.empty() || object.empty())
        throw ParseError(lineno, 1, "empty field in triple");
    bool positive;
    if (polarity == "+")
        positive = true;
    else if (polarity == "-")
        positive = false;
    else
        throw ParseError(lineno, 1, "polarity must be '+' or '-', got '" + polarity + "'");
    Literal lit;
    lit.positive = positive;
    if (pred == Vocabulary::kMemberToken) {
        lit.predicate = object;
        lit.args = {subject};
        if (vocab && !vocab->class_id(object))
            throw ParseError(lineno, 1, "unknown class: " + object);
    } else {
        lit.predicate = pred;
        lit.args = {subject, object};
        if (vocab && !vocab->relation_id(pred))
            throw ParseError(lineno, 1, "unknown relation: " + pred);
    }
    return lit;
}

Literal parse_inline_fact(std::string_view line, int lineno, const Vocabulary* vocab) {
    // [-]pred(arg[, arg]).
    std::size_t i = 0;
    auto fail = [&](const std::string& msg) -> ParseError {
        return ParseError(lineno, static_cast<int>(i) + 1, msg);
    };
    auto skip_spaces = [&] {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    };
    auto read_name = [&]() -> std::string {
        skip_spaces();
        std::size_t start = i;
        while (i < line.size() && ident_char(line[i])) ++i;
        if (start == i) throw fail("expected name");
        return std::string(line.substr(start, i - start));
    };
    skip_spaces();
    bool positive = true;
    if (i < line.size() && line[i] == '-') {
        positive = false;
        ++i;
    }
    std::string pred = read_name();
    skip_spaces();
    if (i >= line.size() || line[i] != '(') throw fail("expected '('");
    ++i;
    std::vector<std::string> args;
    while (true) {
        args.push_back(read_name());
        skip_spaces();
        if (i < line.size() && line[i] == ',') {
            ++i;
            continue;
        }
        break;
    }
    if (i >= line.size() || line[i] != ')') throw fail("expected ')'");
    ++i;
    skip_spaces();
    if (i >= line.size() || line[i] != '.') throw fail("expected '.'");
    ++i;
    skip_spaces();
    if (i != line.size()) throw fail("trailing characters after fact");
    if (args.size() != 1 && args.size() != 2) throw fail("facts have 1 or 2 arguments");
    for (const auto& a : args)
        if (std::isupper(static_cast<unsigned char>(a[0])) || a == "_")
            throw fail("facts must be ground (constant arguments)");
    if (pred == Vocabulary::kMemberToken) {
        // member(i, c) spells the class fact c(i)
        if (args.size() != 2) throw fail("member facts need 2 arguments");
        pred = args[1];
        args.pop_back();
    }
    if (vocab) {
        const bool is_class = vocab->class_id(pred).has_value();
        const bool is_rel = vocab->relation_id(pred).has_value();
        if (!is_class && !is_rel) throw fail("unknown predicate: " + pred);
        const std::size_t want = is_class ? 1 : 2;
        if (args.size() != want)
            throw fail("predicate " + pred + " needs " + std::to_string(want) + " arguments");
    }
    return {positive, std::move(pred), std::move(args)};
}

}  // namespace

std::vector<int> Program::derived_relation_ids() const {
    std::vector<char> seen(vocab_->n_relations(), 0);
    for (const auto& rule : rules_) {
        if (rule.is_constraint()) continue;
        if (auto rid = vocab_->relation_id(rule.head.predicate)) seen[*rid] = 1;
    }
    std::vector<int> out;
    for (int r = 0; r < vocab_->n_relations(); ++r)
        if (seen[r]) out.push_back(r);
    return out;
}

Program parse_program(std::string_view text) { return ProgramParser(text).parse(); }

std::vector<Literal> parse_facts(std::string_view text, const Vocabulary* vocab) {
    std::vector<Literal> out;
    int lineno = 0;
    for (auto& raw : split(text, '\n')) {
        ++lineno;
        std::string_view line = raw;
        // strip comments; '#'/'%' only open a comment outside TSV fields
        if (auto pos = line.find_first_of("#%"); pos != std::string_view::npos)
            line = line.substr(0, pos);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
            line.remove_suffix(1);
        std::size_t lead = 0;
        while (lead < line.size() && std::isspace(static_cast<unsigned char>(line[lead])) &&
               line[lead] != '\t')
            ++lead;
        line = line.substr(lead);
        if (line.empty()) continue;
        if (line.find('\t') != std::string_view::npos)
            out.push_back(parse_tsv_fact(line, lineno, vocab));
        else
            out.push_back(parse_inline_fact(line, lineno, vocab));
    }
    return out;
}

namespace {

std::string term_text(const Term& t) { return t.name; }

std::string atom_text(const Atom& atom) {
    switch (atom.type) {
        case Atom::Bottom:
            return "false";
        case Atom::Neq:
            return term_text(atom.args[0]) + " != " + term_text(atom.args[1]);
        case Atom::Pred: {
            std::string out = atom.predicate + "(";
            for (std::size_t i = 0; i < atom.args.size(); ++i) {
                if (i) out += ",";
                out += term_text(atom.args[i]);
            }
            return out + ")";
        }
    }
    return {};
}

}  // namespace

std::string serialize_program(const Program& program) {
    std::ostringstream out;
    const auto& vocab = program.vocab();
    if (vocab.n_classes() > 0) {
        out << "@class ";
        for (int i = 0; i < vocab.n_classes(); ++i)
            out << (i ? ", " : "") << vocab.class_name(i);
        out << ".\n";
    }
    if (vocab.n_relations() > 0) {
        out << "@relation ";
        for (int i = 0; i < vocab.n_relations(); ++i)
            out << (i ? ", " : "") << vocab.relation_name(i);
        out << ".\n";
    }
    if (vocab.n_classes() > 0 || vocab.n_relations() > 0) out << "\n";
    for (const auto& rule : program.rules()) {
        out << atom_text(rule.head) << " :- ";
        for (std::size_t i = 0; i < rule.body.size(); ++i) {
            if (i) out << ", ";
            out << atom_text(rule.body[i]);
        }
        out << ".\n";
    }
    return out.str();
}

std::string serialize_facts(std::span<const Literal> facts) {
    std::ostringstream out;
    for (const auto& lit : facts) {
        if (lit.args.size() == 1)
            out << lit.args[0] << '\t' << Vocabulary::kMemberToken << '\t'
                << lit.predicate;
        else
            out << lit.args[0] << '\t' << lit.predicate << '\t' << lit.args[1];
        out << '\t' << (lit.positive ? '+' : '-') << '\n';
    }
    return out.str();
}

SampleKB sample_from_literals(VocabularyPtr vocab, std::span<const Literal> facts,
                              std::string provenance, bool allow_contradiction) {
    SampleKB sample(std::move(vocab), std::move(provenance));
    for (const auto& lit : facts)
        for (const auto& arg : lit.args) sample.add_individual(arg);
    for (const auto& lit : facts) sample.add_literal(lit, allow_contradiction);
    return sample;
}

}  // namespace rrnlab
