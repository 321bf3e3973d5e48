//! Parser for `.dl` rule files.
//!
//! Grammar summary:
//!
//! ```text
//! clause   := heads ":-" body "." | heads "."            (the latter are facts)
//! decl     := ".decl" name "/" arity ["edb" | "idb"]
//! body     := literal ("," literal)*
//! literal  := atom | "not" atom | term "!=" term
//!           | "(" "forall" var ":" atom "=>" atom ")"
//!           | "exists_other" "(" atom "," term ")"
//! ```
//!
//! In rules, lowercase identifiers are variables and constants must be quoted
//! or numeric. In facts every identifier is a constant. Identifiers starting
//! with an uppercase letter and followed by `(` are function symbols.
//! A `// (LABEL)` comment on any line the clause spans labels the rule.

use std::collections::{BTreeMap, HashMap};

use super::ast::{Atom, Declaration, Literal, PredKind, Program, Rule, Term};
use super::validate::{safety_violations, Diagnostic};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: predicate `{pred}` used with arity {found}, expected {expected}")]
    ArityConflict { line: usize, col: usize, pred: String, expected: usize, found: usize },
    #[error("{line}:{col}: function symbol `{functor}` used with arity {found}, expected {expected}")]
    FunctorArityConflict { line: usize, col: usize, functor: String, expected: usize, found: usize },
    #[error("unsafe rule: {0}")]
    Unsafe(Diagnostic),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(String),
    Underscore,
    LParen,
    RParen,
    Comma,
    Dot,
    Implies,
    Neq,
    Colon,
    Arrow,
    Slash,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexed {
    toks: Vec<Spanned>,
    /// line -> comment text after `//`
    comments: HashMap<usize, String>,
}

fn lex(src: &str) -> Result<Lexed, ParseError> {
    let mut toks = Vec::new();
    let mut comments = HashMap::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, m: &str| ParseError::Syntax { line, col, message: m.to_string() };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok, width: usize, i: &mut usize, col: &mut usize| {
            toks.push(Spanned { tok, line: l0, col: c0 });
            *i += width;
            *col += width;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                let start = i + 2;
                let mut j = start;
                while j < chars.len() && chars[j] != '\n' {
                    j += 1;
                }
                let text: String = chars[start..j].iter().collect();
                comments.entry(line).or_insert(text);
                col += j - i;
                i = j;
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '/' => push(Tok::Slash, 1, &mut i, &mut col),
            ':' if chars.get(i + 1) == Some(&'-') => push(Tok::Implies, 2, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            '!' if chars.get(i + 1) == Some(&'=') => push(Tok::Neq, 2, &mut i, &mut col),
            '=' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '"' => {
                let mut j = i + 1;
                let mut s = String::new();
                loop {
                    match chars.get(j) {
                        None | Some('\n') => return Err(err(l0, c0, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => {
                            if let Some(&n) = chars.get(j + 1) {
                                s.push(n);
                            }
                            j += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                let width = j + 1 - i;
                push(Tok::Str(s), width, &mut i, &mut col);
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_alphanumeric() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                push(Tok::Num(s), j - i, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let tok = if s == "_" { Tok::Underscore } else { Tok::Ident(s) };
                push(tok, j - i, &mut i, &mut col);
            }
            other => return Err(err(l0, c0, &format!("unexpected character `{other}`"))),
        }
    }
    Ok(Lexed { toks, comments })
}

#[derive(Debug, Clone)]
enum RawTerm {
    Ident(String),
    Quoted(String),
    Num(String),
    Underscore,
    App(String, Vec<RawTerm>),
}

#[derive(Debug, Clone)]
struct RawAtom {
    name: String,
    args: Vec<RawTerm>,
    line: usize,
    col: usize,
}

enum RawLit {
    Pos(RawAtom),
    Neg(RawAtom),
    Neq(RawTerm, RawTerm),
    Forall(String, RawAtom, RawAtom),
    ExistsOther(RawAtom, RawTerm),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or_else(|| self.toks.last()) {
            Some(s) => (s.line, s.col),
            None => (1, 1),
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, message: message.into() })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        match self.next() {
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let args = self.term_list()?;
                    Ok(RawTerm::App(name, args))
                } else {
                    Ok(RawTerm::Ident(name))
                }
            }
            Some(Tok::Str(s)) => Ok(RawTerm::Quoted(s)),
            Some(Tok::Num(s)) => Ok(RawTerm::Num(s)),
            Some(Tok::Underscore) => Ok(RawTerm::Underscore),
            _ => {
                self.pos -= 1;
                self.fail("expected a term")
            }
        }
    }

    /// Parses `t, t, ... )` after an opening parenthesis.
    fn term_list(&mut self) -> Result<Vec<RawTerm>, ParseError> {
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => return Ok(args),
                _ => {
                    self.pos -= 1;
                    return self.fail("expected `,` or `)`");
                }
            }
        }
    }

    fn atom(&mut self) -> Result<RawAtom, ParseError> {
        let (line, col) = self.here();
        match self.term()? {
            RawTerm::App(name, args) => Ok(RawAtom { name, args, line, col }),
            RawTerm::Ident(name) => Ok(RawAtom { name, args: Vec::new(), line, col }),
            _ => Err(ParseError::Syntax { line, col, message: "expected an atom".into() }),
        }
    }

    fn literal(&mut self) -> Result<RawLit, ParseError> {
        match (self.peek(), self.peek_at(1)) {
            (Some(Tok::Ident(k)), Some(Tok::Ident(_))) if k == "not" => {
                self.pos += 1;
                Ok(RawLit::Neg(self.atom()?))
            }
            (Some(Tok::LParen), Some(Tok::Ident(k))) if k == "forall" => {
                self.pos += 2;
                let var = match self.next() {
                    Some(Tok::Ident(v)) => v,
                    _ => {
                        self.pos -= 1;
                        return self.fail("expected quantified variable");
                    }
                };
                self.expect(Tok::Colon, "`:`")?;
                let domain = self.atom()?;
                self.expect(Tok::Arrow, "`=>`")?;
                let body = self.atom()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(RawLit::Forall(var, domain, body))
            }
            (Some(Tok::Ident(k)), Some(Tok::LParen)) if k == "exists_other" => {
                self.pos += 2;
                let atom = self.atom()?;
                self.expect(Tok::Comma, "`,`")?;
                let excluded = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(RawLit::ExistsOther(atom, excluded))
            }
            _ => {
                let (line, col) = self.here();
                let t = self.term()?;
                if self.peek() == Some(&Tok::Neq) {
                    self.pos += 1;
                    let r = self.term()?;
                    return Ok(RawLit::Neq(t, r));
                }
                match t {
                    RawTerm::App(name, args) => Ok(RawLit::Pos(RawAtom { name, args, line, col })),
                    RawTerm::Ident(name) => Ok(RawLit::Pos(RawAtom { name, args: Vec::new(), line, col })),
                    _ => Err(ParseError::Syntax { line, col, message: "expected a literal".into() }),
                }
            }
        }
    }
}

/// Tracks arities of predicates and function symbols as they are first seen.
#[derive(Default)]
struct Arities {
    preds: BTreeMap<String, usize>,
    functors: BTreeMap<String, usize>,
}

impl Arities {
    fn pred(&mut self, a: &RawAtom) -> Result<(), ParseError> {
        let expected = *self.preds.entry(a.name.clone()).or_insert(a.args.len());
        if expected != a.args.len() {
            return Err(ParseError::ArityConflict {
                line: a.line,
                col: a.col,
                pred: a.name.clone(),
                expected,
                found: a.args.len(),
            });
        }
        a.args.iter().try_for_each(|t| self.term(t, a.line, a.col))
    }

    fn term(&mut self, t: &RawTerm, line: usize, col: usize) -> Result<(), ParseError> {
        if let RawTerm::App(f, args) = t {
            let expected = *self.functors.entry(f.clone()).or_insert(args.len());
            if expected != args.len() {
                return Err(ParseError::FunctorArityConflict {
                    line,
                    col,
                    functor: f.clone(),
                    expected,
                    found: args.len(),
                });
            }
            args.iter().try_for_each(|a| self.term(a, line, col))?;
        }
        Ok(())
    }
}

fn convert_term(t: &RawTerm, in_rule: bool, line: usize, col: usize) -> Result<Term, ParseError> {
    Ok(match t {
        RawTerm::Quoted(s) | RawTerm::Num(s) => Term::Const(s.clone()),
        RawTerm::Underscore => {
            if !in_rule {
                return Err(ParseError::Syntax { line, col, message: "`_` in a fact".into() });
            }
            Term::Wildcard
        }
        RawTerm::Ident(s) => {
            let upper = s.chars().next().is_some_and(char::is_uppercase);
            if in_rule && !upper {
                Term::Var(s.clone())
            } else {
                Term::Const(s.clone())
            }
        }
        RawTerm::App(f, args) => {
            Term::App(f.clone(), args.iter().map(|a| convert_term(a, in_rule, line, col)).collect::<Result<_, _>>()?)
        }
    })
}

fn convert_atom(a: &RawAtom, in_rule: bool) -> Result<Atom, ParseError> {
    let args = a.args.iter().map(|t| convert_term(t, in_rule, a.line, a.col)).collect::<Result<_, _>>()?;
    Ok(Atom { pred: a.name.clone(), args })
}

/// Extracts `(LABEL)` and `from (ORIGIN)` from comment text.
fn parse_label_comment(text: &str) -> (Option<String>, Option<String>) {
    let text = text.trim();
    let paren = |s: &str| -> Option<String> {
        let s = s.trim_start();
        let rest = s.strip_prefix('(')?;
        let end = rest.find(')')?;
        Some(rest[..end].trim().to_string()).filter(|l| !l.is_empty())
    };
    let label = paren(text);
    let origin = text.find("from").and_then(|i| paren(&text[i + 4..]));
    (label, origin)
}

pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let lexed = lex(source)?;
    let mut p = Parser { toks: lexed.toks, pos: 0 };
    let mut program = Program::default();
    let mut arities = Arities::default();

    while p.pos < p.toks.len() {
        let start_line = p.toks[p.pos].line;
        if p.peek() == Some(&Tok::Dot) && matches!(p.peek_at(1), Some(Tok::Ident(k)) if k == "decl") {
            p.pos += 2;
            let (line, col) = p.here();
            let name = match p.next() {
                Some(Tok::Ident(n)) => n,
                _ => return p.fail("expected predicate name after .decl"),
            };
            p.expect(Tok::Slash, "`/`")?;
            let arity: usize = match p.next() {
                Some(Tok::Num(n)) => {
                    n.parse().map_err(|_| ParseError::Syntax { line, col, message: "bad arity".into() })?
                }
                _ => return p.fail("expected arity"),
            };
            let kind = match p.peek() {
                Some(Tok::Ident(k)) if k == "edb" => Some(PredKind::Edb),
                Some(Tok::Ident(k)) if k == "idb" => Some(PredKind::Idb),
                _ => None,
            };
            if kind.is_some() {
                p.pos += 1;
            }
            if p.peek() == Some(&Tok::Dot) && !matches!(p.peek_at(1), Some(Tok::Ident(k)) if k == "decl") {
                p.pos += 1;
            }
            let fake = RawAtom { name: name.clone(), args: vec![RawTerm::Underscore; arity], line, col };
            arities.pred(&fake)?;
            program.declarations.insert(name, Declaration { arity, kind });
            continue;
        }

        let mut heads = vec![p.atom()?];
        while p.peek() == Some(&Tok::Comma) {
            p.pos += 1;
            heads.push(p.atom()?);
        }
        let is_rule = match p.next() {
            Some(Tok::Dot) => false,
            Some(Tok::Implies) => true,
            _ => {
                p.pos -= 1;
                return p.fail("expected `.` or `:-`");
            }
        };
        for h in &heads {
            arities.pred(h)?;
        }
        if !is_rule {
            for h in &heads {
                let atom = convert_atom(h, false)?;
                program.facts.push(atom);
            }
            continue;
        }
        let mut raw_body = vec![p.literal()?];
        loop {
            match p.next() {
                Some(Tok::Comma) => raw_body.push(p.literal()?),
                Some(Tok::Dot) => break,
                _ => {
                    p.pos -= 1;
                    return p.fail("expected `,` or `.`");
                }
            }
        }
        let end_line = p.toks[p.pos - 1].line;
        let mut hypotheses = Vec::with_capacity(raw_body.len());
        for lit in &raw_body {
            let l = match lit {
                RawLit::Pos(a) => {
                    arities.pred(a)?;
                    Literal::Positive(convert_atom(a, true)?)
                }
                RawLit::Neg(a) => {
                    arities.pred(a)?;
                    Literal::NegatedEdb(convert_atom(a, true)?)
                }
                RawLit::Neq(l, r) => {
                    let (line, col) = (start_line, 1);
                    Literal::Inequality(convert_term(l, true, line, col)?, convert_term(r, true, line, col)?)
                }
                RawLit::Forall(v, d, b) => {
                    arities.pred(d)?;
                    arities.pred(b)?;
                    Literal::UniversalGuard {
                        bound_var: v.clone(),
                        domain: convert_atom(d, true)?,
                        body: convert_atom(b, true)?,
                    }
                }
                RawLit::ExistsOther(a, ex) => {
                    let mut full = a.clone();
                    full.args.push(RawTerm::Underscore);
                    arities.pred(&full)?;
                    let atom = convert_atom(a, true)?;
                    Literal::ExistsOther {
                        pred: atom.pred,
                        prefix: atom.args,
                        excluded: convert_term(ex, true, a.line, a.col)?,
                    }
                }
            };
            hypotheses.push(l);
        }
        let conclusions = heads.iter().map(|h| convert_atom(h, true)).collect::<Result<Vec<_>, _>>()?;
        let mut rule = Rule::new(conclusions, hypotheses);
        for line in start_line..=end_line {
            if let Some(text) = lexed.comments.get(&line) {
                let (label, origin) = parse_label_comment(text);
                if label.is_some() || origin.is_some() {
                    rule.label = label;
                    rule.origin = origin;
                    break;
                }
            }
        }
        program.rules.push(rule);
    }

    if let Some(d) = safety_violations(&program).into_iter().next() {
        return Err(ParseError::Unsafe(d));
    }
    Ok(program)
}

/// Parses a single ground term such as `h1` or `P(a,b)`.
pub fn parse_ground_term(text: &str) -> Result<Term, ParseError> {
    let lexed = lex(text)?;
    let mut p = Parser { toks: lexed.toks, pos: 0 };
    let raw = p.term()?;
    if p.pos != p.toks.len() {
        return p.fail("trailing input after term");
    }
    convert_term(&raw, false, 1, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_hypothesis_rule() {
        let p = parse_program("v_pt(v,h) :- alloc(v,h,m).  // (R1)").unwrap();
        assert_eq!(p.rules.len(), 1);
        let r = &p.rules[0];
        assert_eq!(r.label.as_deref(), Some("R1"));
        assert_eq!(r.conclusions.len(), 1);
        assert_eq!(r.positive_count(), 1);
        let mut vars = r.hypotheses[0].vars();
        vars.sort();
        assert_eq!(vars, vec!["h", "m", "v"]);
    }

    #[test]
    fn parses_multi_conclusion_rule_across_lines() {
        let src = "r(m2,P(p,a)), v_pt(t,P(p,a),h,hc), call(p,P(a,b),m2,P(p,a)) :- vcall(v,s,p,m1),\n\
                   r(m1,P(a,b)), v_pt(v,P(a,b),h,hc), htype(h,ht), lookup(ht,s,m2), this(m2,t). // (R19)";
        let p = parse_program(src).unwrap();
        let r = &p.rules[0];
        assert_eq!(r.conclusions.len(), 3);
        assert_eq!(r.hypotheses.len(), 6);
        assert_eq!(r.label.as_deref(), Some("R19"));
        assert!(matches!(&r.conclusions[0].args[1], Term::App(f, a) if f == "P" && a.len() == 2));
    }

    #[test]
    fn unsafe_rule_is_rejected() {
        let err = parse_program("p(x) :- q(y).").unwrap_err();
        assert!(matches!(err, ParseError::Unsafe(_)), "{err}");
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_program("p(x) :- q(x)\nr(y) :- s(y).").unwrap_err();
        match err {
            ParseError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn arity_conflicts_are_errors() {
        let err = parse_program("p(x) :- q(x).\np(x,y) :- q(x), q(y).").unwrap_err();
        assert!(matches!(err, ParseError::ArityConflict { ref pred, .. } if pred == "p"));
        let err = parse_program("p(F(x)) :- q(x).\np(F(x,y)) :- q(x), q(y).").unwrap_err();
        assert!(matches!(err, ParseError::FunctorArityConflict { ref functor, .. } if functor == "F"));
    }

    #[test]
    fn facts_use_constants_and_function_terms() {
        let p = parse_program("r(main,P(null,null)).\nalloc(o1,h1,foo).").unwrap();
        assert_eq!(p.facts.len(), 2);
        assert_eq!(p.facts[0].to_string(), "r(main,P(null,null))");
        assert!(p.facts.iter().all(Atom::is_ground));
    }

    #[test]
    fn extended_literals() {
        let src = "q(j,h) :- next(_,j), f(_,h), (forall i: next(i,j) => f(i,h)), not s(j,_), m(j,h3), h3 != h.";
        let p = parse_program(src).unwrap();
        let r = &p.rules[0];
        assert!(matches!(r.hypotheses[2], Literal::UniversalGuard { ref bound_var, .. } if bound_var == "i"));
        assert!(matches!(r.hypotheses[3], Literal::NegatedEdb(_)));
        assert!(matches!(r.hypotheses[5], Literal::Inequality(..)));
    }

    #[test]
    fn declarations_pin_kind() {
        let p = parse_program(".decl e/2 edb\n.decl t/2 idb\nt(x,y) :- e(x,y).").unwrap();
        assert_eq!(p.declarations["e"].kind, Some(PredKind::Edb));
        assert_eq!(p.declarations["t"].arity, 2);
    }

    #[test]
    fn ground_term_parsing() {
        assert_eq!(parse_ground_term("h1").unwrap(), Term::constant("h1"));
        assert_eq!(
            parse_ground_term("P(a,b)").unwrap(),
            Term::App("P".into(), vec![Term::constant("a"), Term::constant("b")])
        );
    }
}
