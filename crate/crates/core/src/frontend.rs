//! Toy IR to EDB facts.
//!
//! ```text
//! lookup T sig m          subtype T S          elemtype T E
//! method foo(this:T, a1:T2) -> ret
//!   L1: o1 = new Obj
//!       o2 = o1            x.f = y      x = y.f      x = phi(a,b)
//!       x[] = y            x = y[]      r = v.sig(a) v.sig(a)
//!       throw v            catch T v    return v     skip
//!       goto L1            if * goto L1
//! ```
//!
//! One statement per line, `#` starts a comment. Every statement except
//! `catch` gets a fresh point `p<n>`; `catch T v` installs a handler on the
//! statement before it. Variable names are global.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    New(String, Option<String>),
    Move(String, String),
    Store(String, String, String),
    Load(String, String, String),
    Phi(String, String, String),
    VCall(Option<String>, String, String, Vec<String>),
    AStore(String, String),
    ALoad(String, String),
    Throw(String),
    Catch(String, String),
    Return(String),
    Goto(String),
    Branch(String),
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub line: usize,
    pub label: Option<String>,
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Method {
    pub line: usize,
    pub name: String,
    pub this: Option<(String, String)>,
    pub formals: Vec<String>,
    pub ret: Option<String>,
    pub body: Vec<Statement>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ToyProgram {
    pub methods: Vec<Method>,
    pub lookups: Vec<(usize, String, String, String)>,
    pub subtypes: Vec<(String, String)>,
    pub elemtypes: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ExtractError {
    pub line: usize,
    pub kind: ErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax(String),
    UndefinedVariable(String),
    UndefinedMethod(String),
    UndefinedLabel(String),
    DuplicatePoint(String),
    DuplicateMethod(String),
    StrayCatch,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorKind::Syntax(s) => write!(f, "cannot parse `{s}`"),
            ErrorKind::UndefinedVariable(v) => write!(f, "undefined variable `{v}`"),
            ErrorKind::UndefinedMethod(m) => write!(f, "undefined method `{m}`"),
            ErrorKind::UndefinedLabel(l) => write!(f, "undefined label `{l}`"),
            ErrorKind::DuplicatePoint(l) => write!(f, "duplicate label `{l}`"),
            ErrorKind::DuplicateMethod(m) => write!(f, "duplicate method `{m}`"),
            ErrorKind::StrayCatch => write!(f, "`catch` must follow a statement"),
        }
    }
}

fn err(line: usize, kind: ErrorKind) -> ExtractError {
    ExtractError { line, kind }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn ident(s: &str, line: usize, whole: &str) -> Result<String, ExtractError> {
    let s = s.trim();
    if is_ident(s) {
        Ok(s.to_string())
    } else {
        Err(err(line, ErrorKind::Syntax(whole.to_string())))
    }
}

fn ident_list(s: &str, line: usize, whole: &str) -> Result<Vec<String>, ExtractError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|a| ident(a, line, whole)).collect()
}

/// `name(args)` split into name and inner text.
fn call_parts(s: &str) -> Option<(&str, &str)> {
    let s = s.trim();
    let open = s.find('(')?;
    let inner = s.strip_suffix(')')?;
    Some((&s[..open], &inner[open + 1..]))
}

fn parse_header(rest: &str, line: usize, whole: &str) -> Result<Method, ExtractError> {
    let (sig, ret) = match rest.split_once("->") {
        Some((s, r)) => (s, Some(ident(r, line, whole)?)),
        None => (rest, None),
    };
    let (name, params) = call_parts(sig).ok_or_else(|| err(line, ErrorKind::Syntax(whole.into())))?;
    let mut m =
        Method { line, name: ident(name, line, whole)?, this: None, formals: Vec::new(), ret, body: Vec::new() };
    for p in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (v, ty) = match p.split_once(':') {
            Some((v, t)) => (ident(v, line, whole)?, Some(ident(t, line, whole)?)),
            None => (ident(p, line, whole)?, None),
        };
        if v == "this" && m.formals.is_empty() && m.this.is_none() {
            let ty = ty.ok_or_else(|| err(line, ErrorKind::Syntax(whole.into())))?;
            m.this = Some((v, ty));
        } else {
            m.formals.push(v);
        }
    }
    Ok(m)
}

fn parse_body(text: &str, line: usize) -> Result<Body, ExtractError> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let id = |s: &str| ident(s, line, text);
    let bad = || err(line, ErrorKind::Syntax(text.to_string()));
    match words.as_slice() {
        ["skip"] => return Ok(Body::Skip),
        ["goto", l] => return Ok(Body::Goto(id(l)?)),
        ["if", "*", "goto", l] => return Ok(Body::Branch(id(l)?)),
        ["throw", v] => return Ok(Body::Throw(id(v)?)),
        ["return", v] => return Ok(Body::Return(id(v)?)),
        ["catch", t, v] => return Ok(Body::Catch(id(t)?, id(v)?)),
        _ => {}
    }
    let Some((lhs, rhs)) = text.split_once('=') else {
        let (callee, args) = call_parts(text).ok_or_else(bad)?;
        let (v, sig) = callee.split_once('.').ok_or_else(bad)?;
        return Ok(Body::VCall(None, id(v)?, id(sig)?, ident_list(args, line, text)?));
    };
    let (lhs, rhs) = (lhs.trim(), rhs.trim());
    if let Some(arr) = lhs.strip_suffix("[]") {
        return Ok(Body::AStore(id(arr)?, id(rhs)?));
    }
    if let Some((v, f)) = lhs.split_once('.') {
        return Ok(Body::Store(id(v)?, id(f)?, id(rhs)?));
    }
    let to = id(lhs)?;
    let rw: Vec<&str> = rhs.split_whitespace().collect();
    match rw.as_slice() {
        ["new"] => return Ok(Body::New(to, None)),
        ["new", t] => return Ok(Body::New(to, Some(id(t)?))),
        _ => {}
    }
    if let Some(arr) = rhs.strip_suffix("[]") {
        return Ok(Body::ALoad(to, id(arr)?));
    }
    if let Some((callee, args)) = call_parts(rhs) {
        if callee.trim() == "phi" {
            let a = ident_list(args, line, text)?;
            let [x, y] = <[String; 2]>::try_from(a).map_err(|_| bad())?;
            return Ok(Body::Phi(to, x, y));
        }
        let (v, sig) = callee.split_once('.').ok_or_else(bad)?;
        return Ok(Body::VCall(Some(to), id(v)?, id(sig)?, ident_list(args, line, text)?));
    }
    if let Some((v, f)) = rhs.split_once('.') {
        return Ok(Body::Load(to, id(v)?, id(f)?));
    }
    Ok(Body::Move(to, id(rhs)?))
}

pub fn parse_toy(source: &str) -> Result<ToyProgram, ExtractError> {
    let mut prog = ToyProgram::default();
    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        let text = raw.split('#').next().unwrap().trim();
        if text.is_empty() {
            continue;
        }
        let (head, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
        let words: Vec<&str> = rest.split_whitespace().collect();
        match (head, words.as_slice()) {
            ("method", _) => {
                prog.methods.push(parse_header(rest, line, text)?);
                continue;
            }
            ("lookup", [t, s, m]) => {
                prog.lookups.push((line, ident(t, line, text)?, ident(s, line, text)?, ident(m, line, text)?));
                continue;
            }
            ("subtype", [t, s]) => {
                prog.subtypes.push((ident(t, line, text)?, ident(s, line, text)?));
                continue;
            }
            ("elemtype", [t, e]) => {
                prog.elemtypes.push((ident(t, line, text)?, ident(e, line, text)?));
                continue;
            }
            _ => {}
        }
        let (label, stmt) = match text.split_once(':') {
            Some((l, s)) if is_ident(l.trim()) => (Some(l.trim().to_string()), s.trim()),
            _ => (None, text),
        };
        let body = parse_body(stmt, line)?;
        let m = prog.methods.last_mut().ok_or_else(|| err(line, ErrorKind::Syntax(text.into())))?;
        m.body.push(Statement { line, label, body });
    }
    Ok(prog)
}

/// Whether the statement relations carry their program point as a first column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Flavor {
    #[default]
    Insensitive,
    FlowSensitive,
}

/// Facts per predicate in emission order, without duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactSet {
    pub relations: BTreeMap<String, Vec<Vec<String>>>,
    seen: BTreeSet<(String, Vec<String>)>,
}

impl FactSet {
    fn push(&mut self, pred: &str, args: &[&str]) {
        let row: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        if self.seen.insert((pred.to_string(), row.clone())) {
            self.relations.entry(pred.to_string()).or_default().push(row);
        }
    }

    pub fn get(&self, pred: &str) -> &[Vec<String>] {
        self.relations.get(pred).map_or(&[], |v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    pub fn write_dir(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (pred, rows) in &self.relations {
            let mut text = String::new();
            for r in rows {
                text.push_str(&r.join("\t"));
                text.push('\n');
            }
            std::fs::write(dir.join(format!("{pred}.facts")), text)?;
        }
        Ok(())
    }
}

fn check_vars(m: &Method) -> Result<(), ExtractError> {
    let mut defined: BTreeSet<&str> = m.formals.iter().map(String::as_str).collect();
    defined.extend(m.this.iter().map(|(v, _)| v.as_str()));
    defined.extend(m.ret.as_deref());
    for s in &m.body {
        match &s.body {
            Body::New(v, _) | Body::Move(v, _) | Body::Load(v, ..) | Body::Phi(v, ..) | Body::ALoad(v, _) => {
                defined.insert(v);
            }
            Body::VCall(Some(v), ..) | Body::Catch(_, v) => {
                defined.insert(v);
            }
            _ => {}
        }
    }
    for s in &m.body {
        let used: Vec<&String> = match &s.body {
            Body::Move(_, a) | Body::ALoad(_, a) | Body::Load(_, a, _) | Body::Throw(a) | Body::Return(a) => vec![a],
            Body::Store(a, _, b) | Body::Phi(_, a, b) | Body::AStore(a, b) => vec![a, b],
            Body::VCall(_, v, _, args) => std::iter::once(v).chain(args).collect(),
            _ => vec![],
        };
        if let Some(v) = used.into_iter().find(|v| !defined.contains(v.as_str())) {
            return Err(err(s.line, ErrorKind::UndefinedVariable(v.clone())));
        }
    }
    Ok(())
}

pub fn extract_facts(prog: &ToyProgram, flavor: Flavor) -> Result<FactSet, ExtractError> {
    let mut out = FactSet::default();
    let mut names = BTreeSet::new();
    for m in &prog.methods {
        if !names.insert(m.name.as_str()) {
            return Err(err(m.line, ErrorKind::DuplicateMethod(m.name.clone())));
        }
    }
    for (line, _, _, m) in &prog.lookups {
        if !names.contains(m.as_str()) {
            return Err(err(*line, ErrorKind::UndefinedMethod(m.clone())));
        }
    }
    let flow = flavor == Flavor::FlowSensitive;
    let mut point = 0usize;
    let mut heap = 0usize;
    for m in &prog.methods {
        check_vars(m)?;
        let name = m.name.as_str();
        if let Some((v, _)) = &m.this {
            out.push("this", &[name, v]);
        }
        for (i, v) in m.formals.iter().enumerate() {
            out.push("farg", &[name, &(i + 1).to_string(), v]);
        }
        if let Some(r) = &m.ret {
            out.push("fret", &[name, r]);
        }
        // Points and labels first, so that forward gotos resolve.
        let mut points: Vec<Option<String>> = Vec::new();
        let mut labels: BTreeMap<&str, String> = BTreeMap::new();
        for s in &m.body {
            let p = if matches!(s.body, Body::Catch(..)) {
                None
            } else {
                point += 1;
                Some(format!("p{point}"))
            };
            if let Some(l) = &s.label {
                let target = p.clone().ok_or_else(|| err(s.line, ErrorKind::Syntax(format!("{l}: catch"))))?;
                if labels.insert(l, target).is_some() {
                    return Err(err(s.line, ErrorKind::DuplicatePoint(l.clone())));
                }
            }
            points.push(p);
        }
        let mut prev: Option<(&str, bool)> = None;
        for (s, p) in m.body.iter().zip(&points) {
            let Some(p) = p.as_deref() else {
                let Body::Catch(t, v) = &s.body else { unreachable!() };
                let (at, _) = prev.ok_or_else(|| err(s.line, ErrorKind::StrayCatch))?;
                out.push("catch", &[t, at, v]);
                continue;
            };
            out.push("in", &[p, name]);
            if let Some((q, true)) = prev {
                out.push("next", &[q, p]);
            }
            let at = |args: &[&str]| -> Vec<String> {
                let mut v: Vec<String> = if flow { vec![p.to_string()] } else { Vec::new() };
                v.extend(args.iter().map(|s| s.to_string()));
                v
            };
            let mut falls = true;
            let emit = |out: &mut FactSet, pred: &str, args: Vec<String>| {
                let refs: Vec<&str> = args.iter().map(String::as_str).collect();
                out.push(pred, &refs);
            };
            match &s.body {
                Body::New(v, ty) => {
                    heap += 1;
                    let h = format!("h{heap}");
                    emit(&mut out, "alloc", at(&[v, &h, name]));
                    if let Some(t) = ty {
                        out.push("htype", &[&h, t]);
                    }
                }
                Body::Move(to, from) => emit(&mut out, "move", at(&[to, from])),
                Body::Store(v, f, from) => emit(&mut out, "store", at(&[v, f, from])),
                Body::Load(to, v, f) => emit(&mut out, "load", at(&[to, v, f])),
                Body::Phi(to, a, b) => emit(&mut out, "phi", at(&[to, a, b])),
                Body::VCall(ret, v, sig, args) => {
                    out.push("vcall", &[v, sig, p, name]);
                    for (i, a) in args.iter().enumerate() {
                        out.push("aarg", &[p, &(i + 1).to_string(), a]);
                    }
                    if let Some(r) = ret {
                        out.push("aret", &[p, r]);
                    }
                }
                Body::AStore(arr, v) => out.push("astore", &[arr, v]),
                Body::ALoad(v, arr) => out.push("aload", &[v, arr]),
                Body::Throw(v) => out.push("throw", &[p, v]),
                Body::Return(v) => out.push("fret", &[name, v]),
                Body::Goto(l) | Body::Branch(l) => {
                    let target =
                        labels.get(l.as_str()).ok_or_else(|| err(s.line, ErrorKind::UndefinedLabel(l.clone())))?;
                    out.push("next", &[p, target]);
                    falls = matches!(s.body, Body::Branch(_));
                }
                Body::Skip | Body::Catch(..) => {}
            }
            prev = Some((p, falls));
        }
    }
    for (_, t, s, m) in &prog.lookups {
        out.push("lookup", &[t, s, m]);
    }
    for (t, s) in &prog.subtypes {
        out.push("stype", &[t, s]);
    }
    for (t, e) in &prog.elemtypes {
        out.push("etype", &[t, e]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOO: &str = "
method foo()
      o1 = new Object
      if * goto other
      o2 = o1
      goto done
other: o2 = new Object
done: skip
";

    fn rows(f: &FactSet, pred: &str) -> Vec<String> {
        f.get(pred).iter().map(|r| r.join(",")).collect()
    }

    #[test]
    fn foo_facts() {
        let f = extract_facts(&parse_toy(FOO).unwrap(), Flavor::Insensitive).unwrap();
        assert_eq!(rows(&f, "alloc"), ["o1,h1,foo", "o2,h2,foo"]);
        assert_eq!(rows(&f, "move"), ["o2,o1"]);
        assert_eq!(rows(&f, "next"), ["p1,p2", "p2,p5", "p2,p3", "p3,p4", "p4,p6", "p5,p6"]);
    }

    #[test]
    fn straight_line_next() {
        let f = extract_facts(&parse_toy("method m()\n x = new\n y = x\n z = y\n").unwrap(), Flavor::FlowSensitive)
            .unwrap();
        assert_eq!(rows(&f, "next"), ["p1,p2", "p2,p3"]);
        assert_eq!(rows(&f, "alloc"), ["p1,x,h1,m"]);
        assert_eq!(rows(&f, "move"), ["p2,y,x", "p3,z,y"]);
    }

    #[test]
    fn empty_method() {
        let f = extract_facts(&parse_toy("method m()\n").unwrap(), Flavor::Insensitive).unwrap();
        assert!(f.is_empty());
    }

    #[test]
    fn calls_and_handlers() {
        let src = "lookup T run run\nmethod run(this:T, a) -> r\n r = a\nmethod main()\n x = new T\n y = x.run(x)\n catch T e\n throw e\n";
        let f = extract_facts(&parse_toy(src).unwrap(), Flavor::Insensitive).unwrap();
        assert_eq!(rows(&f, "this"), ["run,this"]);
        assert_eq!(rows(&f, "farg"), ["run,1,a"]);
        assert_eq!(rows(&f, "vcall"), ["x,run,p3,main"]);
        assert_eq!(rows(&f, "aarg"), ["p3,1,x"]);
        assert_eq!(rows(&f, "aret"), ["p3,y"]);
        assert_eq!(rows(&f, "catch"), ["T,p3,e"]);
        assert_eq!(rows(&f, "htype"), ["h1,T"]);
        assert_eq!(rows(&f, "lookup"), ["T,run,run"]);
    }

    #[test]
    fn errors() {
        let kind = |src: &str| parse_toy(src).and_then(|p| extract_facts(&p, Flavor::Insensitive)).unwrap_err().kind;
        assert_eq!(kind("method m()\n x = y\n"), ErrorKind::UndefinedVariable("y".into()));
        assert_eq!(kind("lookup T s g\nmethod m()\n"), ErrorKind::UndefinedMethod("g".into()));
        assert_eq!(kind("method m()\nL: skip\nL: skip\n"), ErrorKind::DuplicatePoint("L".into()));
        assert_eq!(kind("method m()\ngoto Q\n"), ErrorKind::UndefinedLabel("Q".into()));
        assert!(matches!(kind("method m()\n x = = y\n"), ErrorKind::Syntax(_)));
    }
}
