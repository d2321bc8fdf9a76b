//! Text formats for programs, automata and lossy channel systems.
//!
//! All three formats share one lexer: identifiers, a handful of symbols and
//! `#` comments running to the end of the line. Program files are free-form
//! token streams; automaton and channel-system files are line oriented.
//!
//! ```text
//! domain nat
//! vars x y
//!
//! thread t1 {
//!   regs a b
//!   init q0
//!   q0 -> q1 : a := *
//!   q1 -> q2 : assume a <2 b      # a + 2 < b
//!   q2 -> q3 : write x a
//! }
//!
//! target t1:q3
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::dfa::Dfa;
use crate::dlcs::{DlcsModel, DlcsOp, DlcsTransition};
use crate::program::{DefLocation, Op, Program, ProgramDef, Relation, ThreadDef, TransitionDef};

/// A 1-based position in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DslErrorKind {
    Syntax,
    Validation,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct DslError {
    pub kind: DslErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

type Result<T> = std::result::Result<T, DslError>;

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Rel(Relation),
    Arrow,
    Define,
    Colon,
    Star,
    LBrace,
    RBrace,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Rel(r) => write!(f, "`{r}`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Define => f.write_str("`:=`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Star => f.write_str("`*`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let start = i;
            let span = |len: usize| SourceSpan {
                line: li + 1,
                column: start + 1,
                length: len,
            };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    span: span(i - start),
                });
                continue;
            }
            let next = chars.get(i + 1).copied();
            let (tok, len) = match (c, next) {
                ('-', Some('>')) => (Tok::Arrow, 2),
                (':', Some('=')) => (Tok::Define, 2),
                (':', _) => (Tok::Colon, 1),
                ('*', _) => (Tok::Star, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('=', _) => (Tok::Rel(Relation::Eq), 1),
                ('!', Some('=')) => (Tok::Rel(Relation::Neq), 2),
                ('<', _) => {
                    let mut j = i + 1;
                    let le = chars.get(j) == Some(&'=');
                    if le {
                        j += 1;
                    }
                    let digits_start = j;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    let n = if j > digits_start {
                        let s: String = chars[digits_start..j].iter().collect();
                        s.parse::<u32>().map_err(|_| DslError {
                            kind: DslErrorKind::Syntax,
                            span: span(j - start),
                            message: format!("gap `{s}` is too large"),
                        })?
                    } else {
                        0
                    };
                    let rel = if le { Relation::Le(n) } else { Relation::Lt(n) };
                    (Tok::Rel(rel), j - start)
                }
                _ => {
                    return Err(DslError {
                        kind: DslErrorKind::Syntax,
                        span: span(1),
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            i += len;
            out.push(Token {
                tok,
                span: span(len),
            });
        }
    }
    Ok(out)
}

/// Span just past the end of the input, for "unexpected end" errors.
fn eof_span(text: &str) -> SourceSpan {
    let lines: Vec<&str> = text.lines().collect();
    match lines.last() {
        None => SourceSpan {
            line: 1,
            column: 1,
            length: 0,
        },
        Some(l) => SourceSpan {
            line: lines.len(),
            column: l.chars().count() + 1,
            length: 0,
        },
    }
}

const KEYWORDS: &[&str] = &[
    "domain", "nat", "vars", "thread", "regs", "init", "target", "assume", "read", "write",
    "arw",
];

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    eof: SourceSpan,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn span(&self) -> SourceSpan {
        self.peek().map_or(self.eof, |t| t.span)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(DslError {
            kind: DslErrorKind::Syntax,
            span: self.span(),
            message: message.into(),
        })
    }

    fn found(&self) -> String {
        self.peek()
            .map_or_else(|| "end of input".to_owned(), |t| t.tok.to_string())
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<SourceSpan> {
        if self.is_keyword(kw) {
            let span = self.span();
            self.pos += 1;
            Ok(span)
        } else {
            self.error(format!("expected `{kw}`, found {}", self.found()))
        }
    }

    fn ident(&mut self) -> Result<(String, SourceSpan)> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s),
                span,
            }) if !KEYWORDS.contains(&s.as_str()) => {
                self.pos += 1;
                Ok((s.clone(), *span))
            }
            _ => self.error(format!("expected identifier, found {}", self.found())),
        }
    }

    fn is_ident(&self) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if !KEYWORDS.contains(&s.as_str()))
    }

    fn symbol(&mut self, want: Tok) -> Result<SourceSpan> {
        match self.peek() {
            Some(t) if t.tok == want => {
                self.pos += 1;
                Ok(t.span)
            }
            _ => self.error(format!("expected {want}, found {}", self.found())),
        }
    }

    fn relation(&mut self) -> Result<Relation> {
        match self.peek() {
            Some(Token {
                tok: Tok::Rel(r), ..
            }) => {
                self.pos += 1;
                Ok(*r)
            }
            _ => self.error(format!("expected relation, found {}", self.found())),
        }
    }
}

// ---------------------------------------------------------------------------
// Programs
// ---------------------------------------------------------------------------

fn parse_op(cur: &mut Cursor<'_>) -> Result<Op<String, String>> {
    if cur.is_keyword("assume") {
        cur.pos += 1;
        let (a, _) = cur.ident()?;
        let rel = cur.relation()?;
        let (b, _) = cur.ident()?;
        return Ok(Op::Guard(rel, a, b));
    }
    if cur.is_keyword("read") || cur.is_keyword("write") {
        let read = cur.is_keyword("read");
        cur.pos += 1;
        let (x, _) = cur.ident()?;
        let (r, _) = cur.ident()?;
        return Ok(if read { Op::Read(x, r) } else { Op::Write(x, r) });
    }
    if cur.is_keyword("arw") {
        cur.pos += 1;
        let (x, _) = cur.ident()?;
        let (a, _) = cur.ident()?;
        let (b, _) = cur.ident()?;
        return Ok(Op::Arw(x, a, b));
    }
    let (dst, _) = cur.ident()?;
    cur.symbol(Tok::Define)?;
    if matches!(cur.peek(), Some(Token { tok: Tok::Star, .. })) {
        cur.pos += 1;
        Ok(Op::NewValue(dst))
    } else {
        let (src, _) = cur.ident()?;
        Ok(Op::Assign(dst, src))
    }
}

/// Spans of the pieces a validation diagnostic can point at.
#[derive(Default)]
struct ProgramSpans {
    vars: Option<SourceSpan>,
    threads: Vec<SourceSpan>,
    transitions: Vec<Vec<SourceSpan>>,
    target: Option<SourceSpan>,
}

fn parse_program_def(text: &str) -> Result<(ProgramDef, ProgramSpans)> {
    let toks = lex(text)?;
    let mut cur = Cursor {
        toks: &toks,
        pos: 0,
        eof: eof_span(text),
    };
    let mut spans = ProgramSpans::default();
    let mut def = ProgramDef::default();

    cur.keyword("domain")?;
    cur.keyword("nat")?;
    while cur.is_keyword("vars") {
        let span = cur.keyword("vars")?;
        spans.vars.get_or_insert(span);
        if !cur.is_ident() {
            return cur.error(format!("expected variable name, found {}", cur.found()));
        }
        while cur.is_ident() {
            def.vars.push(cur.ident()?.0);
        }
    }
    if !cur.is_keyword("thread") {
        return cur.error(format!("expected `thread`, found {}", cur.found()));
    }
    while cur.is_keyword("thread") {
        cur.pos += 1;
        let (name, name_span) = cur.ident()?;
        cur.symbol(Tok::LBrace)?;
        cur.keyword("regs")?;
        let mut regs = Vec::new();
        while cur.is_ident() {
            regs.push(cur.ident()?.0);
        }
        cur.keyword("init")?;
        let (init, _) = cur.ident()?;
        let mut thread = ThreadDef {
            name,
            regs,
            init,
            transitions: Vec::new(),
        };
        let mut tspans = Vec::new();
        while cur.is_ident() {
            let (from, span) = cur.ident()?;
            cur.symbol(Tok::Arrow)?;
            let (to, _) = cur.ident()?;
            cur.symbol(Tok::Colon)?;
            let op = parse_op(&mut cur)?;
            thread.transitions.push(TransitionDef { from, op, to });
            tspans.push(span);
        }
        cur.symbol(Tok::RBrace)?;
        def.threads.push(thread);
        spans.threads.push(name_span);
        spans.transitions.push(tspans);
    }
    if cur.is_keyword("target") {
        spans.target = Some(cur.keyword("target")?);
        let (t, _) = cur.ident()?;
        cur.symbol(Tok::Colon)?;
        let (s, _) = cur.ident()?;
        def.target = Some((t, s));
    }
    if cur.peek().is_some() {
        return cur.error(format!("unexpected {}", cur.found()));
    }
    Ok((def, spans))
}

/// Parses and validates a program. The `target` line, if present, becomes
/// [`Program::target`].
pub fn parse_program(text: &str) -> Result<Program> {
    let (def, spans) = parse_program_def(text)?;
    def.build().map_err(|diags| {
        let d = &diags[0];
        let first = SourceSpan {
            line: 1,
            column: 1,
            length: 0,
        };
        let span = match d.location {
            DefLocation::Vars => spans.vars.unwrap_or(first),
            DefLocation::Thread(t) => spans.threads[t],
            DefLocation::Transition { thread, index } => spans.transitions[thread][index],
            DefLocation::Target => spans.target.unwrap_or(first),
        };
        DslError {
            kind: DslErrorKind::Validation,
            span,
            message: d.message.clone(),
        }
    })
}

/// Canonical text of `p`; [`parse_program`] reads it back to an equal value.
pub fn render_program(p: &Program) -> String {
    let mut s = String::from("domain nat\n");
    if !p.vars().is_empty() {
        let _ = writeln!(s, "vars {}", p.vars().join(" "));
    }
    for t in p.threads() {
        let _ = writeln!(s, "\nthread {} {{", t.name);
        let regs: Vec<&str> = t.regs.iter().map(|r| p.reg_name(*r)).collect();
        if regs.is_empty() {
            s.push_str("  regs\n");
        } else {
            let _ = writeln!(s, "  regs {}", regs.join(" "));
        }
        let _ = writeln!(s, "  init {}", t.states[t.init.index()]);
        for tr in &t.transitions {
            let _ = writeln!(
                s,
                "  {} -> {} : {}",
                t.states[tr.from.index()],
                t.states[tr.to.index()],
                p.op_text(&tr.op)
            );
        }
        s.push_str("}\n");
    }
    if let Some(target) = p.target() {
        let (t, st) = p.target_name(target);
        let _ = writeln!(s, "\ntarget {t}:{st}");
    }
    s
}

// ---------------------------------------------------------------------------
// Line-oriented formats
// ---------------------------------------------------------------------------

fn lines_of(toks: &[Token]) -> Vec<&[Token]> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=toks.len() {
        if i == toks.len() || toks[i].span.line != toks[start].span.line {
            if start < i {
                out.push(&toks[start..i]);
            }
            start = i;
        }
    }
    out
}

fn line_error<T>(span: SourceSpan, message: impl Into<String>) -> Result<T> {
    Err(DslError {
        kind: DslErrorKind::Syntax,
        span,
        message: message.into(),
    })
}

fn validation_error<T>(span: SourceSpan, message: impl Into<String>) -> Result<T> {
    Err(DslError {
        kind: DslErrorKind::Validation,
        span,
        message: message.into(),
    })
}

fn ident_at(line: &[Token], i: usize, what: &str) -> Result<(String, SourceSpan)> {
    match line.get(i) {
        Some(Token {
            tok: Tok::Ident(s),
            span,
        }) => Ok((s.clone(), *span)),
        Some(t) => line_error(t.span, format!("expected {what}, found {}", t.tok)),
        None => {
            let last = line.last().expect("nonempty line").span;
            line_error(
                SourceSpan {
                    column: last.column + last.length,
                    length: 0,
                    ..last
                },
                format!("expected {what} at end of line"),
            )
        }
    }
}

fn idents(line: &[Token], from: usize) -> Result<Vec<(String, SourceSpan)>> {
    (from..line.len())
        .map(|i| ident_at(line, i, "identifier"))
        .collect()
}

fn expect_len(line: &[Token], n: usize) -> Result<()> {
    if line.len() > n {
        return line_error(line[n].span, format!("unexpected {}", line[n].tok));
    }
    Ok(())
}

fn lookup(
    names: &HashMap<String, usize>,
    (name, span): &(String, SourceSpan),
    what: &str,
) -> Result<usize> {
    match names.get(name) {
        Some(i) => Ok(*i),
        None => validation_error(*span, format!("undeclared {what} `{name}`")),
    }
}

fn declare(
    list: Vec<(String, SourceSpan)>,
    what: &str,
) -> Result<(Vec<String>, HashMap<String, usize>)> {
    let mut names = Vec::new();
    let mut index = HashMap::new();
    for (n, span) in list {
        if index.insert(n.clone(), names.len()).is_some() {
            return validation_error(span, format!("{what} `{n}` declared twice"));
        }
        names.push(n);
    }
    Ok((names, index))
}

/// Parses an automaton:
///
/// ```text
/// dfa
/// alphabet a b
/// states s0 s1
/// init s0
/// final s1
/// trans s0 a s1
/// ```
pub fn parse_dfa(text: &str) -> Result<Dfa> {
    let toks = lex(text)?;
    let lines = lines_of(&toks);
    let Some(header) = lines.first() else {
        return line_error(eof_span(text), "expected `dfa`");
    };
    let (kw, span) = ident_at(header, 0, "`dfa`")?;
    if kw != "dfa" {
        return line_error(span, format!("expected `dfa`, found `{kw}`"));
    }
    expect_len(header, 1)?;

    let mut alphabet = None;
    let mut states = None;
    let mut init = None;
    let mut finals = Vec::new();
    let mut trans = Vec::new();
    for line in &lines[1..] {
        let (kw, span) = ident_at(line, 0, "keyword")?;
        match kw.as_str() {
            "alphabet" => alphabet = Some(declare(idents(line, 1)?, "letter")?),
            "states" => states = Some(declare(idents(line, 1)?, "state")?),
            "init" => {
                expect_len(line, 2)?;
                init = Some(ident_at(line, 1, "state")?);
            }
            "final" => finals.extend(idents(line, 1)?),
            "trans" => {
                expect_len(line, 4)?;
                trans.push((
                    ident_at(line, 1, "state")?,
                    ident_at(line, 2, "letter")?,
                    ident_at(line, 3, "state")?,
                ));
            }
            _ => return line_error(span, format!("unknown keyword `{kw}`")),
        }
    }
    let eof = eof_span(text);
    let Some((alphabet, letter_ix)) = alphabet else {
        return line_error(eof, "missing `alphabet` line");
    };
    let Some((states, state_ix)) = states else {
        return line_error(eof, "missing `states` line");
    };
    let Some(init) = init else {
        return line_error(eof, "missing `init` line");
    };
    let init = lookup(&state_ix, &init, "state")?;
    let finals = finals
        .iter()
        .map(|f| lookup(&state_ix, f, "state"))
        .collect::<Result<BTreeSet<_>>>()?;
    let transitions = trans
        .iter()
        .map(|(p, a, q)| {
            Ok((
                lookup(&state_ix, p, "state")?,
                lookup(&letter_ix, a, "letter")?,
                lookup(&state_ix, q, "state")?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dfa {
        states,
        alphabet,
        transitions,
        init,
        finals,
    })
}

pub fn render_dfa(d: &Dfa) -> String {
    let mut s = String::from("dfa\n");
    let _ = writeln!(s, "alphabet {}", d.alphabet.join(" "));
    let _ = writeln!(s, "states {}", d.states.join(" "));
    let _ = writeln!(s, "init {}", d.states[d.init]);
    let finals: Vec<&str> = d.finals.iter().map(|f| d.states[*f].as_str()).collect();
    let _ = writeln!(s, "final {}", finals.join(" "));
    for (p, a, q) in &d.transitions {
        let _ = writeln!(s, "trans {} {} {}", d.states[*p], d.alphabet[*a], d.states[*q]);
    }
    s
}

/// Parses a lossy channel system:
///
/// ```text
/// dlcs
/// states q0 q1 q2
/// vars x y
/// alphabet a
/// init q0
/// target q2
/// q0 -> q1 : send a x
/// q1 -> q2 : recv a y
/// ```
///
/// Operations: `x := y`, `x := *`, `assume x = y`, `assume x != y`,
/// `send a x`, `recv a x`.
pub fn parse_dlcs(text: &str) -> Result<DlcsModel> {
    let toks = lex(text)?;
    let lines = lines_of(&toks);
    let Some(header) = lines.first() else {
        return line_error(eof_span(text), "expected `dlcs`");
    };
    let (kw, span) = ident_at(header, 0, "`dlcs`")?;
    if kw != "dlcs" {
        return line_error(span, format!("expected `dlcs`, found `{kw}`"));
    }
    expect_len(header, 1)?;

    let mut states = None;
    let mut vars = None;
    let mut alphabet = None;
    let mut init = None;
    let mut target = None;
    let mut raw = Vec::new();
    for line in &lines[1..] {
        let (kw, span) = ident_at(line, 0, "keyword or state")?;
        match kw.as_str() {
            "states" => states = Some(declare(idents(line, 1)?, "state")?),
            "vars" => vars = Some(declare(idents(line, 1)?, "variable")?),
            "alphabet" => alphabet = Some(declare(idents(line, 1)?, "letter")?),
            "init" => {
                expect_len(line, 2)?;
                init = Some(ident_at(line, 1, "state")?);
            }
            "target" => {
                expect_len(line, 2)?;
                target = Some(ident_at(line, 1, "state")?);
            }
            _ => {
                match line.get(1) {
                    Some(Token {
                        tok: Tok::Arrow, ..
                    }) => {}
                    _ => return line_error(span, format!("unknown keyword `{kw}`")),
                }
                raw.push(*line);
            }
        }
    }
    let eof = eof_span(text);
    let Some((states, sx)) = states else {
        return line_error(eof, "missing `states` line");
    };
    let (vars, vx) = vars.unwrap_or_default();
    let (alphabet, ax) = alphabet.unwrap_or_default();
    let Some(init) = init else {
        return line_error(eof, "missing `init` line");
    };
    let init = lookup(&sx, &init, "state")?;
    let target = target.map(|t| lookup(&sx, &t, "state")).transpose()?;

    let mut transitions = Vec::new();
    for line in raw {
        let from = lookup(&sx, &ident_at(line, 0, "state")?, "state")?;
        let to = lookup(&sx, &ident_at(line, 2, "state")?, "state")?;
        match line.get(3) {
            Some(Token {
                tok: Tok::Colon, ..
            }) => {}
            Some(t) => return line_error(t.span, format!("expected `:`, found {}", t.tok)),
            None => return line_error(line[2].span, "expected `:` after target state"),
        }
        let rest = &line[4..];
        let var = |i: usize| -> Result<usize> { lookup(&vx, &ident_at(rest, i, "variable")?, "variable") };
        let letter = |i: usize| -> Result<usize> { lookup(&ax, &ident_at(rest, i, "letter")?, "letter") };
        if rest.is_empty() {
            return line_error(line[3].span, "expected operation after `:`");
        }
        let op = match &rest[0].tok {
            Tok::Ident(k) if k == "send" || k == "recv" => {
                expect_len(rest, 3)?;
                let (a, x) = (letter(1)?, var(2)?);
                if k == "send" {
                    DlcsOp::Send(a, x)
                } else {
                    DlcsOp::Recv(a, x)
                }
            }
            Tok::Ident(k) if k == "assume" => {
                expect_len(rest, 4)?;
                let (x, y) = (var(1)?, var(3)?);
                match rest.get(2).map(|t| &t.tok) {
                    Some(Tok::Rel(Relation::Eq)) => DlcsOp::Eq(x, y),
                    Some(Tok::Rel(Relation::Neq)) => DlcsOp::Neq(x, y),
                    _ => return line_error(rest[2].span, "expected `=` or `!=`"),
                }
            }
            Tok::Ident(_) => {
                let x = var(0)?;
                match rest.get(1).map(|t| &t.tok) {
                    Some(Tok::Define) => {}
                    _ => return line_error(rest[0].span, "expected `:=`"),
                }
                match rest.get(2).map(|t| &t.tok) {
                    Some(Tok::Star) => {
                        expect_len(rest, 3)?;
                        DlcsOp::Fresh(x)
                    }
                    _ => {
                        expect_len(rest, 3)?;
                        DlcsOp::Assign(x, var(2)?)
                    }
                }
            }
            t => return line_error(rest[0].span, format!("unexpected {t}")),
        };
        transitions.push(DlcsTransition { from, op, to });
    }
    Ok(DlcsModel {
        states,
        vars,
        alphabet,
        transitions,
        init,
        target,
    })
}

pub fn render_dlcs(m: &DlcsModel) -> String {
    let mut s = String::from("dlcs\n");
    let _ = writeln!(s, "states {}", m.states.join(" "));
    if !m.vars.is_empty() {
        let _ = writeln!(s, "vars {}", m.vars.join(" "));
    }
    if !m.alphabet.is_empty() {
        let _ = writeln!(s, "alphabet {}", m.alphabet.join(" "));
    }
    let _ = writeln!(s, "init {}", m.states[m.init]);
    if let Some(t) = m.target {
        let _ = writeln!(s, "target {}", m.states[t]);
    }
    for t in &m.transitions {
        let v = |i: usize| m.vars[i].as_str();
        let op = match t.op {
            DlcsOp::Assign(x, y) => format!("{} := {}", v(x), v(y)),
            DlcsOp::Fresh(x) => format!("{} := *", v(x)),
            DlcsOp::Eq(x, y) => format!("assume {} = {}", v(x), v(y)),
            DlcsOp::Neq(x, y) => format!("assume {} != {}", v(x), v(y)),
            DlcsOp::Send(a, x) => format!("send {} {}", m.alphabet[a], v(x)),
            DlcsOp::Recv(a, x) => format!("recv {} {}", m.alphabet[a], v(x)),
        };
        let _ = writeln!(s, "{} -> {} : {op}", m.states[t.from], m.states[t.to]);
    }
    s
}
