//! Theory DSL parser.
//!
//! ```text
//! theory <name>
//! rel A/1, R/2.
//! axiom A(x) |- exists y. R(x,y) [ctx x].
//! habitative.
//! ```
//! Precedence, loosest first: `|-`, `->` (right), `|`, `&`, quantifiers, atoms.
//! `#` starts a comment unless it continues an identifier.

use super::{default_context, sym, Context, Formula, Sequent, Signature, Sym, Theory};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
        found: String,
    },
    #[error("{line}:{col}: relation `{rel}` has arity {declared} but is used with {used} arguments")]
    Arity {
        line: usize,
        col: usize,
        rel: String,
        declared: usize,
        used: usize,
    },
    #[error("{line}:{col}: relation `{rel}` is not declared")]
    Undeclared { line: usize, col: usize, rel: String },
    #[error("{line}:{col}: relation `{rel}` is declared twice")]
    Duplicate { line: usize, col: usize, rel: String },
    #[error("{line}:{col}: {message}")]
    Context {
        line: usize,
        col: usize,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    Slash,
    Amp,
    Bar,
    Arrow,
    Turnstile,
    Equals,
    LBracket,
    RBracket,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Turnstile => "`|-`".into(),
            Tok::Equals => "`=`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

const KEYWORDS: &[&str] = &["theory", "rel", "axiom", "ctx", "exists", "forall", "true", "false", "habitative"];

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '\'' | '#'))
            {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| ParseError::Syntax {
                line: pos.line,
                col: pos.col,
                expected: "arity".into(),
                found: s.clone(),
            })?;
            out.push((Tok::Int(n), pos));
            continue;
        }
        let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let (tok, n) = match (c, two.as_str()) {
            (_, "->") => (Tok::Arrow, 2),
            (_, "|-") => (Tok::Turnstile, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            ('.', _) => (Tok::Dot, 1),
            ('/', _) => (Tok::Slash, 1),
            ('&', _) => (Tok::Amp, 1),
            ('|', _) => (Tok::Bar, 1),
            ('=', _) => (Tok::Equals, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            _ => {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    expected: "a token".into(),
                    found: format!("`{c}`"),
                })
            }
        };
        i += n;
        col += n;
        out.push((tok, pos));
    }
    out.push((Tok::End, Pos { line, col }));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    sig: &'a Signature,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        let p = self.pos();
        Err(ParseError::Syntax {
            line: p.line,
            col: p.col,
            expected: expected.into(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(&t.describe())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail(what),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let left = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let right = self.formula()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        for (kw, is_exists) in [("exists", true), ("forall", false)] {
            if self.is_kw(kw) {
                self.bump();
                let v = self.name("a variable")?;
                self.expect(Tok::Dot)?;
                let body = self.unary()?;
                return Ok(if is_exists {
                    Formula::Exists(sym(&v), Box::new(body))
                } else {
                    Formula::Forall(sym(&v), Box::new(body))
                });
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        if self.is_kw("true") {
            self.bump();
            return Ok(Formula::True);
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(Formula::False);
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        let pos = self.pos();
        let head = match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => s.clone(),
            _ => return self.fail("a formula"),
        };
        match self.peek2() {
            Tok::Equals => {
                self.bump();
                self.bump();
                let rhs = self.name("a variable")?;
                Ok(Formula::Eq(sym(&head), sym(&rhs)))
            }
            Tok::LParen => {
                self.bump();
                self.bump();
                let mut args: Vec<Sym> = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        let v = self.name("a variable")?;
                        if *self.peek() == Tok::LParen {
                            return self.fail("`,` or `)` (function symbols are not supported)");
                        }
                        args.push(sym(&v));
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                self.check_atom(&head, args.len(), pos)?;
                Ok(Formula::Atom(sym(&head), args))
            }
            _ => {
                self.bump();
                self.check_atom(&head, 0, pos)?;
                Ok(Formula::Atom(sym(&head), vec![]))
            }
        }
    }

    fn check_atom(&self, rel: &str, used: usize, pos: Pos) -> Result<(), ParseError> {
        match self.sig.arity(rel) {
            None => Err(ParseError::Undeclared {
                line: pos.line,
                col: pos.col,
                rel: rel.into(),
            }),
            Some(declared) if declared != used => Err(ParseError::Arity {
                line: pos.line,
                col: pos.col,
                rel: rel.into(),
                declared,
                used,
            }),
            Some(_) => Ok(()),
        }
    }

    /// `<formula> |- <formula> [ctx v, ...]` with the context optionally bracketed.
    fn sequent(&mut self) -> Result<Sequent, ParseError> {
        let pos = self.pos();
        let antecedent = self.formula()?;
        self.expect(Tok::Turnstile)?;
        let consequent = self.formula()?;
        let context = self.context_clause(pos, &[&antecedent, &consequent])?;
        let context = context.unwrap_or_else(|| default_context(&antecedent, &consequent));
        Ok(Sequent {
            antecedent,
            consequent,
            context,
        })
    }

    fn context_clause(&mut self, pos: Pos, covered: &[&Formula]) -> Result<Option<Context>, ParseError> {
        let bracketed = *self.peek() == Tok::LBracket;
        if bracketed {
            self.bump();
        }
        if !self.is_kw("ctx") {
            if bracketed {
                return self.fail("`ctx`");
            }
            return Ok(None);
        }
        self.bump();
        let mut vars = Vec::new();
        let closes = |t: &Tok| matches!(t, Tok::Dot | Tok::RBracket | Tok::End);
        if !closes(self.peek()) {
            loop {
                vars.push(sym(&self.name("a variable")?));
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        if bracketed {
            self.expect(Tok::RBracket)?;
        }
        let ctx = Context::new(vars).map_err(|message| ParseError::Context {
            line: pos.line,
            col: pos.col,
            message,
        })?;
        for f in covered {
            if let Some(v) = f.free_vars().into_iter().find(|v| !ctx.contains(v)) {
                return Err(ParseError::Context {
                    line: pos.line,
                    col: pos.col,
                    message: format!("context does not list free variable `{v}`"),
                });
            }
        }
        Ok(Some(ctx))
    }
}

pub fn parse_theory(text: &str) -> Result<Theory, ParseError> {
    let toks = lex(text)?;
    let mut sig = Signature::new();
    let mut name = None;
    let mut axioms = Vec::new();
    let mut at = 0usize;
    let mut first = true;
    loop {
        let probe = Parser {
            toks: toks.clone(),
            at,
            sig: &sig,
        };
        match probe.peek().clone() {
            Tok::End => break,
            Tok::Ident(kw) if kw == "theory" && first => {
                let mut p = probe;
                p.bump();
                name = Some(p.name("a theory name")?);
                at = p.at;
            }
            Tok::Ident(kw) if kw == "rel" => {
                let mut p = probe;
                p.bump();
                let mut decls = Vec::new();
                loop {
                    let pos = p.pos();
                    let rel = match p.peek().clone() {
                        Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                            p.bump();
                            s
                        }
                        _ => return p.fail("a relation name"),
                    };
                    p.expect(Tok::Slash)?;
                    let arity = match p.bump() {
                        Tok::Int(n) => n,
                        _ => {
                            p.at -= 1;
                            return p.fail("an arity");
                        }
                    };
                    decls.push((rel, arity, pos));
                    if *p.peek() == Tok::Comma {
                        p.bump();
                    } else {
                        break;
                    }
                }
                p.expect(Tok::Dot)?;
                at = p.at;
                for (rel, arity, pos) in decls {
                    sig.declare(&rel, arity).map_err(|_| ParseError::Duplicate {
                        line: pos.line,
                        col: pos.col,
                        rel,
                    })?;
                }
            }
            Tok::Ident(kw) if kw == "axiom" => {
                let mut p = probe;
                p.bump();
                let s = p.sequent()?;
                p.expect(Tok::Dot)?;
                at = p.at;
                axioms.push(s);
            }
            Tok::Ident(kw) if kw == "habitative" => {
                let mut p = probe;
                p.bump();
                p.expect(Tok::Dot)?;
                at = p.at;
                axioms.push(Sequent::habitative());
            }
            _ => return probe.fail("`rel`, `axiom`, `habitative` or end of input"),
        }
        first = false;
    }
    Ok(Theory {
        name,
        signature: sig,
        axioms,
    })
}

fn finish(p: &mut Parser<'_>) -> Result<(), ParseError> {
    if *p.peek() == Tok::Dot {
        p.bump();
    }
    if *p.peek() != Tok::End {
        return p.fail("end of input");
    }
    Ok(())
}

/// Parses `<phi> |- <psi> [ctx ...]` against a signature.
pub fn parse_sequent(text: &str, sig: &Signature) -> Result<Sequent, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        sig,
    };
    let s = p.sequent()?;
    finish(&mut p)?;
    Ok(s)
}

/// Parses `<formula> [ctx ...]`; without a clause the canonical context is used.
pub fn parse_formula_in_context(text: &str, sig: &Signature) -> Result<(Context, Formula), ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        sig,
    };
    let pos = p.pos();
    let f = p.formula()?;
    let ctx = p.context_clause(pos, &[&f])?;
    finish(&mut p)?;
    Ok((ctx.unwrap_or_else(|| super::canonical_context(&f)), f))
}
