//! Text syntax for formulas: a recursive-descent parser and a pretty-printer.
//!
//! The two round-trip: `parse(print(φ))` is alpha-equivalent to `φ`.
//!
//! ```text
//! formula := quant | formula "\/" formula | formula "/\" formula
//!          | "~" formula | "(" formula ")" | atom
//! quant   := ("E"|"A") var "." formula
//!          | ("Eb"|"Ab") var "<=" poly "." formula
//! atom    := term ("<"|"<="|"="|"!="|">"|">=") term | "D[" poly "](" term ")"
//! term    := term "+" term | term "-" term | "-" term
//!          | poly "*" var | "(" poly ")" "*" var | var | poly
//! poly    := signed integer monomials in t, e.g. "2t^2-3t+1"
//! ```
//!
//! `~` binds tighter than `/\`, which binds tighter than `\/`; a quantifier
//! body extends maximally to the right. `#` starts a line comment. The names
//! `E`, `A`, `Eb`, `Ab`, `D` and the parameter `t` are reserved.

use crate::ast::{Atom, Formula, Term, Var};
use crate::poly::Poly;
use num_bigint::BigInt;
use num_traits::{One, Signed};
use std::collections::{HashMap, HashSet};
use std::fmt;

const RESERVED: [&str; 5] = ["E", "A", "Eb", "Ab", "D"];
const MAX_EXPONENT: usize = 64;

/// Syntax error with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_impl(text, None)
}

/// Like [`parse`], but every free variable must come from `allowed`.
pub fn parse_strict(text: &str, allowed: &HashSet<String>) -> Result<Formula, ParseError> {
    parse_impl(text, Some(allowed))
}

fn parse_impl(text: &str, allowed: Option<&HashSet<String>>) -> Result<Formula, ParseError> {
    let (toks, eof) = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        eof,
        scopes: Vec::new(),
        allowed,
    };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        return Err(p.err_here("unexpected trailing input"));
    }
    Ok(f)
}

// ---------------------------------------------------------------- lexing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    /// `c·t^k`, covering plain integers (k = 0) and powers of t.
    Mono(BigInt, usize),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Dot,
    Star,
    Plus,
    Minus,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    AndOp,
    OrOp,
    NotOp,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Mono(..) => "a number".to_string(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Star => "`*`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::AndOp => "`/\\`".into(),
            Tok::OrOp => "`\\/`".into(),
            Tok::NotOp => "`~`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct SpTok {
    tok: Tok,
    line: u32,
    col: u32,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<(Vec<SpTok>, (u32, u32)), ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    let err = |line: u32, col: u32, message: String| ParseError { line, col, message };

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok| toks.push(SpTok { tok, line: tl, col: tc });
        match c {
            '(' => {
                push(Tok::LParen);
                bump!();
            }
            ')' => {
                push(Tok::RParen);
                bump!();
            }
            '[' => {
                push(Tok::LBracket);
                bump!();
            }
            ']' => {
                push(Tok::RBracket);
                bump!();
            }
            '.' => {
                push(Tok::Dot);
                bump!();
            }
            '*' => {
                push(Tok::Star);
                bump!();
            }
            '+' => {
                push(Tok::Plus);
                bump!();
            }
            '-' => {
                push(Tok::Minus);
                bump!();
            }
            '<' => {
                bump!();
                if i < chars.len() && chars[i] == '=' {
                    bump!();
                    push(Tok::Le);
                } else {
                    push(Tok::Lt);
                }
            }
            '>' => {
                bump!();
                if i < chars.len() && chars[i] == '=' {
                    bump!();
                    push(Tok::Ge);
                } else {
                    push(Tok::Gt);
                }
            }
            '=' => {
                push(Tok::Eq);
                bump!();
            }
            '!' => {
                bump!();
                if i < chars.len() && chars[i] == '=' {
                    bump!();
                    push(Tok::Ne);
                } else {
                    return Err(err(tl, tc, "expected `=` after `!`".into()));
                }
            }
            '~' => {
                push(Tok::NotOp);
                bump!();
            }
            '/' => {
                bump!();
                if i < chars.len() && chars[i] == '\\' {
                    bump!();
                    push(Tok::AndOp);
                } else {
                    return Err(err(tl, tc, "expected `\\` after `/`".into()));
                }
            }
            '\\' => {
                bump!();
                if i < chars.len() && chars[i] == '/' {
                    bump!();
                    push(Tok::OrOp);
                } else {
                    return Err(err(tl, tc, "expected `/` after `\\`".into()));
                }
            }
            _ if c.is_ascii_digit() || c == 't' => {
                // A monomial: digits, optionally followed by t or t^k.
                // A `t` leading into a longer identifier (e.g. `total`) is
                // left for the identifier branch below.
                let mut coeff = BigInt::one();
                let mut have_digits = false;
                if c.is_ascii_digit() {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                    let digits: String = chars[start..i].iter().collect();
                    coeff = digits.parse().unwrap();
                    have_digits = true;
                }
                let t_here = i < chars.len()
                    && chars[i] == 't'
                    && !chars.get(i + 1).copied().is_some_and(is_ident_char);
                if !have_digits && !t_here {
                    // bare identifier starting with 't'
                    let start = i;
                    while i < chars.len() && is_ident_char(chars[i]) {
                        bump!();
                    }
                    let name: String = chars[start..i].iter().collect();
                    push(Tok::Ident(name));
                    continue;
                }
                let mut power = 0usize;
                if t_here {
                    bump!(); // consume 't'
                    power = 1;
                    if i < chars.len() && chars[i] == '^' {
                        bump!();
                        let start = i;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            bump!();
                        }
                        if start == i {
                            return Err(err(line, col, "expected exponent after `^`".into()));
                        }
                        let digits: String = chars[start..i].iter().collect();
                        power = digits
                            .parse()
                            .ok()
                            .filter(|&p| p <= MAX_EXPONENT)
                            .ok_or_else(|| {
                                err(tl, tc, format!("exponent exceeds {MAX_EXPONENT}"))
                            })?;
                    }
                }
                push(Tok::Mono(coeff, power));
            }
            _ if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    bump!();
                }
                let name: String = chars[start..i].iter().collect();
                push(Tok::Ident(name));
            }
            other => {
                return Err(err(tl, tc, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok((toks, (line, col)))
}

// --------------------------------------------------------------- parsing

struct Parser<'a> {
    toks: Vec<SpTok>,
    pos: usize,
    eof: (u32, u32),
    scopes: Vec<String>,
    allowed: Option<&'a HashSet<String>>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or(self.eof)
    }

    fn err_here(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map(|t| t.describe())
                .unwrap_or_else(|| "end of input".into());
            Err(self.err_here(format!("expected {}, found {}", tok.describe(), found)))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.and_level()?];
        while self.eat(&Tok::OrOp) {
            items.push(self.and_level()?);
        }
        Ok(Formula::or(items))
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.unary()?];
        while self.eat(&Tok::AndOp) {
            items.push(self.unary()?);
        }
        Ok(Formula::and(items))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Tok::NotOp) {
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Ident(name)) => match name.as_str() {
                "E" | "A" => {
                    let universal = name == "A";
                    self.pos += 1;
                    let v = self.binder_name()?;
                    self.expect(&Tok::Dot)?;
                    self.scopes.push(v.clone());
                    let body = self.formula();
                    self.scopes.pop();
                    let body = body?;
                    Ok(if universal {
                        Formula::forall(Var::new(v), body)
                    } else {
                        Formula::exists(Var::new(v), body)
                    })
                }
                "Eb" | "Ab" => {
                    let universal = name == "Ab";
                    self.pos += 1;
                    let v = self.binder_name()?;
                    self.expect(&Tok::Le)?;
                    let bound = self.poly()?;
                    self.expect(&Tok::Dot)?;
                    self.scopes.push(v.clone());
                    let body = self.formula();
                    self.scopes.pop();
                    let body = body?;
                    Ok(if universal {
                        Formula::bforall(Var::new(v), bound, body)
                    } else {
                        Formula::bexists(Var::new(v), bound, body)
                    })
                }
                "D" if self.peek_at(1) == Some(&Tok::LBracket) => {
                    self.pos += 2;
                    let m = self.poly()?;
                    self.expect(&Tok::RBracket)?;
                    self.expect(&Tok::LParen)?;
                    let arg = self.term()?;
                    self.expect(&Tok::RParen)?;
                    Ok(Formula::atom_folded(Atom::Div(m, arg)))
                }
                _ => self.atom(),
            },
            Some(Tok::LParen) => {
                // `(` may open a subformula or a parenthesized coefficient;
                // try the formula reading first and fall back to an atom.
                let save = self.pos;
                match self.paren_formula() {
                    Ok(f) => Ok(f),
                    Err(_) => {
                        self.pos = save;
                        self.atom()
                    }
                }
            }
            _ => self.atom(),
        }
    }

    fn paren_formula(&mut self) -> Result<Formula, ParseError> {
        self.expect(&Tok::LParen)?;
        let f = self.formula()?;
        self.expect(&Tok::RParen)?;
        // a term continuation means the parentheses belonged to a term
        if matches!(
            self.peek(),
            Some(
                Tok::Star
                    | Tok::Plus
                    | Tok::Minus
                    | Tok::Lt
                    | Tok::Le
                    | Tok::Gt
                    | Tok::Ge
                    | Tok::Eq
                    | Tok::Ne
            )
        ) {
            return Err(self.err_here("parenthesized formula followed by a term operator"));
        }
        Ok(f)
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.term()?;
        let op = match self.peek() {
            Some(
                t @ (Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge | Tok::Eq | Tok::Ne),
            ) => {
                let t = t.clone();
                self.pos += 1;
                t
            }
            _ => return Err(self.err_here("expected a comparison operator")),
        };
        let rhs = self.term()?;
        Ok(match op {
            Tok::Lt => Formula::atom_folded(Atom::lt(lhs, rhs)),
            Tok::Le => Formula::atom_folded(Atom::le(lhs, rhs)),
            // `>` and `>=` mirror the printer's negation sugar so that
            // printing and re-parsing reproduces the same tree.
            Tok::Gt => Formula::not(Formula::atom_folded(Atom::le(lhs, rhs))),
            Tok::Ge => Formula::not(Formula::atom_folded(Atom::lt(lhs, rhs))),
            Tok::Eq => Formula::atom_folded(Atom::eq(lhs, rhs)),
            Tok::Ne => Formula::not(Formula::atom_folded(Atom::eq(lhs, rhs))),
            _ => unreachable!(),
        })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut acc = if self.eat(&Tok::Minus) {
            self.addend()?.neg()
        } else {
            self.addend()?
        };
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc.add(&self.addend()?);
            } else if self.eat(&Tok::Minus) {
                acc = acc.sub(&self.addend()?);
            } else if self.peek() == Some(&Tok::Star) {
                return Err(self.err_here("only a polynomial may multiply a variable"));
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn addend(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Mono(c, k)) => {
                self.pos += 1;
                let p = Poly::monomial(c, k);
                if self.eat(&Tok::Star) {
                    let v = self.var_use()?;
                    Ok(Term::var(v).scale(&p))
                } else {
                    Ok(Term::constant(p))
                }
            }
            Some(Tok::Ident(_)) => {
                let v = self.var_use()?;
                Ok(Term::var(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let p = self.poly()?;
                self.expect(&Tok::RParen)?;
                if self.eat(&Tok::Star) {
                    let v = self.var_use()?;
                    Ok(Term::var(v).scale(&p))
                } else {
                    Ok(Term::constant(p))
                }
            }
            _ => Err(self.err_here("expected a term")),
        }
    }

    fn poly(&mut self) -> Result<Poly, ParseError> {
        let mut negate = self.eat(&Tok::Minus);
        let mut acc = Poly::zero();
        loop {
            match self.bump() {
                Some(Tok::Mono(c, k)) => {
                    let mono = Poly::monomial(if negate { -c } else { c }, k);
                    acc = &acc + &mono;
                }
                _ => {
                    self.pos = self.pos.saturating_sub(1);
                    return Err(self.err_here("expected a polynomial"));
                }
            }
            if self.eat(&Tok::Plus) {
                negate = false;
            } else if self.eat(&Tok::Minus) {
                negate = true;
            } else {
                return Ok(acc);
            }
        }
    }

    fn binder_name(&mut self) -> Result<String, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                if RESERVED.contains(&name.as_str()) {
                    return Err(self.err_here(format!("`{name}` is a reserved name")));
                }
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.err_here("expected a variable name")),
        }
    }

    fn var_use(&mut self) -> Result<Var, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                if RESERVED.contains(&name.as_str()) {
                    return Err(self.err_here(format!("`{name}` is a reserved name")));
                }
                if let Some(allowed) = self.allowed {
                    if !self.scopes.contains(&name) && !allowed.contains(&name) {
                        return Err(self.err_here(format!("unknown variable `{name}`")));
                    }
                }
                self.pos += 1;
                Ok(Var::new(name))
            }
            _ => Err(self.err_here("expected a variable name")),
        }
    }
}

// -------------------------------------------------------------- printing

/// Renders a formula as parseable text. Bound variables are given fresh
/// printable names where needed, so the result re-parses to an
/// alpha-equivalent formula.
pub fn print(f: &Formula) -> String {
    let mut taken: HashSet<String> = RESERVED.iter().map(|s| s.to_string()).collect();
    let mut names: HashMap<Var, String> = HashMap::new();
    for v in f.free_vars() {
        let base = if v.serial == 0 {
            v.name.clone()
        } else {
            format!("{}_{}", v.name, v.serial)
        };
        let name = uniquify(base, &taken);
        taken.insert(name.clone());
        names.insert(v, name);
    }
    let mut st = PrintState { names, taken };
    let mut out = String::new();
    fmt_formula(f, Ctx::Root, &mut st, &mut out);
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

fn uniquify(base: String, taken: &HashSet<String>) -> String {
    if !taken.contains(&base) {
        return base;
    }
    for k in 2.. {
        let cand = format!("{base}{k}");
        if !taken.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

struct PrintState {
    names: HashMap<Var, String>,
    taken: HashSet<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Ctx {
    Root,
    OrChild,
    AndChild,
}

fn fmt_formula(f: &Formula, ctx: Ctx, st: &mut PrintState, out: &mut String) {
    match f {
        Formula::True => out.push_str("0 = 0"),
        Formula::False => out.push_str("0 != 0"),
        Formula::Atom(a) => fmt_atom(a, false, st, out),
        Formula::Not(g) => match &**g {
            Formula::Atom(a) => fmt_atom(a, true, st, out),
            other => {
                out.push_str("~(");
                fmt_formula(other, Ctx::Root, st, out);
                out.push(')');
            }
        },
        Formula::And(items) => {
            for (i, g) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" /\\ ");
                }
                fmt_formula(g, Ctx::AndChild, st, out);
            }
        }
        Formula::Or(items) => {
            let wrap = ctx >= Ctx::AndChild;
            if wrap {
                out.push('(');
            }
            for (i, g) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(" \\/ ");
                }
                fmt_formula(g, Ctx::OrChild, st, out);
            }
            if wrap {
                out.push(')');
            }
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let wrap = ctx != Ctx::Root;
            if wrap {
                out.push('(');
            }
            out.push_str(if matches!(f, Formula::Exists(..)) {
                "E "
            } else {
                "A "
            });
            let name = enter_binder(v, st);
            out.push_str(&name);
            out.push_str(". ");
            fmt_formula(g, Ctx::Root, st, out);
            exit_binder(v, name, st);
            if wrap {
                out.push(')');
            }
        }
        Formula::BExists(v, b, g) | Formula::BForall(v, b, g) => {
            let wrap = ctx != Ctx::Root;
            if wrap {
                out.push('(');
            }
            out.push_str(if matches!(f, Formula::BExists(..)) {
                "Eb "
            } else {
                "Ab "
            });
            let name = enter_binder(v, st);
            out.push_str(&name);
            out.push_str(" <= ");
            out.push_str(&b.to_string());
            out.push_str(". ");
            fmt_formula(g, Ctx::Root, st, out);
            exit_binder(v, name, st);
            if wrap {
                out.push(')');
            }
        }
    }
}

fn enter_binder(v: &Var, st: &mut PrintState) -> String {
    let name = uniquify(v.name.clone(), &st.taken);
    st.taken.insert(name.clone());
    st.names.insert(v.clone(), name.clone());
    name
}

fn exit_binder(v: &Var, name: String, st: &mut PrintState) {
    st.taken.remove(&name);
    st.names.remove(v);
}

fn fmt_atom(a: &Atom, negated: bool, st: &PrintState, out: &mut String) {
    match a {
        Atom::Lt(u) => fmt_cmp(u, if negated { ">=" } else { "<" }, st, out),
        Atom::Eq(u) => fmt_cmp(u, if negated { "!=" } else { "=" }, st, out),
        Atom::Div(m, u) => {
            if negated {
                out.push('~');
            }
            out.push_str("D[");
            out.push_str(&m.to_string());
            out.push_str("](");
            fmt_term(u, st, out);
            out.push(')');
        }
    }
}

/// Renders the one-sided atom `u ⋈ 0` two-sided: variables with a
/// positive-leading coefficient stay left, the rest move right, and the
/// constant moves right. `2y − x < 0` prints as `2*y < x`.
fn fmt_cmp(u: &Term, op: &str, st: &PrintState, out: &mut String) {
    let mut left: Vec<(String, Poly)> = Vec::new();
    let mut right: Vec<(String, Poly)> = Vec::new();
    for (v, p) in u.coeffs() {
        let name = display_var(v, st);
        if p.leading_coeff().is_positive() {
            left.push((name, p.clone()));
        } else {
            right.push((name, -p));
        }
    }
    let rconst = -u.constant_part();
    fmt_side(&left, &Poly::zero(), out);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    fmt_side(&right, &rconst, out);
}

fn fmt_side(vars: &[(String, Poly)], constant: &Poly, out: &mut String) {
    if vars.is_empty() && constant.is_zero() {
        out.push('0');
        return;
    }
    for (i, (name, coeff)) in vars.iter().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        out.push_str(&coeff_prefix(coeff));
        out.push_str(name);
    }
    if !constant.is_zero() {
        let s = constant.to_string();
        if vars.is_empty() {
            out.push_str(&s);
        } else if let Some(rest) = s.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&s);
        }
    }
}

/// Renders a term with mixed signs (used inside `D[...](...)`).
fn fmt_term(u: &Term, st: &PrintState, out: &mut String) {
    let mut first = true;
    for (v, p) in u.coeffs() {
        let name = display_var(v, st);
        let positive = p.leading_coeff().is_positive();
        let mag = if positive { p.clone() } else { -p };
        if first {
            if !positive {
                out.push('-');
            }
        } else {
            out.push_str(if positive { " + " } else { " - " });
        }
        out.push_str(&coeff_prefix(&mag));
        out.push_str(&name);
        first = false;
    }
    let c = u.constant_part();
    if first {
        out.push_str(&c.to_string());
    } else if !c.is_zero() {
        let s = c.to_string();
        if let Some(rest) = s.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&s);
        }
    }
}

fn coeff_prefix(p: &Poly) -> String {
    if p.is_one() {
        String::new()
    } else if p.is_constant() {
        format!("{p}*")
    } else {
        format!("({p})*")
    }
}

fn display_var(v: &Var, st: &PrintState) -> String {
    st.names.get(v).cloned().unwrap_or_else(|| {
        // unseen (should not happen for well-scoped formulas): fall back
        // to a serial-qualified name
        if v.serial == 0 {
            v.name.clone()
        } else {
            format!("{}_{}", v.name, v.serial)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::FreshVars;

    fn roundtrip(src: &str) -> Formula {
        let f = parse(src).unwrap();
        let printed = print(&f);
        let g = parse(&printed)
            .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
        assert!(
            g.alpha_eq(&f),
            "round trip changed `{src}`: printed `{printed}`"
        );
        f
    }

    #[test]
    fn parse_print_pairs() {
        for (src, want) in [
            ("E y. 2*y < x", "E y. 2*y < x"),
            ("x + 1 <= y", "x < y"),
            ("~(x < y)", "x >= y"),
            ("x >= y", "x >= y"),
            ("x > y", "x >= y + 1"),
            ("x != y", "x != y"),
            ("0 = 0", "0 = 0"),
            ("3 < 1", "0 != 0"),
            ("D[t^2+1](x - 3*y)", "D[t^2 + 1](x - 3*y)"),
            ("D[5](-x + 2)", "D[5](-x + 2)"),
            ("x < y \\/ y < x /\\ 0 < x", "x < y \\/ y < x /\\ 0 < x"),
            ("(x < y \\/ y < x) /\\ 0 < x", "(x < y \\/ y < x) /\\ 0 < x"),
            ("~D[2](x)", "~D[2](x)"),
            ("A y. y < x \\/ x < y + 2", "A y. y < x \\/ x < y + 2"),
            ("2t*z <= x", "(2t)*z < x + 1"),
            ("-x < 3", "0 < x + 3"),
            ("x - y - 1 < 0", "x < y + 1"),
            ("t < x", "0 < x - t"),
            ("x = t^2 - 1", "x = t^2 - 1"),
        ] {
            let f = parse(src).unwrap_or_else(|e| panic!("parse `{src}`: {e}"));
            assert_eq!(print(&f), want, "printing `{src}`");
        }
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = parse("E y. x < y /\\ y < z").unwrap();
        match f {
            Formula::Exists(_, body) => {
                assert!(matches!(*body, Formula::And(_)));
            }
            other => panic!("expected Exists at top, got {other:?}"),
        }
    }

    #[test]
    fn bounded_quantifier_example() {
        let f = roundtrip("Eb z <= t-1 . (2t)*z <= x /\\ x <= (2t)*z + t");
        match &f {
            Formula::BExists(v, bound, body) => {
                assert_eq!(v.name, "z");
                assert_eq!(*bound, "t - 1".parse().unwrap());
                assert!(matches!(**body, Formula::And(ref items) if items.len() == 2));
            }
            other => panic!("expected BExists, got {other:?}"),
        }
    }

    #[test]
    fn negation_binds_tighter_than_and() {
        let f = parse("~ x < 0 /\\ y < 0 \\/ z < 0").unwrap();
        // (~(x<0) /\ y<0) \/ z<0
        match &f {
            Formula::Or(items) => {
                assert_eq!(items.len(), 2);
                assert!(matches!(items[0], Formula::And(_)));
            }
            other => panic!("expected Or at top, got {other:?}"),
        }
        assert_eq!(print(&f), "x >= 0 /\\ y < 0 \\/ z < 0");
    }

    #[test]
    fn comments_and_whitespace() {
        let f = parse("# intervals membership\n  E y. x = y # trailing\n  /\\ 0 < y\n").unwrap();
        assert_eq!(f.count_unbounded_quantifiers(), 1);
    }

    #[test]
    fn error_positions() {
        for (src, line, col) in [
            ("x <", 1, 4),
            ("E 2. x < 0", 1, 3),
            ("x * y < 0", 1, 3),
            ("x << y", 1, 4),
            ("D[t(x)", 1, 4),
            ("x < y /\\", 1, 9),
            ("\n  x ? y", 2, 5),
        ] {
            let e = parse(src).unwrap_err();
            assert_eq!((e.line, e.col), (line, col), "position for `{src}`: {e}");
        }
    }

    #[test]
    fn reserved_names_rejected() {
        for src in ["E E. E < 0", "D < 3", "E t. t < 1"] {
            assert!(parse(src).is_err(), "`{src}` should be rejected");
        }
    }

    #[test]
    fn strict_mode_checks_free_vars() {
        let allowed: HashSet<String> = ["x".to_string()].into();
        assert!(parse_strict("x < 1", &allowed).is_ok());
        assert!(parse_strict("E y. y < x", &allowed).is_ok());
        let e = parse_strict("x < y", &allowed).unwrap_err();
        assert!(e.message.contains("unknown variable `y`"), "{e}");
    }

    #[test]
    fn shadowed_binders_print_distinctly() {
        let fresh = FreshVars::new();
        let inner = Formula::bexists(
            Var::new("y"),
            "t".parse().unwrap(),
            Formula::Atom(Atom::lt(Term::var(Var::new("y")), Term::var(Var::new("x")))),
        );
        let f = Formula::exists(
            Var::new("y"),
            Formula::and(vec![
                inner,
                Formula::Atom(Atom::lt(Term::var(Var::new("y")), Term::var(Var::new("x")))),
            ]),
        )
        .refresh_bound(&fresh);
        let printed = print(&f);
        let g = parse(&printed).unwrap();
        assert!(g.alpha_eq(&f), "printed `{printed}`");
    }

    #[test]
    fn roundtrip_corpus_shapes() {
        for src in [
            "E x. 2*x <= a1 /\\ D[5](3*x - a2)",
            "E y. x = y /\\ (Eb i <= t-1. (2t)*i <= y /\\ y <= (2t)*i + t)",
            "A y. ~D[2](y) \\/ Eb z <= t. y < z",
            "x <= t /\\ D[t-2](x + 1) \\/ ~(x = 5)",
            "E y. (t^2 - 1)*y = x \\/ -2*y < t - 3",
            "Eb w <= 2t^2 - 3t + 1. w = x",
            "0 <= x /\\ x <= 2t",
        ] {
            roundtrip(src);
        }
    }
}
