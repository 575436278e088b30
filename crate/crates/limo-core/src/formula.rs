//! The modal propositional language: atoms, ⊤, ⊥, ∧, ∨, ⊃, □, ◇.
//!
//! Negation is definable as `¬A = A ⊃ ⊥`; the parser accepts `~A` as sugar
//! for it and the printers never emit `~`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// A formula of the modal language.
///
/// Children are reference-counted so that formulas can be shared freely
/// between sequents, derivation nodes and subformula sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    /// A propositional atom; names start with a lowercase letter.
    Atom(String),
    /// The verum constant ⊤ (written `T`).
    Top,
    /// The falsum constant ⊥ (written `F`).
    Bot,
    /// Conjunction `A & B`.
    And(Arc<Formula>, Arc<Formula>),
    /// Disjunction `A | B`.
    Or(Arc<Formula>, Arc<Formula>),
    /// Intuitionistic implication `A -> B`.
    Imp(Arc<Formula>, Arc<Formula>),
    /// Necessity `[]A`.
    Box(Arc<Formula>),
    /// Possibility `<>A`.
    Dia(Arc<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(Arc::new(a), Arc::new(b))
    }

    /// `¬A`, encoded as `A ⊃ ⊥`.
    pub fn not(a: Formula) -> Self {
        Formula::imp(a, Formula::Bot)
    }

    pub fn boxed(a: Formula) -> Self {
        Formula::Box(Arc::new(a))
    }

    pub fn dia(a: Formula) -> Self {
        Formula::Dia(Arc::new(a))
    }

    /// The nesting depth of modal operators.
    pub fn modal_degree(&self) -> u32 {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bot => 0,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.modal_degree().max(b.modal_degree())
            }
            Formula::Box(a) | Formula::Dia(a) => 1 + a.modal_degree(),
        }
    }

    /// Total number of nodes (atoms and constants included).
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bot => 1,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => 1 + a.size() + b.size(),
            Formula::Box(a) | Formula::Dia(a) => 1 + a.size(),
        }
    }

    /// Number of connective nodes (∧, ∨, ⊃, □, ◇).
    pub fn connective_count(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bot => 0,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                1 + a.connective_count() + b.connective_count()
            }
            Formula::Box(a) | Formula::Dia(a) => 1 + a.connective_count(),
        }
    }

    /// All subtrees of the formula, itself included.
    ///
    /// `¬` is not treated specially: `A ⊃ ⊥` contributes `A`, `⊥` and
    /// `A ⊃ ⊥` itself.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        out.insert(self.clone());
        match self {
            Formula::Atom(_) | Formula::Top | Formula::Bot => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_subformulas(out);
                b.collect_subformulas(out);
            }
            Formula::Box(a) | Formula::Dia(a) => a.collect_subformulas(out),
        }
    }

    /// Names of the atoms occurring in the formula, sorted.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(p) => {
                out.insert(p.clone());
            }
            Formula::Top | Formula::Bot => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::Box(a) | Formula::Dia(a) => a.collect_atoms(out),
        }
    }
}

/// Output notation for [`render`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderStyle {
    /// `T F & | -> [] <>` — the same notation the parser accepts.
    Ascii,
    /// `⊤ ⊥ ∧ ∨ ⊃ □ ◇`.
    Unicode,
    /// `\top \bot \land \lor \supset \Box \Diamond`.
    Latex,
}

// Binding strengths, loosest first: ⊃ < ∨ < ∧ < unary.
const PREC_IMP: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_UNARY: u8 = 4;

/// Pretty-print a formula with minimal parentheses.
///
/// `⊃` is right-associative; `∧` and `∨` associate to the left. Ascii
/// output round-trips: `parse_formula(render(f, Ascii)) == f`.
pub fn render(f: &Formula, style: RenderStyle) -> String {
    let mut out = String::new();
    render_prec(f, style, 0, &mut out);
    out
}

fn render_prec(f: &Formula, style: RenderStyle, min_prec: u8, out: &mut String) {
    let prec = match f {
        Formula::Atom(_) | Formula::Top | Formula::Bot => {
            push_leaf(f, style, out);
            return;
        }
        Formula::Imp(..) => PREC_IMP,
        Formula::Or(..) => PREC_OR,
        Formula::And(..) => PREC_AND,
        Formula::Box(..) | Formula::Dia(..) => PREC_UNARY,
    };
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match f {
        Formula::Imp(a, b) => {
            // Right-associative: the left argument needs strictly higher
            // binding strength, the right argument may be another ⊃.
            render_prec(a, style, PREC_IMP + 1, out);
            out.push_str(match style {
                RenderStyle::Ascii => " -> ",
                RenderStyle::Unicode => " ⊃ ",
                RenderStyle::Latex => " \\supset ",
            });
            render_prec(b, style, PREC_IMP, out);
        }
        Formula::Or(a, b) => {
            render_prec(a, style, PREC_OR, out);
            out.push_str(match style {
                RenderStyle::Ascii => " | ",
                RenderStyle::Unicode => " ∨ ",
                RenderStyle::Latex => " \\lor ",
            });
            render_prec(b, style, PREC_OR + 1, out);
        }
        Formula::And(a, b) => {
            render_prec(a, style, PREC_AND, out);
            out.push_str(match style {
                RenderStyle::Ascii => " & ",
                RenderStyle::Unicode => " ∧ ",
                RenderStyle::Latex => " \\land ",
            });
            render_prec(b, style, PREC_AND + 1, out);
        }
        Formula::Box(a) | Formula::Dia(a) => {
            let is_box = matches!(f, Formula::Box(_));
            let op = match (style, is_box) {
                (RenderStyle::Ascii, true) => "[]",
                (RenderStyle::Ascii, false) => "<>",
                (RenderStyle::Unicode, true) => "□",
                (RenderStyle::Unicode, false) => "◇",
                (RenderStyle::Latex, true) => "\\Box",
                (RenderStyle::Latex, false) => "\\Diamond",
            };
            out.push_str(op);
            let mark = out.len();
            render_prec(a, style, PREC_UNARY, out);
            // LaTeX control words swallow a following letter: `\Boxp` is not
            // `\Box p`. Insert a space exactly when the child starts with one.
            if style == RenderStyle::Latex && out.as_bytes().get(mark).is_some_and(|b| b.is_ascii_alphanumeric()) {
                out.insert(mark, ' ');
            }
        }
        _ => unreachable!(),
    }
    if parens {
        out.push(')');
    }
}

fn push_leaf(f: &Formula, style: RenderStyle, out: &mut String) {
    match (f, style) {
        (Formula::Atom(p), _) => out.push_str(p),
        (Formula::Top, RenderStyle::Ascii) => out.push('T'),
        (Formula::Top, RenderStyle::Unicode) => out.push('⊤'),
        (Formula::Top, RenderStyle::Latex) => out.push_str("\\top"),
        (Formula::Bot, RenderStyle::Ascii) => out.push('F'),
        (Formula::Bot, RenderStyle::Unicode) => out.push('⊥'),
        (Formula::Bot, RenderStyle::Latex) => out.push_str("\\bot"),
        _ => unreachable!(),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, RenderStyle::Ascii))
    }
}

/// A parse failure, with the byte offset where it occurred.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub message: String,
    pub position: usize,
}

/// Parse the ascii notation.
///
/// Grammar (whitespace insignificant):
///
/// ```text
/// formula ::= or ( "->" formula )?
/// or      ::= and ( "|" and )*
/// and     ::= unary ( "&" unary )*
/// unary   ::= ( "~" | "[]" | "<>" ) unary | atomic
/// atomic  ::= ident | "T" | "F" | "(" formula ")"
/// ```
///
/// Identifiers start with a lowercase letter and continue with letters,
/// digits or `_`; `T` and `F` are the constants ⊤ and ⊥. `~A` is parsed
/// as `A -> F`.
pub fn parse_formula(input: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { input: input.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.at_end() {
        return Err(ParseError { message: "empty input".into(), position: p.pos });
    }
    let f = p.formula()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.input.len()
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError { message: message.into(), position: self.pos }
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.input[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        self.skip_ws();
        if self.eat("->") {
            self.skip_ws();
            let rhs = self.formula()?;
            Ok(Formula::imp(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        loop {
            self.skip_ws();
            // Don't mistake the first char of "->"… there is no "|>" token,
            // so a bare '|' is always disjunction.
            if self.peek() == Some(b'|') {
                self.pos += 1;
                self.skip_ws();
                let rhs = self.conjunction()?;
                lhs = Formula::or(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'&') {
                self.pos += 1;
                self.skip_ws();
                let rhs = self.unary()?;
                lhs = Formula::and(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        if self.eat("~") {
            let inner = self.unary()?;
            Ok(Formula::not(inner))
        } else if self.eat("[]") {
            let inner = self.unary()?;
            Ok(Formula::boxed(inner))
        } else if self.eat("<>") {
            let inner = self.unary()?;
            Ok(Formula::dia(inner))
        } else {
            self.atomic()
        }
    }

    fn atomic(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.err("expected a formula")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.formula()?;
                self.skip_ws();
                if self.eat(")") {
                    Ok(inner)
                } else {
                    Err(self.err("expected ')'"))
                }
            }
            Some(b'T') => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some(b'F') => {
                self.pos += 1;
                Ok(Formula::Bot)
            }
            Some(b) if b.is_ascii_lowercase() => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.input[start..self.pos])
                    .expect("ascii range")
                    .to_string();
                Ok(Formula::Atom(name))
            }
            Some(b) => Err(self.err(format!("unexpected character '{}'", b as char))),
        }
    }
}
