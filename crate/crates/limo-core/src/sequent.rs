//! Bi-nested sequents: `Γ ⇒ Δ` where Δ mixes formulas, implication blocks
//! `⟨Σ ⇒ Π⟩` and modal blocks `[Σ ⇒ Π]`, nested arbitrarily.
//!
//! Text notation: `p, q => r, <s => t>, [u => v]`. Positions address nested
//! blocks (`r` is the root, `r.i0` the first implication block, `r.m1` the
//! second modal block, and so on), and stay stable under insertions because
//! blocks are only ever appended.

use std::fmt;
use std::hash::{Hash, Hasher};

use serde_json::{json, Value};
use thiserror::Error;

use crate::formula::{parse_formula, Formula};

/// The two block shapes of the succedent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockKind {
    /// `⟨Σ ⇒ Π⟩` — an implication block (a ≤-successor constraint).
    Imp,
    /// `[Σ ⇒ Π]` — a modal block (an R-successor constraint).
    Mod,
}

/// One step into a nested block: which kind, and the index within that kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub kind: BlockKind,
    pub index: usize,
}

impl Step {
    pub fn imp(index: usize) -> Self {
        Step { kind: BlockKind::Imp, index }
    }

    pub fn modal(index: usize) -> Self {
        Step { kind: BlockKind::Mod, index }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            BlockKind::Imp => write!(f, "i{}", self.index),
            BlockKind::Mod => write!(f, "m{}", self.index),
        }
    }
}

/// A path from a sequent's root to one of its nested blocks.
///
/// The derived ordering is lexicographic on steps with `Imp < Mod`, which
/// coincides with the preorder traversal used throughout the search engine.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position(Vec<Step>);

impl Position {
    /// The root position, written `r`.
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, step: Step) -> Position {
        let mut steps = self.0.clone();
        steps.push(step);
        Position(steps)
    }

    pub fn parent(&self) -> Option<Position> {
        if self.0.is_empty() {
            None
        } else {
            Some(Position(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn last(&self) -> Option<Step> {
        self.0.last().copied()
    }

    /// Concatenate `suffix` onto this position.
    pub fn join(&self, suffix: &Position) -> Position {
        let mut steps = self.0.clone();
        steps.extend_from_slice(&suffix.0);
        Position(steps)
    }

    pub fn starts_with(&self, prefix: &Position) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// The remainder of this position after removing `prefix`, if it is one.
    pub fn strip_prefix(&self, prefix: &Position) -> Option<Position> {
        self.0
            .strip_prefix(prefix.0.as_slice())
            .map(|rest| Position(rest.to_vec()))
    }

    /// Parse the `r`, `r.i0`, `r.m1.i2` notation.
    pub fn parse(text: &str) -> Result<Position, SequentError> {
        let malformed = || SequentError::Text(format!("malformed position '{text}'"));
        let mut parts = text.split('.');
        if parts.next() != Some("r") {
            return Err(malformed());
        }
        let mut steps = Vec::new();
        for part in parts {
            let kind = match part.as_bytes().first() {
                Some(b'i') => BlockKind::Imp,
                Some(b'm') => BlockKind::Mod,
                _ => return Err(malformed()),
            };
            let index = part[1..].parse::<usize>().map_err(|_| malformed())?;
            steps.push(Step { kind, index });
        }
        Ok(Position(steps))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r")?;
        for step in &self.0 {
            write!(f, ".{step}")?;
        }
        Ok(())
    }
}

/// Whether a sequent's collections behave as multisets or as sets.
///
/// The base calculus works on multisets; the cumulative calculus driving the
/// decision procedure works on sets (duplicates collapse, formula order is
/// canonical).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Multiset,
    Set,
}

/// One element of a succedent, for uniform traversal and serialization.
#[derive(Debug, Clone, PartialEq)]
pub enum SuccElem {
    Form(Formula),
    ImpBlock(Sequent),
    ModBlock(Sequent),
}

/// A bi-nested sequent `Γ ⇒ Δ`.
///
/// Succedent formulas, implication blocks and modal blocks are stored
/// separately; blocks keep their insertion order (positions must not shift
/// as the search engine adds material). In [`Mode::Set`], formula lists are
/// kept sorted and duplicate-free and pushing a block equal to an existing
/// one is a no-op.
///
/// Equality and hashing are structural and order-insensitive: two sequents
/// are equal when their antecedents and succedent formulas agree as
/// multisets and their blocks agree up to reordering. The `origin`
/// annotation (carried by sharp images, see [`Sequent::sharp`]) is ignored
/// by equality.
#[derive(Debug, Clone)]
pub struct Sequent {
    mode: Mode,
    ant: Vec<Formula>,
    suc_forms: Vec<Formula>,
    suc_imps: Vec<Sequent>,
    suc_mods: Vec<Sequent>,
    origin: Option<Position>,
}

/// Ordering key giving small formulas first, ties broken textually.
fn formula_key(f: &Formula) -> (usize, String) {
    (f.size(), f.to_string())
}

impl Sequent {
    pub fn empty(mode: Mode) -> Self {
        Sequent {
            mode,
            ant: Vec::new(),
            suc_forms: Vec::new(),
            suc_imps: Vec::new(),
            suc_mods: Vec::new(),
            origin: None,
        }
    }

    /// Build a sequent from parts, canonicalizing in set mode.
    pub fn new(mode: Mode, ant: Vec<Formula>, suc: Vec<SuccElem>) -> Self {
        let mut s = Sequent::empty(mode);
        for f in ant {
            s.insert_ant(f);
        }
        for elem in suc {
            match elem {
                SuccElem::Form(f) => {
                    s.insert_suc_form(f);
                }
                SuccElem::ImpBlock(b) => {
                    s.push_imp_block(b);
                }
                SuccElem::ModBlock(b) => {
                    s.push_mod_block(b);
                }
            }
        }
        s
    }

    /// The goal sequent `⇒ f`.
    pub fn goal(mode: Mode, f: Formula) -> Self {
        Sequent::new(mode, Vec::new(), vec![SuccElem::Form(f)])
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn ant(&self) -> &[Formula] {
        &self.ant
    }

    pub fn suc_formulas(&self) -> &[Formula] {
        &self.suc_forms
    }

    pub fn imp_blocks(&self) -> &[Sequent] {
        &self.suc_imps
    }

    pub fn mod_blocks(&self) -> &[Sequent] {
        &self.suc_mods
    }

    pub fn origin(&self) -> Option<&Position> {
        self.origin.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.ant.is_empty()
            && self.suc_forms.is_empty()
            && self.suc_imps.is_empty()
            && self.suc_mods.is_empty()
    }

    /// Succedent elements in display order: formulas, then implication
    /// blocks, then modal blocks.
    pub fn suc_elems(&self) -> impl Iterator<Item = SuccElem> + '_ {
        self.suc_forms
            .iter()
            .cloned()
            .map(SuccElem::Form)
            .chain(self.suc_imps.iter().cloned().map(SuccElem::ImpBlock))
            .chain(self.suc_mods.iter().cloned().map(SuccElem::ModBlock))
    }

    pub fn contains_ant(&self, f: &Formula) -> bool {
        self.ant.contains(f)
    }

    pub fn contains_suc_form(&self, f: &Formula) -> bool {
        self.suc_forms.contains(f)
    }

    /// Add a formula to the antecedent. Returns false when set mode
    /// suppressed a duplicate.
    pub fn insert_ant(&mut self, f: Formula) -> bool {
        insert_formula(self.mode, &mut self.ant, f)
    }

    /// Add a formula to the succedent. Returns false when set mode
    /// suppressed a duplicate.
    pub fn insert_suc_form(&mut self, f: Formula) -> bool {
        insert_formula(self.mode, &mut self.suc_forms, f)
    }

    /// Remove an antecedent formula by index (multiset rules consume their
    /// principal formula).
    pub fn remove_ant(&mut self, index: usize) -> Formula {
        self.ant.remove(index)
    }

    pub fn remove_suc_form(&mut self, index: usize) -> Formula {
        self.suc_forms.remove(index)
    }

    /// Append an implication block, returning its index. In set mode,
    /// pushing a block equal to an existing one returns the old index.
    pub fn push_imp_block(&mut self, block: Sequent) -> usize {
        push_block(self.mode, &mut self.suc_imps, block)
    }

    /// Append a modal block, returning its index (set mode deduplicates).
    pub fn push_mod_block(&mut self, block: Sequent) -> usize {
        push_block(self.mode, &mut self.suc_mods, block)
    }

    pub fn set_origin(&mut self, origin: Option<Position>) {
        self.origin = origin;
    }

    /// Drop every `origin` annotation in the tree.
    pub fn strip_origins(&mut self) {
        self.origin = None;
        for b in self.suc_imps.iter_mut().chain(self.suc_mods.iter_mut()) {
            b.strip_origins();
        }
    }

    /// The subsequent a position addresses.
    pub fn subsequent_at(&self, pos: &Position) -> Result<&Sequent, SequentError> {
        let mut cur = self;
        for step in pos.steps() {
            let blocks = match step.kind {
                BlockKind::Imp => &cur.suc_imps,
                BlockKind::Mod => &cur.suc_mods,
            };
            cur = blocks
                .get(step.index)
                .ok_or_else(|| SequentError::InvalidPosition(pos.clone()))?;
        }
        Ok(cur)
    }

    pub fn subsequent_at_mut(&mut self, pos: &Position) -> Result<&mut Sequent, SequentError> {
        let mut cur = self;
        for step in pos.steps() {
            let blocks = match step.kind {
                BlockKind::Imp => &mut cur.suc_imps,
                BlockKind::Mod => &mut cur.suc_mods,
            };
            cur = blocks
                .get_mut(step.index)
                .ok_or_else(|| SequentError::InvalidPosition(pos.clone()))?;
        }
        Ok(cur)
    }

    /// A copy of this sequent with the subsequent at `pos` replaced.
    pub fn replace_at(&self, pos: &Position, new: Sequent) -> Result<Sequent, SequentError> {
        let mut out = self.clone();
        *out.subsequent_at_mut(pos)? = new;
        Ok(out)
    }

    /// A copy of this sequent with the subsequent at `pos` rewritten.
    pub fn update_at(
        &self,
        pos: &Position,
        rewrite: impl FnOnce(&mut Sequent),
    ) -> Result<Sequent, SequentError> {
        let mut out = self.clone();
        rewrite(out.subsequent_at_mut(pos)?);
        Ok(out)
    }

    /// All subsequents reachable through blocks of either kind, in preorder,
    /// this sequent (at the root position) included.
    pub fn descendants_plus(&self) -> Vec<(Position, &Sequent)> {
        let mut out = Vec::new();
        self.walk(Position::root(), &mut out);
        out
    }

    fn walk<'a>(&'a self, pos: Position, out: &mut Vec<(Position, &'a Sequent)>) {
        out.push((pos.clone(), self));
        for (k, b) in self.suc_imps.iter().enumerate() {
            b.walk(pos.child(Step::imp(k)), out);
        }
        for (k, b) in self.suc_mods.iter().enumerate() {
            b.walk(pos.child(Step::modal(k)), out);
        }
    }

    /// Proper descendants along implication-block edges only.
    pub fn descendants_imp(&self) -> Vec<(Position, &Sequent)> {
        let mut out = Vec::new();
        self.walk_kind(BlockKind::Imp, Position::root(), &mut out);
        out
    }

    /// Proper descendants along modal-block edges only.
    pub fn descendants_mod(&self) -> Vec<(Position, &Sequent)> {
        let mut out = Vec::new();
        self.walk_kind(BlockKind::Mod, Position::root(), &mut out);
        out
    }

    fn walk_kind<'a>(
        &'a self,
        kind: BlockKind,
        pos: Position,
        out: &mut Vec<(Position, &'a Sequent)>,
    ) {
        let blocks = match kind {
            BlockKind::Imp => &self.suc_imps,
            BlockKind::Mod => &self.suc_mods,
        };
        for (k, b) in blocks.iter().enumerate() {
            let child = pos.child(Step { kind, index: k });
            out.push((child.clone(), b));
            b.walk_kind(kind, child, out);
        }
    }

    /// Modal degree: the maximum modal nesting, counting each modal block
    /// as one level and implication blocks as none.
    pub fn md(&self) -> u32 {
        let forms = self
            .ant
            .iter()
            .chain(self.suc_forms.iter())
            .map(|f| f.modal_degree());
        let imps = self.suc_imps.iter().map(|b| b.md());
        let mods = self.suc_mods.iter().map(|b| 1 + b.md());
        forms.chain(imps).chain(mods).max().unwrap_or(0)
    }

    /// The ♭ of this sequent's succedent: its modal blocks, each with the
    /// succedent recursively flattened (formulas and implication blocks
    /// dropped). Empty when the succedent has no modal blocks.
    pub fn flat_suc(&self) -> Vec<Sequent> {
        self.suc_mods.iter().map(|b| b.flattened()).collect()
    }

    /// `Λ ⇒ Θ♭` for this block body `Λ ⇒ Θ`.
    pub fn flattened(&self) -> Sequent {
        Sequent {
            mode: self.mode,
            ant: self.ant.clone(),
            suc_forms: Vec::new(),
            suc_imps: Vec::new(),
            suc_mods: self.flat_suc(),
            origin: None,
        }
    }

    /// The annotated sharp image `⇒_{Λ⇒Θ} Θ#` of this sequent `Λ ⇒ Θ`.
    ///
    /// The result is a set-mode sequent with empty antecedent whose
    /// succedent keeps the formulas of Θ and, for each modal block of Θ,
    /// the recursively sharpened block; implication blocks are dropped.
    /// Each produced (sub)sequent's `origin` records the position of the
    /// source it was sharpened from, resolved against whatever root
    /// `pos_of_self` is relative to.
    pub fn sharp(&self, pos_of_self: &Position) -> Sequent {
        let mut out = Sequent::empty(Mode::Set);
        for f in &self.suc_forms {
            out.insert_suc_form(f.clone());
        }
        out.suc_mods = self
            .suc_mods
            .iter()
            .enumerate()
            .map(|(k, b)| b.sharp(&pos_of_self.child(Step::modal(k))))
            .collect();
        out.origin = Some(pos_of_self.clone());
        out
    }

    /// The succedent with every implication block removed, at all depths
    /// (`Δ̄`); antecedents are untouched.
    pub fn bar(&self) -> Sequent {
        Sequent {
            mode: self.mode,
            ant: self.ant.clone(),
            suc_forms: self.suc_forms.clone(),
            suc_imps: Vec::new(),
            suc_mods: self.suc_mods.iter().map(|b| b.bar()).collect(),
            origin: self.origin.clone(),
        }
    }

    fn canonical_string(&self) -> String {
        let mut out = String::new();
        self.write_canonical(&mut out);
        out
    }

    fn write_canonical(&self, out: &mut String) {
        // Control characters never occur in formula text, so they make
        // unambiguous separators.
        const SEP: char = '\u{1f}';
        const OPEN: char = '\u{2}';
        const CLOSE: char = '\u{3}';
        let mut ant: Vec<String> = self.ant.iter().map(|f| f.to_string()).collect();
        ant.sort();
        let mut suc: Vec<String> = self.suc_forms.iter().map(|f| f.to_string()).collect();
        suc.sort();
        for a in ant {
            out.push_str(&a);
            out.push(SEP);
        }
        out.push('\u{10}');
        for s in suc {
            out.push_str(&s);
            out.push(SEP);
        }
        for (kind, blocks) in [('i', &self.suc_imps), ('m', &self.suc_mods)] {
            let mut rendered: Vec<String> = blocks.iter().map(|b| b.canonical_string()).collect();
            rendered.sort();
            for r in rendered {
                out.push(OPEN);
                out.push(kind);
                out.push_str(&r);
                out.push(CLOSE);
            }
        }
    }
}

fn insert_formula(mode: Mode, list: &mut Vec<Formula>, f: Formula) -> bool {
    match mode {
        Mode::Multiset => {
            list.push(f);
            true
        }
        Mode::Set => {
            if list.contains(&f) {
                return false;
            }
            let key = formula_key(&f);
            let at = list
                .binary_search_by_key(&key, formula_key)
                .unwrap_or_else(|i| i);
            list.insert(at, f);
            true
        }
    }
}

fn push_block(mode: Mode, blocks: &mut Vec<Sequent>, block: Sequent) -> usize {
    if mode == Mode::Set {
        if let Some(i) = blocks.iter().position(|b| b == &block) {
            return i;
        }
    }
    blocks.push(block);
    blocks.len() - 1
}

impl PartialEq for Sequent {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_string() == other.canonical_string()
    }
}

impl Eq for Sequent {}

impl Hash for Sequent {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical_string().hash(state);
    }
}

/// Structural inclusion `s1 ⊆ˢ s2`: the antecedent of `s1` is contained in
/// that of `s2`, every modal block of `s1` is structurally included in some
/// modal block of `s2`, and every modal block of `s2` structurally includes
/// some modal block of `s1`. Succedent formulas and implication blocks play
/// no role. The relation is reflexive and transitive.
pub fn structurally_included(s1: &Sequent, s2: &Sequent) -> bool {
    s1.ant.iter().all(|f| s2.ant.contains(f))
        && s1
            .suc_mods
            .iter()
            .all(|m1| s2.suc_mods.iter().any(|m2| structurally_included(m1, m2)))
        && s2
            .suc_mods
            .iter()
            .all(|m2| s1.suc_mods.iter().any(|m1| structurally_included(m1, m2)))
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ant = self
            .ant
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        let mut suc_parts: Vec<String> = self.suc_forms.iter().map(|x| x.to_string()).collect();
        suc_parts.extend(self.suc_imps.iter().map(|b| format!("<{b}>")));
        suc_parts.extend(self.suc_mods.iter().map(|b| format!("[{b}]")));
        let suc = suc_parts.join(", ");
        match (ant.is_empty(), suc.is_empty()) {
            (true, true) => write!(f, "=>"),
            (true, false) => write!(f, "=> {suc}"),
            (false, true) => write!(f, "{ant} =>"),
            (false, false) => write!(f, "{ant} => {suc}"),
        }
    }
}

/// Errors from position lookups and the text/JSON readers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequentError {
    #[error("no subsequent at position {0}")]
    InvalidPosition(Position),
    #[error("malformed sequent text: {0}")]
    Text(String),
    #[error("malformed sequent JSON: {0}")]
    Json(String),
}

/// Parse the textual notation produced by `Display`.
///
/// `p, q => r, <s => t>, [u => v]` — one `=>` per nesting level, `<...>`
/// and `[...]` for blocks, commas separating both antecedent formulas and
/// succedent elements. `<>`/`[]` unambiguously lex as the modal operators
/// since blocks always contain a `=>`.
pub fn parse_sequent(text: &str, mode: Mode) -> Result<Sequent, SequentError> {
    let (ant_text, suc_text) = split_arrow(text)?;
    let mut seq = Sequent::empty(mode);
    for part in split_top_level(ant_text) {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let f = parse_formula(part)
            .map_err(|e| SequentError::Text(format!("in '{part}': {e}")))?;
        seq.insert_ant(f);
    }
    for part in split_top_level(suc_text) {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some(body) = strip_block(part, '<', '>') {
            seq.push_imp_block(parse_sequent(body, mode)?);
        } else if let Some(body) = strip_block(part, '[', ']') {
            seq.push_mod_block(parse_sequent(body, mode)?);
        } else {
            let f = parse_formula(part)
                .map_err(|e| SequentError::Text(format!("in '{part}': {e}")))?;
            seq.insert_suc_form(f);
        }
    }
    Ok(seq)
}

fn strip_block(part: &str, open: char, close: char) -> Option<&str> {
    // "<>" / "[]" at the start is a modal operator, not a block: blocks
    // always contain "=>" so their second character is never the closer.
    let rest = part.strip_prefix(open)?;
    if rest.starts_with(close) {
        return None;
    }
    rest.strip_suffix(close)
}

/// Scan for the top-level `=>`, respecting nesting and skipping the
/// two-character tokens `->`, `<>`, `[]` and nested `=>`s.
fn split_arrow(text: &str) -> Result<(&str, &str), SequentError> {
    let bytes = text.as_bytes();
    let mut depth = 0usize;
    let mut arrow = None;
    let mut i = 0;
    while i < bytes.len() {
        match &bytes[i..] {
            [b'-', b'>', ..] | [b'<', b'>', ..] | [b'[', b']', ..] => {
                i += 2;
                continue;
            }
            [b'=', b'>', ..] => {
                if depth == 0 {
                    if arrow.is_some() {
                        return Err(SequentError::Text(format!(
                            "multiple top-level '=>' in '{text}'"
                        )));
                    }
                    arrow = Some(i);
                }
                i += 2;
                continue;
            }
            [b'<', ..] | [b'[', ..] => depth += 1,
            [b'>', ..] | [b']', ..] => {
                depth = depth.checked_sub(1).ok_or_else(|| {
                    SequentError::Text(format!("unbalanced blocks in '{text}'"))
                })?;
            }
            _ => {}
        }
        i += 1;
    }
    match arrow {
        Some(at) => Ok((&text[..at], &text[at + 2..])),
        None => Err(SequentError::Text(format!("missing '=>' in '{text}'"))),
    }
}

/// Split on commas that sit outside every block.
fn split_top_level(text: &str) -> Vec<&str> {
    let bytes = text.as_bytes();
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match &bytes[i..] {
            [b'-', b'>', ..] | [b'<', b'>', ..] | [b'[', b']', ..] | [b'=', b'>', ..] => {
                i += 2;
                continue;
            }
            [b'<', ..] | [b'[', ..] => depth += 1,
            [b'>', ..] | [b']', ..] => depth = depth.saturating_sub(1),
            [b',', ..] if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    parts.push(&text[start..]);
    parts
}

impl Sequent {
    /// JSON form: `{"ant": [...], "suc": [..., {"imp": {...}}, {"mod":
    /// {...}}]}` with formulas as ascii strings; an `"origin"` field carries
    /// the annotation when present.
    pub fn to_json(&self) -> Value {
        let suc: Vec<Value> = self
            .suc_forms
            .iter()
            .map(|f| Value::String(f.to_string()))
            .chain(self.suc_imps.iter().map(|b| json!({ "imp": b.to_json() })))
            .chain(self.suc_mods.iter().map(|b| json!({ "mod": b.to_json() })))
            .collect();
        let mut obj = json!({
            "ant": self.ant.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
            "suc": suc,
        });
        if let Some(origin) = &self.origin {
            obj["origin"] = Value::String(origin.to_string());
        }
        obj
    }

    pub fn from_json(value: &Value, mode: Mode) -> Result<Sequent, SequentError> {
        let bad = |msg: &str| SequentError::Json(msg.to_string());
        let obj = value.as_object().ok_or_else(|| bad("expected an object"))?;
        let mut seq = Sequent::empty(mode);
        let ant = obj
            .get("ant")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing 'ant' array"))?;
        for item in ant {
            let text = item.as_str().ok_or_else(|| bad("antecedent entries must be strings"))?;
            let f = parse_formula(text).map_err(|e| SequentError::Json(e.to_string()))?;
            seq.insert_ant(f);
        }
        let suc = obj
            .get("suc")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing 'suc' array"))?;
        for item in suc {
            match item {
                Value::String(text) => {
                    let f = parse_formula(text).map_err(|e| SequentError::Json(e.to_string()))?;
                    seq.insert_suc_form(f);
                }
                Value::Object(block) => {
                    if let Some(inner) = block.get("imp") {
                        seq.push_imp_block(Sequent::from_json(inner, mode)?);
                    } else if let Some(inner) = block.get("mod") {
                        seq.push_mod_block(Sequent::from_json(inner, mode)?);
                    } else {
                        return Err(bad("block object needs an 'imp' or 'mod' key"));
                    }
                }
                _ => return Err(bad("succedent entries must be strings or block objects")),
            }
        }
        if let Some(origin) = obj.get("origin") {
            let text = origin.as_str().ok_or_else(|| bad("'origin' must be a string"))?;
            seq.origin = Some(Position::parse(text)?);
        }
        Ok(seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(text: &str) -> Sequent {
        parse_sequent(text, Mode::Set).unwrap_or_else(|e| panic!("{text:?}: {e}"))
    }

    fn mseq(text: &str) -> Sequent {
        parse_sequent(text, Mode::Multiset).unwrap_or_else(|e| panic!("{text:?}: {e}"))
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "=>",
            "=> p",
            "p =>",
            "p, q => r",
            "p => q, <p => q>, [=> p]",
            "=> <>p, <[]p => [=> q]>, [p => q | r, [r => s]]",
            "[]p => [p => q -> r]",
        ] {
            let s = seq(text);
            assert_eq!(seq(&s.to_string()), s, "round trip failed for {text}");
        }
    }

    #[test]
    fn set_mode_sorts_and_deduplicates() {
        let s = seq("q, p, q => r");
        assert_eq!(s.to_string(), "p, q => r");
        let m = mseq("q, p, q => r");
        assert_eq!(m.to_string(), "q, p, q => r");

        // Equal blocks collapse in set mode only.
        let mut s = Sequent::empty(Mode::Set);
        assert_eq!(s.push_mod_block(seq("p =>")), 0);
        assert_eq!(s.push_mod_block(seq("p =>")), 0);
        assert_eq!(s.mod_blocks().len(), 1);
        let mut m = Sequent::empty(Mode::Multiset);
        assert_eq!(m.push_mod_block(mseq("p =>")), 0);
        assert_eq!(m.push_mod_block(mseq("p =>")), 1);
    }

    #[test]
    fn equality_ignores_order_mode_and_origin() {
        assert_eq!(seq("p, q => r"), mseq("q, p => r"));
        assert_eq!(seq("=> [p =>], [q =>]"), seq("=> [q =>], [p =>]"));
        assert_ne!(seq("=> [p =>]"), seq("=> [p =>], [q =>]"));
        // Multiset multiplicity distinguishes.
        assert_ne!(mseq("p, p => q"), mseq("p => q"));
        let mut annotated = seq("=> p");
        annotated.set_origin(Some(Position::parse("r.m0").unwrap()));
        assert_eq!(annotated, seq("=> p"));
    }

    #[test]
    fn positions_address_blocks() {
        let s = seq("=> <p => [q => r]>, [a => b]");
        let root = Position::root();
        assert_eq!(s.subsequent_at(&root).unwrap(), &s);
        let i0 = Position::parse("r.i0").unwrap();
        assert_eq!(s.subsequent_at(&i0).unwrap().to_string(), "p => [q => r]");
        let deep = Position::parse("r.i0.m0").unwrap();
        assert_eq!(s.subsequent_at(&deep).unwrap().to_string(), "q => r");
        let m0 = Position::parse("r.m0").unwrap();
        assert_eq!(s.subsequent_at(&m0).unwrap().to_string(), "a => b");
        let bad = Position::parse("r.m1").unwrap();
        assert_eq!(
            s.subsequent_at(&bad),
            Err(SequentError::InvalidPosition(bad))
        );
    }

    #[test]
    fn replace_at_round_trips() {
        let s = seq("=> <p => [q => r]>");
        let pos = Position::parse("r.i0.m0").unwrap();
        let original = s.subsequent_at(&pos).unwrap().clone();
        let swapped = s.replace_at(&pos, seq("x => y")).unwrap();
        assert_eq!(
            swapped.subsequent_at(&pos).unwrap().to_string(),
            "x => y"
        );
        let back = swapped.replace_at(&pos, original).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn descendant_traversals() {
        let s = seq("=> <p => [q => r]>, [a => <b => c>]");
        let plus: Vec<String> = s
            .descendants_plus()
            .iter()
            .map(|(p, t)| format!("{p}: {t}"))
            .collect();
        assert_eq!(
            plus,
            vec![
                "r: => <p => [q => r]>, [a => <b => c>]",
                "r.i0: p => [q => r]",
                "r.i0.m0: q => r",
                "r.m0: a => <b => c>",
                "r.m0.i0: b => c",
            ]
        );
        // Same-kind chains only.
        let imps: Vec<String> = s.descendants_imp().iter().map(|(p, _)| p.to_string()).collect();
        assert_eq!(imps, vec!["r.i0"]);
        let mods: Vec<String> = s.descendants_mod().iter().map(|(p, _)| p.to_string()).collect();
        assert_eq!(mods, vec!["r.m0"]);
        // Positions come out sorted (preorder = lexicographic).
        let mut sorted: Vec<Position> =
            s.descendants_plus().iter().map(|(p, _)| p.clone()).collect();
        let original = sorted.clone();
        sorted.sort();
        assert_eq!(sorted, original);
    }

    #[test]
    fn modal_degree_of_sequents() {
        assert_eq!(seq("=>").md(), 0);
        assert_eq!(seq("p => q").md(), 0);
        assert_eq!(seq("<>p -> []q => [](p -> q)").md(), 1);
        assert_eq!(seq("p => [=> q]").md(), 1);
        assert_eq!(seq("=> <=> []p>").md(), 1);
        assert_eq!(seq("=> [=> [=>]]").md(), 2);
    }

    #[test]
    fn flat_drops_formulas_and_implication_blocks() {
        let s = seq("=> <>p, <[]p => [=> q]>, [p => q | r, [r => s]]");
        let flat = s.flat_suc();
        assert_eq!(flat.len(), 1);
        assert_eq!(flat[0].to_string(), "p => [r =>]");
        // [·]-free succedent flattens to nothing.
        assert!(seq("p => q, <a => b>").flat_suc().is_empty());
        // Idempotence, lifted to sequents.
        let lifted = Sequent::new(
            Mode::Set,
            vec![],
            flat.iter().cloned().map(SuccElem::ModBlock).collect(),
        );
        assert_eq!(lifted.flat_suc(), flat);
        // The empty modal block is a fixed point.
        assert_eq!(seq("=> [=>]").flat_suc()[0].to_string(), "=>");
    }

    #[test]
    fn sharp_keeps_formulas_and_modal_skeleton() {
        let s = seq("a => <>p, <[]p => [=> q]>, [p => q | r, [r => s]]");
        let pos = Position::parse("r.i0.m0").unwrap();
        let sharp = s.sharp(&pos);
        assert_eq!(sharp.to_string(), "=> <>p, [=> q | r, [=> s]]");
        assert_eq!(sharp.origin(), Some(&pos));
        // Nested origins extend the source position along the source blocks.
        let outer = &sharp.mod_blocks()[0];
        assert_eq!(outer.origin(), Some(&Position::parse("r.i0.m0.m0").unwrap()));
        let inner = &outer.mod_blocks()[0];
        assert_eq!(inner.origin(), Some(&Position::parse("r.i0.m0.m0.m0").unwrap()));
        // Sharp never exceeds the source's modal degree.
        assert!(sharp.md() <= s.md());
        // A [·]-free succedent sharpens to its formula list.
        let flat_case = seq("p => q, <a => b>").sharp(&Position::root());
        assert_eq!(flat_case.to_string(), "=> q");
    }

    #[test]
    fn bar_removes_implication_blocks_everywhere() {
        let s = seq("a => b, <x => y>, [c => d, <e => f>, [g => <h => i>]]");
        assert_eq!(s.bar().to_string(), "a => b, [c => d, [g =>]]");
    }

    #[test]
    fn structural_inclusion_examples() {
        let incl = |a: &str, b: &str| structurally_included(&seq(a), &seq(b));
        // Reflexive.
        assert!(incl("p => [q => r]", "p => [q => r]"));
        // Antecedent containment plus matched blocks.
        assert!(incl("p => [q => r]", "p, s => [q, t => u]"));
        // Succedent formulas are ignored.
        assert!(incl("p => x", "p => y"));
        // Implication blocks are ignored.
        assert!(incl("p => <a => b>", "p => <c => d>"));
        // A block on either side with no partner breaks inclusion.
        assert!(!incl("p => [q =>]", "p =>"));
        assert!(!incl("p =>", "p => [q =>]"));
        // Antecedent growth in the wrong direction breaks it.
        assert!(!incl("p, s =>", "p =>"));
    }

    #[test]
    fn json_round_trips() {
        let mut s = seq("p => q, <p => q>, [=> p, [r => s]]");
        s.subsequent_at_mut(&Position::parse("r.m0").unwrap())
            .unwrap()
            .set_origin(Some(Position::parse("r.i0").unwrap()));
        let json = s.to_json();
        let back = Sequent::from_json(&json, Mode::Set).unwrap();
        assert_eq!(back, s);
        assert_eq!(
            back.subsequent_at(&Position::parse("r.m0").unwrap())
                .unwrap()
                .origin(),
            Some(&Position::parse("r.i0").unwrap())
        );
        assert_eq!(json["ant"][0], "p");
        assert_eq!(json["suc"][1]["imp"]["ant"][0], "p");
    }

    #[test]
    fn position_parse_and_order() {
        for text in ["r", "r.i0", "r.m3.i1", "r.m0.m0"] {
            let p = Position::parse(text).unwrap();
            assert_eq!(p.to_string(), text);
        }
        assert!(Position::parse("x.i0").is_err());
        assert!(Position::parse("r.z0").is_err());
        assert!(Position::parse("r.i").is_err());
        let root = Position::root();
        let child = root.child(Step::imp(0));
        assert!(root < child);
        assert!(child < root.child(Step::modal(0)));
        assert!(child.starts_with(&root));
        assert_eq!(child.parent(), Some(root.clone()));
        assert_eq!(
            child.strip_prefix(&root),
            Some(Position::root().child(Step::imp(0)))
        );
    }
}
