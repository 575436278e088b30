//! Terminating backward proof search over the cumulative calculi.
//!
//! The engine expands a derivation tree through four macro-steps — `exp1`
//! (propositional and modal rules), `exp2` (structural block rules), `exp3`
//! (right implication), `exp4` (downward interaction plus realization) —
//! scheduled by a two-level procedure: the inner loop drives a leaf to
//! global R3-saturation or closes every branch with axioms; the outer loop
//! interleaves `exp4` until a leaf is fully saturated, at which point a
//! finite countermodel is read off the leaf.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::calculus::{
    self, CalculusVariant, LogicId, PrincipalRef, RuleId, RuleInstance, SatLevel, Site,
};
use crate::formula::{render, Formula, RenderStyle};
use crate::semantics::{extract_countermodel, Model};
use crate::sequent::{Mode, Position, Sequent, Step, SuccElem};

/// Default cap on rule applications per query: a safety net against engine
/// bugs, far above anything the test corpus needs.
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

/// Errors from proof search.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("step budget exhausted after {steps} rule applications")]
    BudgetExceeded { steps: u64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

fn precondition(msg: impl Into<String>) -> SearchError {
    SearchError::Precondition(msg.into())
}

// ---------------------------------------------------------------------------
// Derivation trees
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Node {
    sequent: Sequent,
    /// The rule applied at this node; its premises are the children.
    rule: Option<RuleInstance>,
    children: Vec<usize>,
    parent: Option<usize>,
}

/// A derivation grown root-down: node 0 is the goal sequent, children of a
/// node are the premises of the rule recorded at it.
#[derive(Debug, Clone)]
pub struct Derivation {
    nodes: Vec<Node>,
    logic: LogicId,
    steps: u64,
    budget: u64,
}

/// How a leaf stands: closed by an axiom, saturated at or beyond R3, or
/// still awaiting expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafStatus {
    Axiomatic,
    Open,
    Saturated(SatLevel),
}

impl fmt::Display for LeafStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeafStatus::Axiomatic => f.write_str("axiom"),
            LeafStatus::Open => f.write_str("open"),
            LeafStatus::Saturated(level) => write!(f, "saturated({level})"),
        }
    }
}

impl Derivation {
    pub fn new(root: Sequent, logic: LogicId, budget: u64) -> Derivation {
        Derivation {
            nodes: vec![Node { sequent: root, rule: None, children: Vec::new(), parent: None }],
            logic,
            steps: 0,
            budget,
        }
    }

    pub fn logic(&self) -> LogicId {
        self.logic
    }

    /// Rule applications performed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> &Sequent {
        &self.nodes[0].sequent
    }

    pub fn sequent(&self, id: usize) -> &Sequent {
        &self.nodes[id].sequent
    }

    /// The rule applied at `id`, if it is an internal node.
    pub fn rule(&self, id: usize) -> Option<&RuleInstance> {
        self.nodes[id].rule.as_ref()
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.nodes[id].children
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.nodes[id].parent
    }

    /// A leaf is closed when an axiom appears at any nested position.
    pub fn is_axiomatic(&self, id: usize) -> bool {
        calculus::axiom_anywhere(&self.nodes[id].sequent).is_some()
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        self.leaves_under(0)
    }

    /// Leaves of the subtree rooted at `id`, left to right.
    pub fn leaves_under(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            if self.nodes[n].children.is_empty() {
                out.push(n);
            } else {
                stack.extend(self.nodes[n].children.iter().rev());
            }
        }
        out
    }

    pub fn leaf_status(&self, id: usize) -> LeafStatus {
        if self.is_axiomatic(id) {
            return LeafStatus::Axiomatic;
        }
        let report = calculus::saturation_level(&self.nodes[id].sequent, self.logic)
            .expect("non-axiomatic by the check above");
        if report.global >= SatLevel::R3 {
            LeafStatus::Saturated(report.global)
        } else {
            LeafStatus::Open
        }
    }

    /// Record a rule application at leaf `id`; the instance's premises
    /// become its children. Counts one step against the budget.
    fn attach(&mut self, id: usize, inst: RuleInstance) -> Result<Vec<usize>, SearchError> {
        if !self.nodes[id].children.is_empty() {
            return Err(precondition("rule applied to an internal node"));
        }
        if self.steps >= self.budget {
            return Err(SearchError::BudgetExceeded { steps: self.steps });
        }
        let premises = calculus::apply(&self.nodes[id].sequent, &inst)
            .map_err(|e| precondition(e.to_string()))?;
        self.steps += 1;
        let mut ids = Vec::with_capacity(premises.len());
        for premise in premises {
            let child = self.nodes.len();
            self.nodes.push(Node {
                sequent: premise,
                rule: None,
                children: Vec::new(),
                parent: Some(id),
            });
            ids.push(child);
        }
        self.nodes[id].children.clone_from(&ids);
        self.nodes[id].rule = Some(inst);
        Ok(ids)
    }

    fn attach_single(&mut self, id: usize, inst: RuleInstance) -> Result<usize, SearchError> {
        let ids = self.attach(id, inst)?;
        match ids.as_slice() {
            [only] => Ok(*only),
            _ => Err(precondition("expected a single-premise rule")),
        }
    }

    /// Text rendering: one node per line, two-space indentation per depth,
    /// annotated with the applied rule or the leaf status.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(0, 0, &mut out);
        out
    }

    fn write_text(&self, id: usize, depth: usize, out: &mut String) {
        let node = &self.nodes[id];
        for _ in 0..depth {
            out.push_str("  ");
        }
        out.push_str(&node.sequent.to_string());
        match &node.rule {
            Some(inst) => {
                out.push_str(&format!("   [{} @ {}]", inst.rule.name(), inst.pos));
            }
            None => out.push_str(&format!("   [{}]", self.leaf_status(id))),
        }
        out.push('\n');
        for &child in &node.children {
            self.write_text(child, depth + 1, out);
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "logic": self.logic.name(),
            "steps": self.steps,
            "tree": self.node_json(0),
        })
    }

    fn node_json(&self, id: usize) -> Value {
        let node = &self.nodes[id];
        match &node.rule {
            Some(inst) => json!({
                "sequent": node.sequent.to_string(),
                "rule": inst.rule.name(),
                "pos": inst.pos.to_string(),
                "children": node.children.iter().map(|&c| self.node_json(c)).collect::<Vec<_>>(),
            }),
            None => json!({
                "sequent": node.sequent.to_string(),
                "status": self.leaf_status(id).to_string(),
            }),
        }
    }

    /// LaTeX rendering in bussproofs style.
    pub fn to_latex(&self) -> String {
        let mut lines = vec!["\\begin{prooftree}".to_string()];
        self.write_latex(0, &mut lines);
        lines.push("\\end{prooftree}".to_string());
        lines.join("\n") + "\n"
    }

    fn write_latex(&self, id: usize, lines: &mut Vec<String>) {
        let node = &self.nodes[id];
        for &child in &node.children {
            self.write_latex(child, lines);
        }
        let sequent = format!("${}$", latex_sequent(&node.sequent));
        match node.children.len() {
            0 => lines.push(format!("\\AxiomC{{{sequent}}}")),
            n => {
                let rule = node.rule.as_ref().expect("internal nodes carry a rule");
                lines.push(format!(
                    "\\RightLabel{{\\scriptsize {}}}",
                    rule.rule.name().replace('_', "\\_")
                ));
                let inf = if n == 1 { "\\UnaryInfC" } else { "\\BinaryInfC" };
                lines.push(format!("{inf}{{{sequent}}}"));
            }
        }
    }
}

fn latex_sequent(s: &Sequent) -> String {
    let mut parts: Vec<String> =
        s.ant().iter().map(|f| render(f, RenderStyle::Latex)).collect();
    let ant = parts.join(", ");
    parts = s.suc_formulas().iter().map(|f| render(f, RenderStyle::Latex)).collect();
    for block in s.imp_blocks() {
        parts.push(format!("\\langle {} \\rangle", latex_sequent(block)));
    }
    for block in s.mod_blocks() {
        parts.push(format!("[\\, {} \\,]", latex_sequent(block)));
    }
    let suc = parts.join(", ");
    match (ant.is_empty(), suc.is_empty()) {
        (true, true) => "\\Rightarrow".to_string(),
        (true, false) => format!("\\Rightarrow {suc}"),
        (false, true) => format!("{ant} \\Rightarrow"),
        (false, false) => format!("{ant} \\Rightarrow {suc}"),
    }
}

// ---------------------------------------------------------------------------
// Tracking records and realization
// ---------------------------------------------------------------------------

/// For each modal-chain position of a sequent, the formulas a tracked
/// antecedent set pushes down to it. Entries are subsets of the antecedent
/// at their position.
pub type TrackingRecord = BTreeMap<Position, Vec<Formula>>;

const LEFT_RULES: [RuleId; 5] =
    [RuleId::AndL, RuleId::OrL, RuleId::ImpL, RuleId::BoxL, RuleId::DiaL];

/// The positions reachable from the root through modal blocks only,
/// in preorder, paired with their subsequents.
fn modal_closure(s: &Sequent) -> Vec<(Position, &Sequent)> {
    fn walk<'a>(s: &'a Sequent, pos: Position, out: &mut Vec<(Position, &'a Sequent)>) {
        out.push((pos.clone(), s));
        for (k, block) in s.mod_blocks().iter().enumerate() {
            walk(block, pos.child(Step::modal(k)), out);
        }
    }
    let mut out = Vec::new();
    walk(s, Position::root(), &mut out);
    out
}

/// Push a set of antecedent formulas down the modal-block tree of `s`:
/// the root keeps the part of `gamma` it contains; a `□A` entry sends `A`
/// into every modal block, a `◇A` entry sends `A` into the blocks already
/// holding it, conjunctions split, and a disjunct or an implication's
/// consequent joins wherever the antecedent already holds it.
///
/// Requires `s` to be saturated for the left rules at every position the
/// record covers.
pub fn tracking_record(s: &Sequent, gamma: &[Formula]) -> Result<TrackingRecord, SearchError> {
    let closure = modal_closure(s);
    for (pos, t) in &closure {
        for rule in LEFT_RULES {
            if !calculus::saturation_holds(t, rule, LogicId::Lik) {
                return Err(precondition(format!(
                    "sequent is not left-saturated: {} fails at {}",
                    rule.name(),
                    pos
                )));
            }
        }
    }
    let mut record: BTreeMap<Position, BTreeSet<Formula>> =
        closure.iter().map(|(pos, _)| (pos.clone(), BTreeSet::new())).collect();
    let root_entry: BTreeSet<Formula> =
        gamma.iter().filter(|f| s.contains_ant(f)).cloned().collect();
    record.insert(Position::root(), root_entry);
    loop {
        let mut changed = false;
        for (pos, t) in &closure {
            // Close the entry under the propositional clauses.
            loop {
                let entry = record[pos].clone();
                let mut grew = false;
                for f in &entry {
                    let additions: Vec<&Formula> = match f {
                        Formula::And(a, b) => vec![a, b],
                        Formula::Or(a, b) => [a.as_ref(), b.as_ref()]
                            .into_iter()
                            .filter(|g| t.contains_ant(g))
                            .collect(),
                        Formula::Imp(_, b) if t.contains_ant(b) => vec![b],
                        _ => Vec::new(),
                    };
                    let slot = record.get_mut(pos).expect("seeded above");
                    for g in additions {
                        grew |= slot.insert(g.clone());
                    }
                }
                if !grew {
                    break;
                }
                changed = true;
            }
            // Send modal entries into the direct modal blocks.
            let entry = record[pos].clone();
            for (k, block) in t.mod_blocks().iter().enumerate() {
                let child_pos = pos.child(Step::modal(k));
                for f in &entry {
                    let push = match f {
                        Formula::Box(a) => Some(a),
                        Formula::Dia(a) if block.contains_ant(a) => Some(a),
                        _ => None,
                    };
                    if let Some(a) = push {
                        changed |= record
                            .get_mut(&child_pos)
                            .expect("closure covers modal children")
                            .insert((**a).clone());
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    // Entries are subsets of the antecedent at their position; with the
    // left-saturation check above this cannot fail.
    for (pos, t) in &closure {
        if let Some(f) = record[pos].iter().find(|f| !t.contains_ant(f)) {
            return Err(precondition(format!(
                "tracking record escaped the antecedent at {pos}: {f}"
            )));
        }
    }
    Ok(record
        .into_iter()
        .map(|(pos, set)| {
            let mut entry: Vec<Formula> = set.into_iter().collect();
            entry.sort_by_key(|f| (f.size(), f.to_string()));
            (pos, entry)
        })
        .collect())
}

/// Complete the annotated block at `sharp_pos` of `s` from the tracking
/// record of `s`'s antecedent in the implication block at `imp_pos`:
/// every nested sequent of the annotated block receives the record entry
/// of its source position as antecedent. Returns `s` with the block
/// replaced by its completed form.
///
/// Requires: both positions are direct blocks of `s`, the annotation
/// chain points into the implication block, `s`'s antecedent is contained
/// in the implication block's, and the latter is left-saturated.
pub fn realize(
    s: &Sequent,
    imp_pos: &Position,
    sharp_pos: &Position,
) -> Result<Sequent, SearchError> {
    let direct_child = |pos: &Position, kind: crate::sequent::BlockKind| {
        pos.parent().is_some_and(|p| p.is_root()) && pos.last().is_some_and(|s| s.kind == kind)
    };
    if !direct_child(imp_pos, crate::sequent::BlockKind::Imp) {
        return Err(precondition(format!(
            "{imp_pos} does not address a top-level implication block"
        )));
    }
    if !direct_child(sharp_pos, crate::sequent::BlockKind::Mod) {
        return Err(precondition(format!(
            "{sharp_pos} does not address a top-level modal block"
        )));
    }
    let s1 = s
        .subsequent_at(imp_pos)
        .map_err(|e| precondition(e.to_string()))?;
    let s2 = s
        .subsequent_at(sharp_pos)
        .map_err(|e| precondition(e.to_string()))?;
    let gamma = s.ant();
    if let Some(f) = gamma.iter().find(|f| !s1.contains_ant(f)) {
        return Err(precondition(format!(
            "antecedent is not contained in the implication block: {f} is missing"
        )));
    }
    let record = tracking_record(s1, gamma)?;
    let realized = realize_node(s2, imp_pos, &record)?;
    s.replace_at(sharp_pos, realized)
        .map_err(|e| precondition(e.to_string()))
}

fn realize_node(
    t: &Sequent,
    imp_pos: &Position,
    record: &TrackingRecord,
) -> Result<Sequent, SearchError> {
    let origin = t
        .origin()
        .ok_or_else(|| precondition("block lacks a source annotation"))?;
    let key = origin.strip_prefix(imp_pos).ok_or_else(|| {
        precondition(format!("annotation {origin} points outside the implication block"))
    })?;
    let entry = record.get(&key).ok_or_else(|| {
        precondition(format!("annotation {origin} does not address a modal-chain position"))
    })?;
    let mut out = Sequent::new(Mode::Set, entry.clone(), Vec::new());
    for f in t.suc_formulas() {
        out.insert_suc_form(f.clone());
    }
    for block in t.imp_blocks() {
        out.push_imp_block(block.clone());
    }
    for block in t.mod_blocks() {
        out.push_mod_block(realize_node(block, imp_pos, record)?);
    }
    out.set_origin(Some(origin.clone()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Macro-steps
// ---------------------------------------------------------------------------

fn ensure_leaf(d: &Derivation, id: usize) -> Result<(), SearchError> {
    if !d.children(id).is_empty() {
        return Err(precondition(format!("node {id} is not a leaf")));
    }
    Ok(())
}

/// Exhaust the propositional and modal rules on the target and the modal
/// blocks below it (implication-block interiors excluded), over every leaf
/// the expansion produces, stopping each branch at an axiom.
pub fn exp1(d: &mut Derivation, leaf: usize, target: &Position) -> Result<(), SearchError> {
    ensure_leaf(d, leaf)?;
    let rules = calculus::r1_rules(d.logic());
    let mut stack = vec![leaf];
    while let Some(id) = stack.pop() {
        let inst = first_instance_in_modal_closure(d.sequent(id), target, rules, d.logic());
        if let Some(inst) = inst {
            let children = d.attach(id, inst)?;
            stack.extend(children.into_iter().rev());
        }
    }
    Ok(())
}

fn first_instance_in_modal_closure(
    s: &Sequent,
    target: &Position,
    rules: &[RuleId],
    logic: LogicId,
) -> Option<RuleInstance> {
    let positions: Vec<Position> = match s.subsequent_at(target) {
        Ok(t) => modal_closure(t).iter().map(|(rel, _)| target.join(rel)).collect(),
        Err(_) => return None,
    };
    positions.iter().find_map(|pos| {
        calculus::applicable_at(s, pos, logic, CalculusVariant::Cumulative)
            .into_iter()
            .find(|inst| rules.contains(&inst.rule))
    })
}

fn first_instance_at(
    d: &Derivation,
    id: usize,
    target: &Position,
    rules: &[RuleId],
) -> Option<RuleInstance> {
    calculus::applicable_at(d.sequent(id), target, d.logic(), CalculusVariant::Cumulative)
        .into_iter()
        .find(|inst| rules.contains(&inst.rule))
}

/// Exhaust the structural block rules on the target's direct blocks; under
/// LIKD the seriality rule runs once after each round.
pub fn exp2(d: &mut Derivation, leaf: usize, target: &Position) -> Result<(), SearchError> {
    ensure_leaf(d, leaf)?;
    let mut current = leaf;
    loop {
        let mut fired = false;
        while let Some(inst) =
            first_instance_at(d, current, target, &[RuleId::Trans, RuleId::InterRight])
        {
            current = d.attach_single(current, inst)?;
            fired = true;
        }
        if d.logic() == LogicId::Likd {
            if let Some(inst) = first_instance_at(d, current, target, &[RuleId::D]) {
                current = d.attach_single(current, inst)?;
                fired = true;
            }
        }
        if !fired {
            return Ok(());
        }
    }
}

/// Exhaust the right-implication rules on the target's succedent formulas;
/// the side condition picks between the two variants.
pub fn exp3(d: &mut Derivation, leaf: usize, target: &Position) -> Result<(), SearchError> {
    ensure_leaf(d, leaf)?;
    let mut current = leaf;
    while let Some(inst) =
        first_instance_at(d, current, target, &[RuleId::ImpR1, RuleId::ImpR2])
    {
        current = d.attach_single(current, inst)?;
    }
    Ok(())
}

/// For every implication block whose nested modal block lacks a
/// structurally-included counterpart, add the sharpened counterpart and
/// immediately complete it through realization. Extends the derivation by
/// a single branch.
pub fn exp4(d: &mut Derivation, leaf: usize) -> Result<(), SearchError> {
    ensure_leaf(d, leaf)?;
    if d.is_axiomatic(leaf) {
        return Ok(());
    }
    let logic = d.logic();
    if !calculus::globally_saturated_at(d.sequent(leaf), logic, SatLevel::R3) {
        return Err(precondition("leaf is not global-R3-saturated"));
    }
    let mut current = leaf;
    loop {
        let inst = calculus::applicable(d.sequent(current), logic, CalculusVariant::Cumulative)
            .into_iter()
            .find(|inst| inst.rule == RuleId::InterDown);
        let Some(inst) = inst else {
            return Ok(());
        };
        let realized = realize_inter_down(inst)?;
        current = d.attach_single(current, realized)?;
    }
}

/// Rewrite a downward-interaction instance so that its premise carries the
/// realized block instead of the bare sharpened one.
fn realize_inter_down(mut inst: RuleInstance) -> Result<RuleInstance, SearchError> {
    let [premise] = inst.premises.as_slice() else {
        return Err(precondition("downward interaction must have one premise"));
    };
    let (imp_index, mod_index) = match inst.principal.as_slice() {
        [PrincipalRef { site: Site::ImpBlock, index: i }, PrincipalRef { site: Site::InnerModBlock, index: k }] => {
            (*i, *k)
        }
        _ => return Err(precondition("unexpected principal shape for downward interaction")),
    };
    let imp_pos = Position::root().child(Step::imp(imp_index));
    let source = imp_pos.child(Step::modal(mod_index));
    let target = premise
        .subsequent_at(&inst.pos)
        .map_err(|e| precondition(e.to_string()))?;
    // The instance's sharp block was appended last; an earlier interaction
    // on the same source may have left an older block with the same
    // annotation, so match from the right.
    let sharp_index = target
        .mod_blocks()
        .iter()
        .rposition(|block| block.origin() == Some(&source))
        .ok_or_else(|| precondition("premise lacks the annotated block"))?;
    let sharp_pos = Position::root().child(Step::modal(sharp_index));
    let realized_target = realize(target, &imp_pos, &sharp_pos)?;
    let realized_premise = premise
        .replace_at(&inst.pos, realized_target)
        .map_err(|e| precondition(e.to_string()))?;
    inst.premises = vec![realized_premise];
    Ok(inst)
}

// ---------------------------------------------------------------------------
// Procedures
// ---------------------------------------------------------------------------

enum Proc0Exit {
    AllAxiomatic,
    Saturated(usize),
}

/// One pass of the inner procedure: loop until every leaf is axiomatic or
/// some non-axiomatic leaf is global-R3-saturated. Each round selects the
/// leftmost eligible leaf and runs the macro-step its saturation level
/// calls for, over every eligible target position.
fn procedure0_run(d: &mut Derivation) -> Result<Proc0Exit, SearchError> {
    let logic = d.logic();
    loop {
        let mut all_axiomatic = true;
        let mut saturated = None;
        let mut open = None;
        for id in d.leaves() {
            if d.is_axiomatic(id) {
                continue;
            }
            all_axiomatic = false;
            if calculus::globally_saturated_at(d.sequent(id), logic, SatLevel::R3) {
                saturated.get_or_insert(id);
            } else {
                open.get_or_insert(id);
            }
            if saturated.is_some() {
                break;
            }
        }
        if all_axiomatic {
            return Ok(Proc0Exit::AllAxiomatic);
        }
        if let Some(id) = saturated {
            return Ok(Proc0Exit::Saturated(id));
        }
        let leaf = open.expect("some non-axiomatic leaf exists");
        let s = d.sequent(leaf).clone();
        if calculus::globally_saturated_at(&s, logic, SatLevel::R2) {
            let targets = violating_positions(&s, |t| !calculus::r3_saturated(t, logic));
            expand_all(d, leaf, &targets, exp3)?;
        } else if calculus::globally_saturated_at(&s, logic, SatLevel::R1) {
            let targets = violating_positions(&s, |t| !calculus::r2_saturated(t, logic));
            expand_all(d, leaf, &targets, exp2)?;
        } else {
            let targets = violating_positions(&s, |t| !calculus::r1_saturated(t, logic));
            expand_all(d, leaf, &targets, exp1)?;
        }
    }
}

fn violating_positions(s: &Sequent, violated: impl Fn(&Sequent) -> bool) -> Vec<Position> {
    s.descendants_plus()
        .into_iter()
        .filter(|(_, t)| violated(t))
        .map(|(pos, _)| pos)
        .collect()
}

fn expand_all(
    d: &mut Derivation,
    leaf: usize,
    targets: &[Position],
    step: fn(&mut Derivation, usize, &Position) -> Result<(), SearchError>,
) -> Result<(), SearchError> {
    for target in targets {
        for id in d.leaves_under(leaf) {
            if !d.is_axiomatic(id) {
                step(d, id, target)?;
            }
        }
    }
    Ok(())
}

/// Run the inner procedure from a goal sequent, producing a derivation in
/// which either every leaf is axiomatic or some leaf is global-R3-saturated.
pub fn procedure0(s0: &Sequent, logic: LogicId) -> Result<Derivation, SearchError> {
    if s0.mode() != Mode::Set {
        return Err(precondition("proof search requires a set-based sequent"));
    }
    let mut d = Derivation::new(s0.clone(), logic, DEFAULT_STEP_BUDGET);
    procedure0_run(&mut d)?;
    Ok(d)
}

/// Verdict of a full proof search.
#[derive(Debug)]
pub enum SearchOutcome {
    /// Every branch closed with an axiom.
    Provable { derivation: Derivation },
    /// Some leaf saturated without closing; the countermodel extracted
    /// from it falsifies the goal.
    Unprovable { derivation: Derivation, leaf: usize, countermodel: Model },
}

impl SearchOutcome {
    pub fn is_provable(&self) -> bool {
        matches!(self, SearchOutcome::Provable { .. })
    }

    pub fn derivation(&self) -> &Derivation {
        match self {
            SearchOutcome::Provable { derivation } => derivation,
            SearchOutcome::Unprovable { derivation, .. } => derivation,
        }
    }
}

/// The goal sequent for a formula: an implication splits into antecedent
/// and succedent, mirroring how countermodels are reported at the root
/// world; anything else goes to the succedent whole.
fn initial_sequent(f: &Formula) -> Sequent {
    match f {
        Formula::Imp(a, b) => Sequent::new(
            Mode::Set,
            vec![(**a).clone()],
            vec![SuccElem::Form((**b).clone())],
        ),
        _ => Sequent::goal(Mode::Set, f.clone()),
    }
}

/// Decide a formula with the default step budget.
pub fn prove(f: &Formula, logic: LogicId) -> Result<SearchOutcome, SearchError> {
    prove_with_budget(f, logic, DEFAULT_STEP_BUDGET)
}

/// Decide a formula: alternate the inner procedure with `exp4` until every
/// leaf closes (provable) or some leaf is fully saturated, in which case
/// the extracted countermodel is returned with the derivation.
pub fn prove_with_budget(
    f: &Formula,
    logic: LogicId,
    budget: u64,
) -> Result<SearchOutcome, SearchError> {
    let mut d = Derivation::new(initial_sequent(f), logic, budget);
    loop {
        match procedure0_run(&mut d)? {
            Proc0Exit::AllAxiomatic => return Ok(SearchOutcome::Provable { derivation: d }),
            Proc0Exit::Saturated(found) => {
                let fully_saturated = d.leaves().into_iter().find(|&id| {
                    !d.is_axiomatic(id)
                        && calculus::globally_saturated_at(d.sequent(id), logic, SatLevel::R4)
                });
                match fully_saturated {
                    Some(leaf) => {
                        // Independent re-check of the leaf, then extraction.
                        let countermodel = extract_countermodel(d.sequent(leaf), logic)
                            .map_err(|e| precondition(e.to_string()))?;
                        return Ok(SearchOutcome::Unprovable { derivation: d, leaf, countermodel });
                    }
                    None => exp4(&mut d, found)?,
                }
            }
        }
    }
}

/// Verdict of the restricted search without the downward-interaction rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinusVerdict {
    Provable,
    Unprovable,
    BudgetExhausted,
}

/// Proof search in the restricted calculus: the inner procedure alone
/// decides provability there, since the downward-interaction rule is the
/// only rule it never applies.
pub fn prove_minus(f: &Formula, logic: LogicId, budget: u64) -> MinusVerdict {
    let mut d = Derivation::new(initial_sequent(f), logic, budget.max(1));
    match procedure0_run(&mut d) {
        Ok(Proc0Exit::AllAxiomatic) => MinusVerdict::Provable,
        Ok(Proc0Exit::Saturated(_)) => MinusVerdict::Unprovable,
        Err(_) => MinusVerdict::BudgetExhausted,
    }
}
