//! Finite bi-relational Kripke models: a preorder ≤ for the intuitionistic
//! dimension, an accessibility relation R for the modal one, hereditary
//! valuations, forcing of formulas and sequents, frame-property checks,
//! countermodel extraction from global-saturated sequents, and a bounded
//! brute-force validity oracle.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::calculus::{self, LogicId, SatLevel};
use crate::formula::Formula;
use crate::sequent::{structurally_included, BlockKind, Sequent};

/// A finite bi-relational model `(W, ≤, R, V)`.
///
/// Worlds are identified by strings; relations and valuation are stored by
/// world index. Intended invariants — `≤` a preorder, `V` hereditary — are
/// not enforced on construction; [`check_frame`] reports on them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    worlds: Vec<String>,
    le: BTreeSet<(usize, usize)>,
    r: BTreeSet<(usize, usize)>,
    val: BTreeMap<String, BTreeSet<usize>>,
}

/// Errors from model construction, lookup and countermodel extraction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unknown world '{0}'")]
    UnknownWorld(String),
    #[error("sequent is not global-saturated: {0}")]
    NotSaturated(String),
    #[error("malformed model JSON: {0}")]
    Json(String),
}

impl Model {
    /// Build a model from world names and name-level relations.
    pub fn from_parts(
        worlds: Vec<String>,
        le: &[(String, String)],
        r: &[(String, String)],
        val: &BTreeMap<String, Vec<String>>,
    ) -> Result<Model, SemanticsError> {
        let index: HashMap<&str, usize> = worlds
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i))
            .collect();
        let resolve = |w: &String| -> Result<usize, SemanticsError> {
            index
                .get(w.as_str())
                .copied()
                .ok_or_else(|| SemanticsError::UnknownWorld(w.clone()))
        };
        let mut le_set = BTreeSet::new();
        for (a, b) in le {
            le_set.insert((resolve(a)?, resolve(b)?));
        }
        let mut r_set = BTreeSet::new();
        for (a, b) in r {
            r_set.insert((resolve(a)?, resolve(b)?));
        }
        let mut val_set = BTreeMap::new();
        for (atom, members) in val {
            let mut set = BTreeSet::new();
            for w in members {
                set.insert(resolve(w)?);
            }
            val_set.insert(atom.clone(), set);
        }
        Ok(Model { worlds, le: le_set, r: r_set, val: val_set })
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_index(&self, world: &str) -> Result<usize, SemanticsError> {
        self.worlds
            .iter()
            .position(|w| w == world)
            .ok_or_else(|| SemanticsError::UnknownWorld(world.to_string()))
    }

    pub fn le_holds(&self, a: usize, b: usize) -> bool {
        self.le.contains(&(a, b))
    }

    pub fn r_holds(&self, a: usize, b: usize) -> bool {
        self.r.contains(&(a, b))
    }

    /// The atoms the valuation mentions.
    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.val.keys().map(String::as_str)
    }

    fn holds_atom(&self, atom: &str, world: usize) -> bool {
        self.val.get(atom).is_some_and(|set| set.contains(&world))
    }

    /// JSON form: `{"worlds": [...], "le": [[a,b]...], "r": [[a,b]...],
    /// "val": {"p": [...]}}` — keys sorted, pairs in index order.
    pub fn to_json(&self) -> Value {
        let name = |i: &usize| self.worlds[*i].clone();
        json!({
            "worlds": self.worlds,
            "le": self.le.iter().map(|(a, b)| json!([name(a), name(b)])).collect::<Vec<_>>(),
            "r": self.r.iter().map(|(a, b)| json!([name(a), name(b)])).collect::<Vec<_>>(),
            "val": self.val.iter().map(|(p, set)| {
                (p.clone(), set.iter().map(name).collect::<Vec<_>>())
            }).collect::<BTreeMap<_, _>>(),
        })
    }

    pub fn from_json(value: &Value) -> Result<Model, SemanticsError> {
        let bad = |msg: &str| SemanticsError::Json(msg.to_string());
        let obj = value.as_object().ok_or_else(|| bad("expected an object"))?;
        let worlds: Vec<String> = obj
            .get("worlds")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing 'worlds' array"))?
            .iter()
            .map(|w| w.as_str().map(str::to_string).ok_or_else(|| bad("worlds must be strings")))
            .collect::<Result<_, _>>()?;
        let pairs = |key: &str| -> Result<Vec<(String, String)>, SemanticsError> {
            obj.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| bad(&format!("missing '{key}' array")))?
                .iter()
                .map(|p| {
                    let arr = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                        bad(&format!("'{key}' entries must be two-element arrays"))
                    })?;
                    let a = arr[0].as_str().ok_or_else(|| bad("relation entries must be strings"))?;
                    let b = arr[1].as_str().ok_or_else(|| bad("relation entries must be strings"))?;
                    Ok((a.to_string(), b.to_string()))
                })
                .collect()
        };
        let le = pairs("le")?;
        let r = pairs("r")?;
        let mut val = BTreeMap::new();
        if let Some(map) = obj.get("val") {
            let map = map.as_object().ok_or_else(|| bad("'val' must be an object"))?;
            for (atom, members) in map {
                let members: Vec<String> = members
                    .as_array()
                    .ok_or_else(|| bad("valuation entries must be arrays"))?
                    .iter()
                    .map(|w| {
                        w.as_str().map(str::to_string).ok_or_else(|| bad("worlds must be strings"))
                    })
                    .collect::<Result<_, _>>()?;
                val.insert(atom.clone(), members);
            }
        }
        Model::from_parts(worlds, &le, &r, &val)
    }
}

/// Checkable frame and valuation properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameProperty {
    /// ≤ is reflexive and transitive.
    Preorder,
    /// The valuation is ≤-upward closed.
    Heredity,
    /// Forward confluence: `x ≤ x′ ∧ R x y → ∃y′. R x′ y′ ∧ y ≤ y′`.
    Fc,
    /// Downward confluence: `x ≤ x′ ∧ R x′ y → ∃y′. R x y′ ∧ y′ ≤ y`.
    Dc,
    /// R is serial.
    Serial,
    /// R is reflexive.
    Reflexive,
    /// R is transitive.
    Transitive,
}

impl fmt::Display for FrameProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameProperty::Preorder => "preorder",
            FrameProperty::Heredity => "heredity",
            FrameProperty::Fc => "fc",
            FrameProperty::Dc => "dc",
            FrameProperty::Serial => "serial",
            FrameProperty::Reflexive => "reflexive",
            FrameProperty::Transitive => "transitive",
        })
    }
}

/// Verdict of one property check; `witness` names the offending worlds
/// (and, for heredity, the atom) when the property fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyCheck {
    pub property: FrameProperty,
    pub holds: bool,
    pub witness: Option<Vec<String>>,
}

/// The properties every model of a logic's frame class must satisfy.
pub fn frame_properties_for(logic: LogicId) -> Vec<FrameProperty> {
    let mut props = vec![
        FrameProperty::Preorder,
        FrameProperty::Heredity,
        FrameProperty::Fc,
        FrameProperty::Dc,
    ];
    match logic {
        LogicId::Lik => {}
        LogicId::Likd => props.push(FrameProperty::Serial),
        LogicId::Likt => props.push(FrameProperty::Reflexive),
    }
    props
}

/// Check the requested properties, reporting a witness for each failure.
pub fn check_frame(m: &Model, props: &[FrameProperty]) -> Vec<PropertyCheck> {
    props
        .iter()
        .map(|&property| {
            let witness = find_violation(m, property);
            PropertyCheck { property, holds: witness.is_none(), witness }
        })
        .collect()
}

fn find_violation(m: &Model, property: FrameProperty) -> Option<Vec<String>> {
    let n = m.worlds.len();
    let name = |i: usize| m.worlds[i].clone();
    match property {
        FrameProperty::Preorder => {
            for i in 0..n {
                if !m.le_holds(i, i) {
                    return Some(vec![name(i)]);
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if !m.le_holds(i, j) {
                        continue;
                    }
                    for k in 0..n {
                        if m.le_holds(j, k) && !m.le_holds(i, k) {
                            return Some(vec![name(i), name(j), name(k)]);
                        }
                    }
                }
            }
            None
        }
        FrameProperty::Heredity => {
            for (atom, set) in &m.val {
                for &i in set {
                    for j in 0..n {
                        if m.le_holds(i, j) && !set.contains(&j) {
                            return Some(vec![name(i), name(j), atom.clone()]);
                        }
                    }
                }
            }
            None
        }
        FrameProperty::Fc => {
            for &(x, x1) in &m.le {
                for y in 0..n {
                    if !m.r_holds(x, y) {
                        continue;
                    }
                    let ok = (0..n).any(|y1| m.r_holds(x1, y1) && m.le_holds(y, y1));
                    if !ok {
                        return Some(vec![name(x), name(x1), name(y)]);
                    }
                }
            }
            None
        }
        FrameProperty::Dc => {
            for &(x, x1) in &m.le {
                for y in 0..n {
                    if !m.r_holds(x1, y) {
                        continue;
                    }
                    let ok = (0..n).any(|y1| m.r_holds(x, y1) && m.le_holds(y1, y));
                    if !ok {
                        return Some(vec![name(x), name(x1), name(y)]);
                    }
                }
            }
            None
        }
        FrameProperty::Serial => {
            (0..n)
                .find(|&i| (0..n).all(|j| !m.r_holds(i, j)))
                .map(|i| vec![name(i)])
        }
        FrameProperty::Reflexive => {
            (0..n).find(|&i| !m.r_holds(i, i)).map(|i| vec![name(i)])
        }
        FrameProperty::Transitive => {
            for &(i, j) in &m.r {
                for k in 0..n {
                    if m.r_holds(j, k) && !m.r_holds(i, k) {
                        return Some(vec![name(i), name(j), name(k)]);
                    }
                }
            }
            None
        }
    }
}

/// Local forcing `x ⊩ A`: implication quantifies over ≤-successors, `□`
/// universally and `◇` existentially over R-successors.
///
/// Meaningful on models passing the preorder and heredity checks.
pub fn forces(m: &Model, world: &str, f: &Formula) -> Result<bool, SemanticsError> {
    let w = m.world_index(world)?;
    Ok(forces_at(m, w, f))
}

fn forces_at(m: &Model, w: usize, f: &Formula) -> bool {
    match f {
        Formula::Atom(p) => m.holds_atom(p, w),
        Formula::Top => true,
        Formula::Bot => false,
        Formula::And(a, b) => forces_at(m, w, a) && forces_at(m, w, b),
        Formula::Or(a, b) => forces_at(m, w, a) || forces_at(m, w, b),
        Formula::Imp(a, b) => (0..m.worlds.len())
            .filter(|&v| m.le_holds(w, v))
            .all(|v| !forces_at(m, v, a) || forces_at(m, v, b)),
        Formula::Box(a) => (0..m.worlds.len())
            .filter(|&v| m.r_holds(w, v))
            .all(|v| forces_at(m, v, a)),
        Formula::Dia(a) => (0..m.worlds.len())
            .filter(|&v| m.r_holds(w, v))
            .any(|v| forces_at(m, v, a)),
    }
}

/// Extended forcing `x ⊩ Γ ⇒ Δ`: some antecedent formula fails at `x` or
/// some succedent element holds at `x`, where a modal block `[T]` holds when
/// every R-successor forces `T` and an implication block `⟨T⟩` holds when
/// every ≤-successor forces `T`. The empty sequent is never forced.
pub fn forces_sequent(m: &Model, world: &str, s: &Sequent) -> Result<bool, SemanticsError> {
    let w = m.world_index(world)?;
    Ok(forces_sequent_at(m, w, s))
}

fn forces_sequent_at(m: &Model, w: usize, s: &Sequent) -> bool {
    if s.ant().iter().any(|f| !forces_at(m, w, f)) {
        return true;
    }
    if s.suc_formulas().iter().any(|f| forces_at(m, w, f)) {
        return true;
    }
    if s.imp_blocks().iter().any(|t| {
        (0..m.worlds.len())
            .filter(|&v| m.le_holds(w, v))
            .all(|v| forces_sequent_at(m, v, t))
    }) {
        return true;
    }
    s.mod_blocks().iter().any(|t| {
        (0..m.worlds.len())
            .filter(|&v| m.r_holds(w, v))
            .all(|v| forces_sequent_at(m, v, t))
    })
}

/// Build the countermodel of a global-saturated sequent.
///
/// Worlds are the nested subsequent positions (the root included); `x ≤ y`
/// iff the sequent at `x` is structurally included in the one at `y`;
/// `R x y` iff `y`'s position is a direct modal block of `x`'s — extended,
/// under LIKD, with a self-loop on every world whose succedent has no
/// top-level modal block and, under LIKT, with self-loops everywhere;
/// `V(p)` collects the worlds with `p` in their antecedent.
///
/// The leaf is independently re-checked: an axiom anywhere or any nested
/// position short of full saturation is rejected.
pub fn extract_countermodel(leaf: &Sequent, logic: LogicId) -> Result<Model, SemanticsError> {
    match calculus::saturation_level(leaf, logic) {
        Err(e) => return Err(SemanticsError::NotSaturated(e.to_string())),
        Ok(report) if report.global < SatLevel::R4 => {
            return Err(SemanticsError::NotSaturated(format!(
                "global saturation is {}, need R4",
                report.global
            )))
        }
        Ok(_) => {}
    }
    let nodes = leaf.descendants_plus();
    let worlds: Vec<String> = nodes.iter().map(|(pos, _)| pos.to_string()).collect();
    let mut le = BTreeSet::new();
    let mut r = BTreeSet::new();
    for (i, (pos_i, seq_i)) in nodes.iter().enumerate() {
        for (j, (pos_j, seq_j)) in nodes.iter().enumerate() {
            if structurally_included(seq_i, seq_j) {
                le.insert((i, j));
            }
            let direct_modal_child = pos_j.parent().as_ref() == Some(pos_i)
                && pos_j.last().is_some_and(|s| s.kind == BlockKind::Mod);
            if direct_modal_child {
                r.insert((i, j));
            }
        }
        match logic {
            LogicId::Lik => {}
            LogicId::Likd => {
                if seq_i.mod_blocks().is_empty() {
                    r.insert((i, i));
                }
            }
            LogicId::Likt => {
                r.insert((i, i));
            }
        }
    }
    let mut atoms = BTreeSet::new();
    for (_, seq) in &nodes {
        for f in seq.ant().iter().chain(seq.suc_formulas().iter()) {
            atoms.extend(f.atoms());
        }
    }
    let mut val = BTreeMap::new();
    for atom in atoms {
        let members: BTreeSet<usize> = nodes
            .iter()
            .enumerate()
            .filter(|(_, (_, seq))| seq.contains_ant(&Formula::Atom(atom.clone())))
            .map(|(i, _)| i)
            .collect();
        val.insert(atom, members);
    }
    Ok(Model { worlds, le, r, val })
}

/// Result of the bounded model search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteForceStatus {
    /// A model of the logic's frame class falsifying the formula at the
    /// named world. The first falsifier in canonical enumeration order.
    Falsified { model: Model, world: String },
    /// No countermodel with at most the requested number of worlds; says
    /// nothing about larger models.
    NoCountermodelUpToBound,
}

/// Relations on up to [`MAX_ORACLE_WORLDS`] worlds packed row-major into a
/// bitmask: bit `i*n + j` is the pair `(i, j)`.
const MAX_ORACLE_WORLDS: usize = 4;

struct PreorderFrames {
    le: u32,
    /// ≤-upward-closed subsets of the worlds, ascending.
    upclosed: Vec<u32>,
    /// Accessibility relations compatible with the logic's frame class and
    /// forward/downward confluence, ascending.
    rs: Vec<u32>,
}

fn rel_holds(mask: u32, n: usize, i: usize, j: usize) -> bool {
    mask & (1 << (i * n + j)) != 0
}

fn row(mask: u32, n: usize, i: usize) -> u32 {
    (mask >> (i * n)) & ((1 << n) - 1)
}

fn is_preorder(mask: u32, n: usize) -> bool {
    for i in 0..n {
        if !rel_holds(mask, n, i, i) {
            return false;
        }
    }
    for i in 0..n {
        for j in 0..n {
            if rel_holds(mask, n, i, j) && row(mask, n, j) & !row(mask, n, i) != 0 {
                return false;
            }
        }
    }
    true
}

fn confluent(le: u32, r: u32, n: usize) -> bool {
    for x in 0..n {
        for x1 in 0..n {
            if !rel_holds(le, n, x, x1) {
                continue;
            }
            // FC: every R-successor of x has a ≤-larger R-successor of x′.
            for y in 0..n {
                if rel_holds(r, n, x, y)
                    && (0..n).all(|y1| !(rel_holds(r, n, x1, y1) && rel_holds(le, n, y, y1)))
                {
                    return false;
                }
            }
            // DC: every R-successor of x′ has a ≤-smaller R-successor of x.
            for y in 0..n {
                if rel_holds(r, n, x1, y)
                    && (0..n).all(|y1| !(rel_holds(r, n, x, y1) && rel_holds(le, n, y1, y)))
                {
                    return false;
                }
            }
        }
    }
    true
}

fn class_ok(r: u32, n: usize, logic: LogicId) -> bool {
    match logic {
        LogicId::Lik => true,
        LogicId::Likd => (0..n).all(|i| row(r, n, i) != 0),
        LogicId::Likt => (0..n).all(|i| rel_holds(r, n, i, i)),
    }
}

/// Frames for (n, logic), built once and shared.
fn frames_for(n: usize, logic: LogicId) -> Arc<Vec<PreorderFrames>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, LogicId), Arc<Vec<PreorderFrames>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("frame cache poisoned");
    guard
        .entry((n, logic))
        .or_insert_with(|| {
            let full = 1u64 << (n * n);
            let mut out = Vec::new();
            for le in 0..full {
                let le = le as u32;
                if !is_preorder(le, n) {
                    continue;
                }
                let upclosed: Vec<u32> = (0..(1u32 << n))
                    .filter(|&set| {
                        (0..n).all(|i| {
                            set & (1 << i) == 0 || row(le, n, i) & !set == 0
                        })
                    })
                    .collect();
                let rs: Vec<u32> = (0..full)
                    .map(|r| r as u32)
                    .filter(|&r| class_ok(r, n, logic) && confluent(le, r, n))
                    .collect();
                out.push(PreorderFrames { le, upclosed, rs });
            }
            Arc::new(out)
        })
        .clone()
}

/// Exhaustively search for a countermodel of the logic's frame class with
/// at most `max_worlds` worlds (capped at 4), over the atoms of `f`.
///
/// The verdict is one-sided: `NoCountermodelUpToBound` never certifies
/// validity. The falsifier returned is the first in a fixed canonical
/// order (world count, then ≤, then R, then valuation, then world).
pub fn brute_force_status(f: &Formula, logic: LogicId, max_worlds: usize) -> BruteForceStatus {
    let bound = max_worlds.min(MAX_ORACLE_WORLDS);
    let atoms: Vec<String> = f.atoms().into_iter().collect();
    // Subformulas ordered children-first (strictly smaller size first).
    let mut subs: Vec<Formula> = f.subformulas().into_iter().collect();
    subs.sort_by_key(Formula::size);
    for n in 1..=bound {
        let frames = frames_for(n, logic);
        for frame in frames.iter() {
            let le_succ: Vec<u32> = (0..n).map(|i| row(frame.le, n, i)).collect();
            for &r in &frame.rs {
                let r_succ: Vec<u32> = (0..n).map(|i| row(r, n, i)).collect();
                // Valuations: one up-closed set per atom, mixed-radix over
                // the up-closed list with the first atom most significant.
                let choices = frame.upclosed.len();
                let total: usize = choices.checked_pow(atoms.len() as u32).unwrap_or(0);
                for v in 0..total.max(1) {
                    let mut assignment: HashMap<&str, u32> = HashMap::new();
                    let mut rest = v;
                    for atom in atoms.iter().rev() {
                        assignment.insert(atom.as_str(), frame.upclosed[rest % choices]);
                        rest /= choices;
                    }
                    if let Some(world) =
                        falsifying_world(&subs, f, n, &le_succ, &r_succ, &assignment)
                    {
                        let model = model_from_masks(n, frame.le, r, &atoms, &assignment);
                        let world = model.worlds[world].clone();
                        return BruteForceStatus::Falsified { model, world };
                    }
                }
            }
        }
    }
    BruteForceStatus::NoCountermodelUpToBound
}

/// Evaluate all subformulas as world-bitmasks; return the least world index
/// where `f` fails, if any.
fn falsifying_world(
    subs: &[Formula],
    f: &Formula,
    n: usize,
    le_succ: &[u32],
    r_succ: &[u32],
    assignment: &HashMap<&str, u32>,
) -> Option<usize> {
    let full = (1u32 << n) - 1;
    let mut masks: BTreeMap<&Formula, u32> = BTreeMap::new();
    for sub in subs {
        let mask = match sub {
            Formula::Atom(p) => *assignment.get(p.as_str()).unwrap_or(&0),
            Formula::Top => full,
            Formula::Bot => 0,
            Formula::And(a, b) => masks[a.as_ref()] & masks[b.as_ref()],
            Formula::Or(a, b) => masks[a.as_ref()] | masks[b.as_ref()],
            Formula::Imp(a, b) => {
                let bad = masks[a.as_ref()] & !masks[b.as_ref()];
                (0..n)
                    .filter(|&i| le_succ[i] & bad == 0)
                    .fold(0, |acc, i| acc | 1 << i)
            }
            Formula::Box(a) => {
                let good = masks[a.as_ref()];
                (0..n)
                    .filter(|&i| r_succ[i] & !good == 0)
                    .fold(0, |acc, i| acc | 1 << i)
            }
            Formula::Dia(a) => {
                let good = masks[a.as_ref()];
                (0..n)
                    .filter(|&i| r_succ[i] & good != 0)
                    .fold(0, |acc, i| acc | 1 << i)
            }
        };
        masks.insert(sub, mask);
    }
    let forced = masks[f];
    (0..n).find(|&i| forced & (1 << i) == 0)
}

fn model_from_masks(
    n: usize,
    le: u32,
    r: u32,
    atoms: &[String],
    assignment: &HashMap<&str, u32>,
) -> Model {
    let worlds: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let mut le_set = BTreeSet::new();
    let mut r_set = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if rel_holds(le, n, i, j) {
                le_set.insert((i, j));
            }
            if rel_holds(r, n, i, j) {
                r_set.insert((i, j));
            }
        }
    }
    let val = atoms
        .iter()
        .map(|p| {
            let mask = assignment.get(p.as_str()).copied().unwrap_or(0);
            let set: BTreeSet<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            (p.clone(), set)
        })
        .collect();
    Model { worlds: worlds.clone(), le: le_set, r: r_set, val }
}

/// Sample a random model of the logic's frame class: ≤ is the
/// reflexive-transitive closure of a random DAG, R is sampled uniformly
/// (made reflexive under LIKT) and rejected until forward/downward
/// confluence — and seriality, under LIKD — hold; valuations are repaired
/// upward to restore heredity. Falls back to a discrete model if rejection
/// keeps failing.
pub fn random_model(
    rng: &mut impl Rng,
    max_worlds: usize,
    atoms: &[String],
    logic: LogicId,
) -> Model {
    let max_worlds = max_worlds.max(1);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=max_worlds);
        // Random DAG on 0..n with edges i → j only for i < j.
        let mut le = vec![false; n * n];
        for i in 0..n {
            le[i * n + i] = true;
            for j in (i + 1)..n {
                if rng.gen_bool(0.25) {
                    le[i * n + j] = true;
                }
            }
        }
        // Transitive closure (edges point up the order, one pass suffices
        // when processed from high to low).
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                if le[i * n + j] {
                    for k in 0..n {
                        if le[j * n + k] {
                            le[i * n + k] = true;
                        }
                    }
                }
            }
        }
        let mut r = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                if rng.gen_bool(0.3) {
                    r[i * n + j] = true;
                }
            }
        }
        if logic == LogicId::Likt {
            for i in 0..n {
                r[i * n + i] = true;
            }
        }
        let le_mask = pack(&le);
        let r_mask = pack(&r);
        if !(class_ok(r_mask, n, logic) && confluent(le_mask, r_mask, n)) {
            continue;
        }
        let val = atoms
            .iter()
            .map(|p| {
                let mut set: BTreeSet<usize> =
                    (0..n).filter(|_| rng.gen_bool(0.5)).collect();
                // Upward closure restores heredity.
                for i in 0..n {
                    if set.contains(&i) {
                        for j in 0..n {
                            if le[i * n + j] {
                                set.insert(j);
                            }
                        }
                    }
                }
                (p.clone(), set)
            })
            .collect();
        let mut le_set = BTreeSet::new();
        let mut r_set = BTreeSet::new();
        for i in 0..n {
            for j in 0..n {
                if le[i * n + j] {
                    le_set.insert((i, j));
                }
                if r[i * n + j] {
                    r_set.insert((i, j));
                }
            }
        }
        return Model {
            worlds: (0..n).map(|i| format!("w{i}")).collect(),
            le: le_set,
            r: r_set,
            val,
        };
    }
    // One reflexive world; R empty for LIK, a self-loop otherwise.
    let r = match logic {
        LogicId::Lik => BTreeSet::new(),
        _ => BTreeSet::from([(0, 0)]),
    };
    Model {
        worlds: vec!["w0".to_string()],
        le: BTreeSet::from([(0, 0)]),
        r,
        val: atoms.iter().map(|p| (p.clone(), BTreeSet::new())).collect(),
    }
}

fn pack(rel: &[bool]) -> u32 {
    rel.iter()
        .enumerate()
        .filter(|(_, &set)| set)
        .fold(0, |mask, (bit, _)| mask | 1 << bit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::sequent::{parse_sequent, Mode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fml(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn seq(s: &str) -> Sequent {
        parse_sequent(s, Mode::Set).unwrap()
    }

    /// A small model exercising both relations: x0 sees x1 through R,
    /// x1 sits ≤-below x2, and only x2 makes p true.
    fn three_world_model() -> Model {
        let w = |s: &str| s.to_string();
        Model::from_parts(
            vec![w("x0"), w("x1"), w("x2")],
            &[
                (w("x0"), w("x0")),
                (w("x1"), w("x1")),
                (w("x2"), w("x2")),
                (w("x1"), w("x2")),
            ],
            &[(w("x0"), w("x1"))],
            &BTreeMap::from([("p".to_string(), vec![w("x2")]), ("q".to_string(), vec![])]),
        )
        .unwrap()
    }

    #[test]
    fn forcing_in_the_three_world_model() {
        let m = three_world_model();
        assert!(forces(&m, "x2", &fml("p")).unwrap());
        assert!(!forces(&m, "x1", &fml("p")).unwrap());
        // x1 ⊮ p ⊃ q because x2 ≥ x1 forces p but not q.
        assert!(!forces(&m, "x1", &fml("p -> q")).unwrap());
        // x0 forces ◇p ⊃ □q vacuously? No: x1 is reachable and x1 ⊮ p, so
        // ◇p fails at x0; the implication holds at x0 itself...
        assert!(!forces(&m, "x0", &fml("<>p")).unwrap());
        // ...and at every ≤-successor of x0 (only x0), so it is forced.
        assert!(forces(&m, "x0", &fml("<>p -> []q")).unwrap());
        // But □(p ⊃ q) fails at x0 since x1 ⊮ p ⊃ q.
        assert!(!forces(&m, "x0", &fml("[](p -> q)")).unwrap());
        // Hence the goal formula is falsified at the root world.
        assert!(!forces(&m, "x0", &fml("(<>p -> []q) -> [](p -> q)")).unwrap());
        assert!(forces(&m, "x0", &fml("T")).unwrap());
        assert_eq!(
            forces(&m, "nowhere", &fml("p")),
            Err(SemanticsError::UnknownWorld("nowhere".to_string()))
        );
    }

    #[test]
    fn sequent_forcing() {
        let m = three_world_model();
        // The empty sequent is never forced.
        assert!(!forces_sequent(&m, "x0", &seq("=>")).unwrap());
        for w in ["x0", "x1", "x2"] {
            assert!(forces_sequent(&m, w, &seq("p => p")).unwrap());
        }
        // A modal block holds when all R-successors force its body.
        assert!(!forces_sequent(&m, "x0", &seq("=> [=> p]")).unwrap());
        assert!(forces_sequent(&m, "x1", &seq("=> [=> p]")).unwrap()); // no successors
        // An implication block quantifies over ≤-successors.
        assert!(forces_sequent(&m, "x0", &seq("=> <p =>>")).unwrap());
        assert!(!forces_sequent(&m, "x1", &seq("=> <p =>>")).unwrap()); // x2 forces p
    }

    #[test]
    fn frame_checks_pass_on_the_example_model() {
        let m = three_world_model();
        let checks = check_frame(
            &m,
            &[
                FrameProperty::Preorder,
                FrameProperty::Heredity,
                FrameProperty::Fc,
                FrameProperty::Dc,
            ],
        );
        assert!(checks.iter().all(|c| c.holds), "{checks:?}");
    }

    #[test]
    fn frame_check_failures_carry_witnesses() {
        let w = |s: &str| s.to_string();
        // Single reflexive world, R empty: confluent but not serial.
        let single = Model::from_parts(
            vec![w("w")],
            &[(w("w"), w("w"))],
            &[],
            &BTreeMap::new(),
        )
        .unwrap();
        let checks = check_frame(
            &single,
            &[FrameProperty::Fc, FrameProperty::Dc, FrameProperty::Serial],
        );
        assert!(checks[0].holds && checks[1].holds);
        assert!(!checks[2].holds);

        // w ≤ w′ with R w v only: FC fails with witness (w, w′, v).
        let fc_broken = Model::from_parts(
            vec![w("w"), w("w'"), w("v")],
            &[
                (w("w"), w("w")),
                (w("w'"), w("w'")),
                (w("v"), w("v")),
                (w("w"), w("w'")),
            ],
            &[(w("w"), w("v"))],
            &BTreeMap::new(),
        )
        .unwrap();
        let checks = check_frame(&fc_broken, &[FrameProperty::Fc]);
        assert_eq!(checks[0].witness, Some(vec![w("w"), w("w'"), w("v")]));

        // Heredity violation names the worlds and the atom.
        let hered_broken = Model::from_parts(
            vec![w("a"), w("b")],
            &[(w("a"), w("a")), (w("b"), w("b")), (w("a"), w("b"))],
            &[],
            &BTreeMap::from([("p".to_string(), vec![w("a")])]),
        )
        .unwrap();
        let checks = check_frame(&hered_broken, &[FrameProperty::Heredity]);
        assert_eq!(checks[0].witness, Some(vec![w("a"), w("b"), "p".to_string()]));
    }

    #[test]
    fn extraction_requires_global_saturation() {
        // ⊃R condition unmet: not R3-saturated.
        let err = extract_countermodel(&seq("=> p -> q"), LogicId::Lik).unwrap_err();
        assert!(matches!(err, SemanticsError::NotSaturated(_)));
        // Axioms are rejected outright.
        let err = extract_countermodel(&seq("p => p"), LogicId::Lik).unwrap_err();
        assert!(matches!(err, SemanticsError::NotSaturated(_)));
    }

    #[test]
    fn extraction_of_simple_leaves() {
        let m = extract_countermodel(&seq("=> p"), LogicId::Lik).unwrap();
        assert_eq!(m.worlds(), &["r".to_string()]);
        assert!(m.r.is_empty());
        assert!(!forces(&m, "r", &fml("p")).unwrap());

        // Under LIKD, worlds without modal blocks get self-loops.
        let m = extract_countermodel(&seq("=> p"), LogicId::Likd).unwrap();
        assert!(m.r_holds(0, 0));
        let checks = check_frame(&m, &frame_properties_for(LogicId::Likd));
        assert!(checks.iter().all(|c| c.holds));

        // Under LIKT, every world gets one.
        let m = extract_countermodel(&seq("p => q"), LogicId::Likt).unwrap();
        assert!(m.r_holds(0, 0));
        assert!(forces(&m, "r", &fml("p")).unwrap());
        assert!(!forces(&m, "r", &fml("q")).unwrap());
    }

    #[test]
    fn oracle_on_known_formulas() {
        // Intuitionistically valid.
        assert_eq!(
            brute_force_status(&fml("p -> p"), LogicId::Lik, 3),
            BruteForceStatus::NoCountermodelUpToBound
        );
        // ◇⊤ fails in LIK: one world, R empty.
        match brute_force_status(&fml("<>T"), LogicId::Lik, 3) {
            BruteForceStatus::Falsified { model, world } => {
                assert_eq!(model.worlds().len(), 1);
                assert!(model.r.is_empty());
                assert_eq!(world, "w0");
            }
            other => panic!("expected a countermodel, got {other:?}"),
        }
        // ...but holds on serial frames.
        assert_eq!(
            brute_force_status(&fml("<>T"), LogicId::Likd, 3),
            BruteForceStatus::NoCountermodelUpToBound
        );
        // □p ⊃ p needs reflexivity.
        assert!(matches!(
            brute_force_status(&fml("[]p -> p"), LogicId::Lik, 3),
            BruteForceStatus::Falsified { .. }
        ));
        assert_eq!(
            brute_force_status(&fml("[]p -> p"), LogicId::Likt, 3),
            BruteForceStatus::NoCountermodelUpToBound
        );
        // An axiom of the base logic: no countermodel at bound 3.
        assert_eq!(
            brute_force_status(&fml("[](p | q) -> <>p | []q"), LogicId::Lik, 3),
            BruteForceStatus::NoCountermodelUpToBound
        );
        // Excluded middle fails intuitionistically even with R empty.
        assert!(matches!(
            brute_force_status(&fml("p | (p -> F)"), LogicId::Lik, 2),
            BruteForceStatus::Falsified { .. }
        ));
    }

    #[test]
    fn oracle_falsifiers_pass_frame_checks() {
        for (text, logic) in [
            ("<>p -> []p", LogicId::Lik),
            ("[]F", LogicId::Lik),
            ("p -> []p", LogicId::Likd),
            ("<>p -> p", LogicId::Likt),
        ] {
            let f = fml(text);
            match brute_force_status(&f, logic, 3) {
                BruteForceStatus::Falsified { model, world } => {
                    let checks = check_frame(&model, &frame_properties_for(logic));
                    assert!(checks.iter().all(|c| c.holds), "{text}: {checks:?}");
                    assert!(!forces(&model, &world, &f).unwrap(), "{text} not falsified");
                }
                other => panic!("{text} under {logic}: expected falsifier, got {other:?}"),
            }
        }
    }

    #[test]
    fn random_models_satisfy_their_frame_class() {
        let atoms = vec!["p".to_string(), "q".to_string()];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for logic in LogicId::ALL {
            for _ in 0..40 {
                let m = random_model(&mut rng, 5, &atoms, logic);
                let checks = check_frame(&m, &frame_properties_for(logic));
                assert!(checks.iter().all(|c| c.holds), "{logic}: {checks:?}");
            }
        }
    }

    #[test]
    fn heredity_of_forcing_on_random_models() {
        let atoms = vec!["p".to_string(), "q".to_string()];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples = [
            fml("p -> q"),
            fml("[](p | q)"),
            fml("<>p & (q -> p)"),
            fml("[]p -> <>(p & q)"),
        ];
        for _ in 0..60 {
            let m = random_model(&mut rng, 5, &atoms, LogicId::Lik);
            for f in &samples {
                for sub in f.subformulas() {
                    for (i, w) in m.worlds().iter().enumerate() {
                        if !forces(&m, w, &sub).unwrap() {
                            continue;
                        }
                        for (j, v) in m.worlds().iter().enumerate() {
                            if m.le_holds(i, j) {
                                assert!(
                                    forces(&m, v, &sub).unwrap(),
                                    "heredity broken at {w} ≤ {v} for {sub}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn model_json_round_trips() {
        let m = three_world_model();
        let json = m.to_json();
        assert_eq!(Model::from_json(&json).unwrap(), m);
        assert_eq!(json["worlds"][0], "x0");
        assert_eq!(json["r"][0], json!(["x0", "x1"]));
        // Unknown worlds in relations are rejected.
        let bad = json!({"worlds": ["a"], "le": [["a","z"]], "r": [], "val": {}});
        assert_eq!(
            Model::from_json(&bad),
            Err(SemanticsError::UnknownWorld("z".to_string()))
        );
    }
}
