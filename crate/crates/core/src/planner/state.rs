use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ManipulationPrimitive, MpKind};
use crate::dspace::{
    best_direction, classify_sdof, intersect_predicates, predicates_for, ContactPredicate,
    DirectionSet, SdofLabel, SdofValue,
};
use crate::error::PlanError;
use crate::geometry::Direction;
use crate::model::{AssemblyModel, Semantic, Ssr, SsrKind};

/// Whether primitives take the assembly apart or put it back together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    Disassembly,
    Assembly,
}

impl Phase {
    pub fn flipped(self) -> Phase {
        match self {
            Phase::Disassembly => Phase::Assembly,
            Phase::Assembly => Phase::Disassembly,
        }
    }
}

/// Symbolic world state between manipulation primitives.
///
/// Relations are tracked by index into the model: a relation is live while
/// both its components are present, and a loosened screwed relation acts as
/// a concentric one.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicState {
    /// Aggregate label of every present component against its live neighbors.
    /// Components whose space cannot be classified carry no entry.
    pub sdof: BTreeMap<String, SdofLabel>,
    pub removed: BTreeSet<String>,
    /// Component carried by the robot between a move/pull and its put.
    pub held: Option<String>,
    /// Label each extracted component had when it left the assembly.
    pub extracted: BTreeMap<String, SdofLabel>,
    pub loosened: BTreeSet<usize>,
    pub phase: Phase,
    pub step: usize,
}

impl SymbolicState {
    pub fn initial(model: &AssemblyModel, dirs: &DirectionSet) -> SymbolicState {
        let mut s = SymbolicState {
            sdof: BTreeMap::new(),
            removed: BTreeSet::new(),
            held: None,
            extracted: BTreeMap::new(),
            loosened: BTreeSet::new(),
            phase: Phase::Disassembly,
            step: 0,
        };
        s.refresh_all(model, dirs);
        s
    }

    pub fn is_present(&self, c: &str) -> bool {
        !self.removed.contains(c)
    }

    /// Relations whose both members are present, loosened screws rewritten
    /// as concentric.
    pub fn live_relations(&self, model: &AssemblyModel) -> Vec<Ssr> {
        model
            .relations
            .iter()
            .enumerate()
            .filter(|(_, r)| self.is_present(&r.components.0) && self.is_present(&r.components.1))
            .map(|(i, r)| {
                let mut r = r.clone();
                if self.loosened.contains(&i) {
                    r.kind = SsrKind::Concentric;
                }
                r
            })
            .collect()
    }

    /// Indices of screwed relations that `c` can loosen (it is the first member).
    pub(crate) fn screw_relations(&self, model: &AssemblyModel, c: &str) -> Vec<usize> {
        model
            .relations
            .iter()
            .enumerate()
            .filter(|(i, r)| {
                r.kind == SsrKind::Screwed
                    && r.components.0 == c
                    && !self.loosened.contains(i)
                    && self.is_present(&r.components.1)
            })
            .map(|(i, _)| i)
            .collect()
    }

    fn refresh_all(&mut self, model: &AssemblyModel, dirs: &DirectionSet) {
        let live = self.live_relations(model);
        self.sdof.clear();
        for comp in &model.components {
            if !self.is_present(&comp.id) {
                continue;
            }
            let contacts: Vec<&Ssr> = live.iter().filter(|r| r.involves(&comp.id)).collect();
            let space = intersect_predicates(&predicates_for(contacts.iter().copied(), &comp.id), dirs);
            if let Ok(label) = classify_sdof(&space, &contacts) {
                self.sdof.insert(comp.id.clone(), label);
            }
        }
    }
}

/// Space of `c` against `relations` (only those involving `c` count).
pub(crate) fn space_of(relations: &[Ssr], c: &str, dirs: &DirectionSet) -> (DirectionSet, Vec<ContactPredicate>) {
    let preds = predicates_for(relations, c);
    (intersect_predicates(&preds, dirs), preds)
}

/// Space of `c` once its own screwed relations are loosened.
pub(crate) fn loosened_relations(state: &SymbolicState, model: &AssemblyModel, c: &str) -> Vec<Ssr> {
    let mut s = state.clone();
    s.loosened.extend(s.screw_relations(model, c));
    s.live_relations(model)
}

/// Extraction direction chosen from a nonempty space. When an axis is
/// preferred, members on its negative side are scored as blocked so the
/// pick lands in the positive cap.
pub(crate) fn pick_direction(
    space: &DirectionSet,
    preds: &[ContactPredicate],
    prefer: Option<Direction>,
) -> Option<Direction> {
    let mut scored = preds.to_vec();
    if let Some(a) = prefer {
        scored.push(ContactPredicate::HalfSpace(a));
    }
    best_direction(space, &scored).map(|(_, d)| d)
}

/// Whether `c` can leave the assembly as it stands, and along which direction.
pub fn removable(
    state: &SymbolicState,
    model: &AssemblyModel,
    dirs: &DirectionSet,
    c: &str,
) -> Result<(bool, Option<Direction>), PlanError> {
    if !model.contains(c) {
        return Err(PlanError::UnknownComponent(c.to_string()));
    }
    if !state.is_present(c) {
        return Ok((false, None));
    }
    let (space, preds) = space_of(&state.live_relations(model), c, dirs);
    if space.is_empty_space() {
        return Ok((false, None));
    }
    Ok((true, pick_direction(&space, &preds, None)))
}

fn inapplicable(mp: &ManipulationPrimitive, reason: impl Into<String>) -> PlanError {
    PlanError::InapplicablePrimitive {
        primitive: mp.to_string(),
        reason: reason.into(),
    }
}

/// Applies one manipulation primitive.
///
/// Disassembly rules: `twist` loosens the component's screwed relations (its
/// label becomes `lin` along the screw axis) and carries it out to storage;
/// `move` and `pull` extract the component and leave it held; `put` sets the
/// held component down. Assembly rules mirror these: `move` fetches a stored
/// component, `put`/`pull` install the held one, `twist` fetches, inserts and
/// tightens. Labels of the remaining components are recomputed from their
/// live relations after every change.
pub fn transition(
    state: &SymbolicState,
    mp: &ManipulationPrimitive,
    model: &AssemblyModel,
    dirs: &DirectionSet,
) -> Result<SymbolicState, PlanError> {
    let c = mp.component.as_str();
    let comp = model
        .component(c)
        .map_err(|_| PlanError::UnknownComponent(c.to_string()))?;
    if comp.semantic == Semantic::Base {
        return Err(inapplicable(mp, "the base component never moves"));
    }
    let mut next = state.clone();
    match (state.phase, mp.kind) {
        (Phase::Disassembly, MpKind::Twist) => {
            if !state.is_present(c) {
                return Err(inapplicable(mp, "component already removed"));
            }
            if state.held.is_some() {
                return Err(inapplicable(mp, "robot is holding another component"));
            }
            let screws = state.screw_relations(model, c);
            if screws.is_empty() {
                return Err(inapplicable(mp, "no screwed relation to loosen"));
            }
            next.loosened.extend(screws.iter().copied());
            let live = next.live_relations(model);
            let contacts: Vec<&Ssr> = live.iter().filter(|r| r.involves(c)).collect();
            let (space, _) = space_of(&live, c, dirs);
            if space.is_empty_space() {
                return Err(inapplicable(mp, "still blocked after unscrewing"));
            }
            let label = classify_sdof(&space, &contacts).unwrap_or(SdofLabel::new(SdofValue::Agpp));
            next.extracted.insert(c.to_string(), label);
            next.removed.insert(c.to_string());
        }
        (Phase::Disassembly, MpKind::Move | MpKind::Pull) => {
            if !state.is_present(c) {
                return Err(inapplicable(mp, "component already removed"));
            }
            if state.held.is_some() {
                return Err(inapplicable(mp, "robot is holding another component"));
            }
            let (space, _) = space_of(&state.live_relations(model), c, dirs);
            if space.is_empty_space() {
                return Err(inapplicable(mp, "disassembly space is empty"));
            }
            let label = state.sdof.get(c).copied().unwrap_or(SdofLabel::new(SdofValue::Agpp));
            next.extracted.insert(c.to_string(), label);
            next.removed.insert(c.to_string());
            next.held = Some(c.to_string());
        }
        (Phase::Disassembly, MpKind::Put) | (Phase::Assembly, MpKind::Put | MpKind::Pull) => {
            if state.held.as_deref() != Some(c) {
                return Err(inapplicable(mp, "component is not held"));
            }
            next.held = None;
            if state.phase == Phase::Assembly {
                install(&mut next, model, dirs, mp)?;
            }
        }
        (Phase::Assembly, MpKind::Move) => {
            if state.is_present(c) {
                return Err(inapplicable(mp, "component is already installed"));
            }
            if state.held.is_some() {
                return Err(inapplicable(mp, "robot is holding another component"));
            }
            next.held = Some(c.to_string());
        }
        (Phase::Assembly, MpKind::Twist) => {
            if state.is_present(c) {
                return Err(inapplicable(mp, "component is already installed"));
            }
            if state.held.is_some() {
                return Err(inapplicable(mp, "robot is holding another component"));
            }
            install(&mut next, model, dirs, mp)?;
        }
    }
    next.step += 1;
    next.refresh_all(model, dirs);
    Ok(next)
}

/// Reinstalls `mp.component` with its original relations, tightened.
fn install(
    next: &mut SymbolicState,
    model: &AssemblyModel,
    dirs: &DirectionSet,
    mp: &ManipulationPrimitive,
) -> Result<(), PlanError> {
    let c = mp.component.as_str();
    next.removed.remove(c);
    let own: Vec<usize> = model
        .relations
        .iter()
        .enumerate()
        .filter(|(_, r)| r.involves(c))
        .map(|(i, _)| i)
        .collect();
    for i in &own {
        next.loosened.remove(i);
    }
    let relations = loosened_relations(next, model, c);
    let (space, _) = space_of(&relations, c, dirs);
    if space.is_empty_space() {
        next.removed.insert(c.to_string());
        return Err(inapplicable(mp, "no insertion direction against the installed components"));
    }
    next.extracted.remove(c);
    Ok(())
}
