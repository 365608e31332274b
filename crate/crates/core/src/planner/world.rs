use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::pddl::{
    eval_formula, Binding, DomainAst, Expr, FactState, Formula, GroundAtom,
    GroundFluent, ProblemInstance, Term,
};

use super::state::{ActionKind, Cell, GroundAction, WorldState};
use super::PlanError;

/// Grid bounds and simulation rules that are not part of the PDDL encoding.
#[derive(Debug, Clone, Copy)]
pub struct WorldOptions {
    pub width: u16,
    pub height: u16,
    /// Cost of every atomic action.
    pub unit_cost: u32,
    /// When set, states holding keys that cannot all be matched to distinct
    /// still-locked locks on the current goal's door are pruned, realizing
    /// the "players lose points if they pick up more keys than needed" rule.
    pub prune_surplus_keys: bool,
}

impl Default for WorldOptions {
    fn default() -> Self {
        WorldOptions {
            width: 10,
            height: 10,
            unit_cost: 1,
            prune_surplus_keys: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrophyInfo {
    pub name: String,
    pub cell: Cell,
    pub room: Option<u8>,
}

#[derive(Debug, Clone)]
pub struct KeyInfo {
    pub name: String,
    pub cell: Cell,
    pub color: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DoorInfo {
    pub name: String,
    pub cell: Cell,
    pub color: Option<String>,
    pub room: Option<u8>,
}

#[derive(Debug, Clone)]
pub struct RoomInfo {
    pub label: String,
    pub interior: Vec<Cell>,
    pub doors: Vec<u8>,
}

/// An opaque compiled condition usable with [`World::eval_condition`].
#[derive(Debug, Clone)]
pub struct CompiledCondition(pub(crate) Cond);

fn intern_into(intern: &mut Vec<GroundAtom>, atom: GroundAtom) -> u32 {
    if let Some(i) = intern.iter().position(|a| *a == atom) {
        return i as u32;
    }
    intern.push(atom);
    (intern.len() - 1) as u32
}

/// A goal candidate: its trophy label, source formula, compiled condition,
/// and (when the formula is agent/trophy co-location) the target cell used
/// by the A* heuristic.
#[derive(Debug, Clone)]
pub struct GoalSpec {
    pub label: String,
    pub formula: Formula,
    pub(crate) cond: Cond,
    pub target: Option<Cell>,
}

#[derive(Debug, Clone)]
pub(crate) struct GroundActionDef {
    pub kind: ActionKind,
    pub pre: Cond,
    pub ops: Vec<EffectOp>,
}

/// Precondition compiled against a fixed world: object references resolved to
/// indices, static atoms folded to constants, `exists` expanded over the
/// object universe.
#[derive(Debug, Clone)]
pub(crate) enum Cond {
    Const(bool),
    And(Vec<Cond>),
    Or(Vec<Cond>),
    Not(Box<Cond>),
    Has(u8),
    OnMap(u8),
    Locked(u8),
    Taken(u8),
    NumEq(CExpr, CExpr),
    Overlay(u32),
}

#[derive(Debug, Clone)]
pub(crate) enum CExpr {
    AgentX,
    AgentY,
    Const(i64),
    Add(Box<CExpr>, Box<CExpr>),
    Sub(Box<CExpr>, Box<CExpr>),
}

#[derive(Debug, Clone)]
pub(crate) enum EffectOp {
    SetHas(u8, bool),
    SetOnMap(u8, bool),
    SetLocked(u8, bool),
    SetTaken(u8, bool),
    SetAgentX(CExpr),
    SetAgentY(CExpr),
    SetOverlay(u32, bool),
}

/// Immutable planning context: geometry, object tables, compiled ground
/// actions, and goal conditions.
#[derive(Debug, Clone)]
pub struct World {
    pub domain: DomainAst,
    pub options: WorldOptions,
    pub agent_name: String,
    pub trophies: Vec<TrophyInfo>,
    pub keys: Vec<KeyInfo>,
    pub doors: Vec<DoorInfo>,
    pub rooms: Vec<RoomInfo>,
    goals: Vec<GoalSpec>,
    pub(crate) ground: Vec<GroundActionDef>,
    /// Per key, bitmask of doors its color can open under the domain's
    /// unlock operator (computed by probing the operator's precondition).
    pub can_unlock: Vec<u32>,
    /// Per goal, bitmask of door entities guarding the goal trophy's room.
    relevant_locks: Vec<u32>,
    atom_intern: Vec<GroundAtom>,
    static_facts: BTreeSet<GroundAtom>,
    by_type: BTreeMap<String, Vec<String>>,
    objects: BTreeMap<String, String>,
    door_cells: HashMap<Cell, Vec<u8>>,
    room_of_cell: HashMap<Cell, u8>,
    initial: WorldState,
}

impl World {
    pub fn new(
        domain: &DomainAst,
        problem: &ProblemInstance,
        options: WorldOptions,
    ) -> Result<World, PlanError> {
        problem
            .validate(domain)
            .map_err(|e| PlanError::BadProblem(e.to_string()))?;

        let cell_of = |name: &str| -> Result<Cell, PlanError> {
            let x = problem
                .initial_fluents
                .get(&GroundFluent::new("xloc", &[name]))
                .ok_or_else(|| PlanError::BadProblem(format!("missing (xloc {name})")))?;
            let y = problem
                .initial_fluents
                .get(&GroundFluent::new("yloc", &[name]))
                .ok_or_else(|| PlanError::BadProblem(format!("missing (yloc {name})")))?;
            Ok(Cell::new(*x as i16, *y as i16))
        };

        let agents = problem.objects_of_type(domain, "agent");
        let [agent_name] = agents.as_slice() else {
            return Err(PlanError::NoAgent);
        };
        let agent_name = agent_name.to_string();

        let mut object_colors = BTreeMap::new();
        for atom in &problem.initial_facts {
            if atom.pred == "iscolor" {
                object_colors.insert(atom.args[0].clone(), atom.args[1].clone());
            }
        }

        // Trophies follow goal-candidate order so display order matches the
        // scenario's goal list.
        let mut trophies = Vec::new();
        for (label, _) in &problem.goal_candidates {
            trophies.push(TrophyInfo {
                name: label.clone(),
                cell: cell_of(label)?,
                room: None,
            });
        }

        let mut keys = Vec::new();
        for name in problem.objects_of_type(domain, "key") {
            keys.push(KeyInfo {
                name: name.to_string(),
                cell: cell_of(name)?,
                color: object_colors.get(name).cloned(),
            });
        }
        let mut doors = Vec::new();
        for name in problem.objects_of_type(domain, "door") {
            doors.push(DoorInfo {
                name: name.to_string(),
                cell: cell_of(name)?,
                color: object_colors.get(name).cloned(),
                room: None,
            });
        }
        if keys.len() > 32 || doors.len() > 32 {
            return Err(PlanError::BadProblem("more than 32 keys or doors".into()));
        }

        let mut rooms: Vec<RoomInfo> = problem
            .objects_of_type(domain, "room")
            .into_iter()
            .map(|label| RoomInfo {
                label: label.to_string(),
                interior: Vec::new(),
                doors: Vec::new(),
            })
            .collect();
        let room_index: HashMap<String, u8> = rooms
            .iter()
            .enumerate()
            .map(|(i, r)| (r.label.clone(), i as u8))
            .collect();

        for atom in &problem.initial_facts {
            match atom.pred.as_str() {
                "inroom" => {
                    let (t, r) = (&atom.args[0], &atom.args[1]);
                    let ri = *room_index
                        .get(r)
                        .ok_or_else(|| PlanError::BadProblem(format!("unknown room `{r}`")))?;
                    if let Some(tr) = trophies.iter_mut().find(|tr| &tr.name == t) {
                        tr.room = Some(ri);
                        rooms[ri as usize].interior.push(tr.cell);
                    }
                }
                "guards" => {
                    let (d, r) = (&atom.args[0], &atom.args[1]);
                    let ri = *room_index
                        .get(r)
                        .ok_or_else(|| PlanError::BadProblem(format!("unknown room `{r}`")))?;
                    if let Some(di) = doors.iter().position(|dr| &dr.name == d) {
                        doors[di].room = Some(ri);
                        rooms[ri as usize].doors.push(di as u8);
                    }
                }
                _ => {}
            }
        }
        for room in &mut rooms {
            room.interior.sort();
            room.interior.dedup();
            room.doors.sort();
        }

        let static_facts: BTreeSet<GroundAtom> = problem
            .initial_facts
            .iter()
            .filter(|a| matches!(a.pred.as_str(), "iscolor" | "inroom" | "guards"))
            .cloned()
            .collect();

        let mut by_type: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut type_names: Vec<&str> = domain.type_hierarchy.keys().map(String::as_str).collect();
        type_names.push("object");
        for ty in type_names {
            let mut members: Vec<String> = problem
                .objects
                .iter()
                .filter(|(_, t)| domain.is_subtype(t, ty))
                .map(|(n, _)| n.clone())
                .collect();
            members.sort();
            by_type.insert(ty.to_string(), members);
        }

        let mut door_cells: HashMap<Cell, Vec<u8>> = HashMap::new();
        for (i, d) in doors.iter().enumerate() {
            door_cells.entry(d.cell).or_default().push(i as u8);
        }
        let mut room_of_cell = HashMap::new();
        for (i, r) in rooms.iter().enumerate() {
            for c in &r.interior {
                room_of_cell.insert(*c, i as u8);
            }
        }

        let mut world = World {
            domain: domain.clone(),
            options,
            agent_name,
            trophies,
            keys,
            doors,
            rooms,
            goals: Vec::new(),
            ground: Vec::new(),
            can_unlock: Vec::new(),
            relevant_locks: Vec::new(),
            atom_intern: Vec::new(),
            static_facts,
            by_type,
            objects: problem.objects.clone(),
            door_cells,
            room_of_cell,
            initial: WorldState {
                agent: Cell::new(0, 0),
                inventory: 0,
                key_on_map: 0,
                locked: 0,
                taken: None,
                overlay: Vec::new(),
            },
        };

        world.initial.agent = cell_of(&world.agent_name)?;
        for atom in &problem.initial_facts {
            match atom.pred.as_str() {
                "has" => {
                    if let Some(k) = world.key_index(&atom.args[1]) {
                        world.initial.inventory |= 1 << k;
                    }
                }
                "onmap" => {
                    if let Some(k) = world.key_index(&atom.args[0]) {
                        world.initial.key_on_map |= 1 << k;
                    }
                }
                "locked" => {
                    if let Some(d) = world.door_index(&atom.args[0]) {
                        world.initial.locked |= 1 << d;
                    }
                }
                "taken" => {
                    if let Some(t) = world.trophy_index(&atom.args[0]) {
                        world.initial.taken = Some(t);
                    }
                }
                "iscolor" | "inroom" | "guards" => {}
                _ => {
                    let id = world.intern_atom(atom.clone());
                    world.initial.overlay_set(id, true);
                }
            }
        }

        // Goal conditions, with the co-location pattern feeding the heuristic.
        // Interning continues from the ids handed out for initial facts.
        let mut intern = std::mem::take(&mut world.atom_intern);
        for (label, formula) in &problem.goal_candidates {
            let cond = world.compile_formula(formula, &Binding::new(), &mut intern)?;
            let target = world.colocation_target(formula);
            world.goals.push(GoalSpec {
                label: label.clone(),
                formula: formula.clone(),
                cond,
                target,
            });
        }

        // Ground and compile the domain's non-move actions.
        for grounded in crate::pddl::ground_actions(domain, problem) {
            let schema = domain.action(&grounded.schema).expect("grounded schema");
            let binding = grounded.binding(domain);
            let kind = world.action_kind(&grounded.schema, schema, &grounded.args)?;
            let pre = world.compile_formula(&schema.precondition, &binding, &mut intern)?;
            let ops = world.compile_effect(&schema.effect, &binding, &mut intern)?;
            world.ground.push(GroundActionDef { kind, pre, ops });
        }
        world.ground.sort_by_key(|g| g.kind);
        world.atom_intern = intern;

        world.can_unlock = world.probe_unlock_matrix();
        world.relevant_locks = world
            .goals
            .iter()
            .map(|g| {
                world
                    .trophies
                    .iter()
                    .find(|t| t.name == g.label)
                    .and_then(|t| t.room)
                    .map(|r| {
                        world.rooms[r as usize]
                            .doors
                            .iter()
                            .fold(0u32, |m, d| m | (1 << d))
                    })
                    .unwrap_or(0)
            })
            .collect();
        Ok(world)
    }

    pub fn initial_state(&self) -> WorldState {
        self.initial.clone()
    }

    pub fn goals(&self) -> &[GoalSpec] {
        &self.goals
    }

    pub fn goal_index(&self, label: &str) -> Option<usize> {
        self.goals.iter().position(|g| g.label == label)
    }

    pub fn key_index(&self, name: &str) -> Option<u8> {
        self.keys.iter().position(|k| k.name == name).map(|i| i as u8)
    }

    pub fn door_index(&self, name: &str) -> Option<u8> {
        self.doors.iter().position(|d| d.name == name).map(|i| i as u8)
    }

    pub fn trophy_index(&self, name: &str) -> Option<u8> {
        self.trophies
            .iter()
            .position(|t| t.name == name)
            .map(|i| i as u8)
    }

    fn intern_atom(&mut self, atom: GroundAtom) -> u32 {
        intern_into(&mut self.atom_intern, atom)
    }

    fn action_kind(
        &self,
        name: &str,
        schema: &crate::pddl::ActionSchema,
        args: &[String],
    ) -> Result<ActionKind, PlanError> {
        let arg_of_type = |ty: &str| -> Option<&String> {
            schema
                .parameters
                .iter()
                .zip(args)
                .find(|((_, t), _)| self.domain.is_subtype(t, ty))
                .map(|(_, obj)| obj)
        };
        match name {
            "pickup" => {
                let key = arg_of_type("key")
                    .and_then(|k| self.key_index(k))
                    .ok_or_else(|| PlanError::UnsupportedSchema(name.into()))?;
                Ok(ActionKind::Pickup(key))
            }
            "unlock" => {
                let key = arg_of_type("key")
                    .and_then(|k| self.key_index(k))
                    .ok_or_else(|| PlanError::UnsupportedSchema(name.into()))?;
                let door = arg_of_type("door")
                    .and_then(|d| self.door_index(d))
                    .ok_or_else(|| PlanError::UnsupportedSchema(name.into()))?;
                Ok(ActionKind::Unlock { door, key })
            }
            "take" => {
                let trophy = arg_of_type("trophy")
                    .and_then(|t| self.trophy_index(t))
                    .ok_or_else(|| PlanError::UnsupportedSchema(name.into()))?;
                Ok(ActionKind::Take(trophy))
            }
            other => Err(PlanError::UnsupportedSchema(other.into())),
        }
    }

    /// Static cell of a named object, if it has coordinates.
    fn static_cell(&self, name: &str) -> Option<Cell> {
        if name == self.agent_name {
            return Some(self.initial.agent);
        }
        self.trophies
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.cell)
            .or_else(|| self.keys.iter().find(|k| k.name == name).map(|k| k.cell))
            .or_else(|| self.doors.iter().find(|d| d.name == name).map(|d| d.cell))
    }

    fn resolve_name<'a>(&self, term: &'a Term, binding: &'a Binding) -> Result<String, PlanError> {
        match term {
            Term::Object(o) => Ok(o.clone()),
            Term::Var(v) => binding
                .lookup(v)
                .map(str::to_string)
                .ok_or_else(|| PlanError::BadProblem(format!("unbound variable `{v}`"))),
        }
    }

    fn compile_formula(
        &self,
        f: &Formula,
        binding: &Binding,
        intern: &mut Vec<GroundAtom>,
    ) -> Result<Cond, PlanError> {
        Ok(match f {
            Formula::And(items) => Cond::And(
                items
                    .iter()
                    .map(|i| self.compile_formula(i, binding, intern))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Or(items) => Cond::Or(
                items
                    .iter()
                    .map(|i| self.compile_formula(i, binding, intern))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Not(inner) => {
                Cond::Not(Box::new(self.compile_formula(inner, binding, intern)?))
            }
            Formula::Exists { var, ty, body } => {
                let members = self.by_type.get(ty).cloned().unwrap_or_default();
                let mut arms = Vec::new();
                for obj in members {
                    let mut b = binding.clone();
                    b.push(var, &obj);
                    arms.push(self.compile_formula(body, &b, intern)?);
                }
                Cond::Or(arms)
            }
            Formula::Atom { pred, args } => {
                let names: Vec<String> = args
                    .iter()
                    .map(|t| self.resolve_name(t, binding))
                    .collect::<Result<_, _>>()?;
                self.compile_atom(pred, &names, intern)
            }
            Formula::NumEq(a, b) => Cond::NumEq(
                self.compile_expr(a, binding)?,
                self.compile_expr(b, binding)?,
            ),
            Formula::ObjEq(a, b) => {
                let a = self.resolve_name(a, binding)?;
                let b = self.resolve_name(b, binding)?;
                Cond::Const(a == b)
            }
            Formula::Assign { .. } => {
                return Err(PlanError::BadProblem(
                    "assignment inside a condition".into(),
                ))
            }
        })
    }

    fn compile_atom(&self, pred: &str, args: &[String], intern: &mut Vec<GroundAtom>) -> Cond {
        match (pred, args) {
            ("has", [_, k]) => self
                .key_index(k)
                .map(Cond::Has)
                .unwrap_or(Cond::Const(false)),
            ("onmap", [k]) => self
                .key_index(k)
                .map(Cond::OnMap)
                .unwrap_or(Cond::Const(false)),
            ("locked", [d]) => self
                .door_index(d)
                .map(Cond::Locked)
                .unwrap_or(Cond::Const(false)),
            ("taken", [t]) => self
                .trophy_index(t)
                .map(Cond::Taken)
                .unwrap_or(Cond::Const(false)),
            ("iscolor", _) | ("inroom", _) | ("guards", _) => {
                let atom = GroundAtom {
                    pred: pred.to_string(),
                    args: args.to_vec(),
                };
                Cond::Const(self.static_facts.contains(&atom))
            }
            _ => {
                let atom = GroundAtom {
                    pred: pred.to_string(),
                    args: args.to_vec(),
                };
                Cond::Overlay(intern_into(intern, atom))
            }
        }
    }

    fn compile_expr(&self, e: &Expr, binding: &Binding) -> Result<CExpr, PlanError> {
        Ok(match e {
            Expr::Const(n) => CExpr::Const(*n),
            Expr::Add(a, b) => CExpr::Add(
                Box::new(self.compile_expr(a, binding)?),
                Box::new(self.compile_expr(b, binding)?),
            ),
            Expr::Sub(a, b) => CExpr::Sub(
                Box::new(self.compile_expr(a, binding)?),
                Box::new(self.compile_expr(b, binding)?),
            ),
            Expr::Fluent(name, args) => {
                let [arg] = args.as_slice() else {
                    return Err(PlanError::BadProblem(format!(
                        "fluent `{name}` must take one object"
                    )));
                };
                let obj = self.resolve_name(arg, binding)?;
                let agent = obj == self.agent_name;
                match (name.as_str(), agent) {
                    ("xloc", true) => CExpr::AgentX,
                    ("yloc", true) => CExpr::AgentY,
                    // Non-agent objects never move; picked-up keys keep their
                    // last map coordinates.
                    ("xloc", false) => CExpr::Const(
                        self.static_cell(&obj)
                            .ok_or_else(|| {
                                PlanError::BadProblem(format!("object `{obj}` has no coordinates"))
                            })?
                            .x as i64,
                    ),
                    ("yloc", false) => CExpr::Const(
                        self.static_cell(&obj)
                            .ok_or_else(|| {
                                PlanError::BadProblem(format!("object `{obj}` has no coordinates"))
                            })?
                            .y as i64,
                    ),
                    _ => {
                        return Err(PlanError::BadProblem(format!(
                            "unsupported fluent `{name}`"
                        )))
                    }
                }
            }
        })
    }

    fn compile_effect(
        &self,
        effect: &Formula,
        binding: &Binding,
        intern: &mut Vec<GroundAtom>,
    ) -> Result<Vec<EffectOp>, PlanError> {
        let mut ops = Vec::new();
        for item in effect.conjuncts() {
            match item {
                Formula::Atom { pred, args } => {
                    let names: Vec<String> = args
                        .iter()
                        .map(|t| self.resolve_name(t, binding))
                        .collect::<Result<_, _>>()?;
                    ops.push(self.compile_literal(pred, &names, true, intern)?);
                }
                Formula::Not(inner) => {
                    let Formula::Atom { pred, args } = inner.as_ref() else {
                        return Err(PlanError::BadProblem("non-literal effect".into()));
                    };
                    let names: Vec<String> = args
                        .iter()
                        .map(|t| self.resolve_name(t, binding))
                        .collect::<Result<_, _>>()?;
                    ops.push(self.compile_literal(pred, &names, false, intern)?);
                }
                Formula::Assign { fluent, args, value } => {
                    let [arg] = args.as_slice() else {
                        return Err(PlanError::BadProblem("assignment arity".into()));
                    };
                    let obj = self.resolve_name(arg, binding)?;
                    if obj != self.agent_name {
                        return Err(PlanError::BadProblem(
                            "only agent coordinates may be assigned".into(),
                        ));
                    }
                    let value = self.compile_expr(value, binding)?;
                    ops.push(match fluent.as_str() {
                        "xloc" => EffectOp::SetAgentX(value),
                        "yloc" => EffectOp::SetAgentY(value),
                        other => {
                            return Err(PlanError::BadProblem(format!(
                                "unsupported fluent `{other}` in effect"
                            )))
                        }
                    });
                }
                other => {
                    return Err(PlanError::BadProblem(format!(
                        "effect contains non-literal `{}`",
                        crate::pddl::print_formula(other)
                    )))
                }
            }
        }
        Ok(ops)
    }

    fn compile_literal(
        &self,
        pred: &str,
        args: &[String],
        value: bool,
        intern: &mut Vec<GroundAtom>,
    ) -> Result<EffectOp, PlanError> {
        Ok(match (pred, args) {
            ("has", [_, k]) => EffectOp::SetHas(
                self.key_index(k)
                    .ok_or_else(|| PlanError::BadProblem(format!("unknown key `{k}`")))?,
                value,
            ),
            ("onmap", [k]) => EffectOp::SetOnMap(
                self.key_index(k)
                    .ok_or_else(|| PlanError::BadProblem(format!("unknown key `{k}`")))?,
                value,
            ),
            ("locked", [d]) => EffectOp::SetLocked(
                self.door_index(d)
                    .ok_or_else(|| PlanError::BadProblem(format!("unknown door `{d}`")))?,
                value,
            ),
            ("taken", [t]) => EffectOp::SetTaken(
                self.trophy_index(t)
                    .ok_or_else(|| PlanError::BadProblem(format!("unknown trophy `{t}`")))?,
                value,
            ),
            ("iscolor", _) | ("inroom", _) | ("guards", _) => {
                return Err(PlanError::BadProblem(format!(
                    "effect may not modify static fact `{pred}`"
                )))
            }
            _ => {
                let atom = GroundAtom {
                    pred: pred.to_string(),
                    args: args.to_vec(),
                };
                EffectOp::SetOverlay(intern_into(intern, atom), value)
            }
        })
    }

    /// Compile a ground condition formula against this world. Atoms that no
    /// effect can ever set fold to false, so unknown predicates are sound.
    pub fn compile_condition(&self, f: &Formula) -> Result<CompiledCondition, PlanError> {
        let mut intern = self.atom_intern.clone();
        Ok(CompiledCondition(self.compile_formula(
            f,
            &Binding::new(),
            &mut intern,
        )?))
    }

    pub fn eval_condition(&self, cond: &CompiledCondition, state: &WorldState) -> bool {
        self.eval_cond(&cond.0, state)
    }

    /// Detect the `(and (= (xloc agent) (xloc t)) (= (yloc agent) (yloc t)))`
    /// goal shape and return `t`'s cell for the Manhattan heuristic.
    fn colocation_target(&self, formula: &Formula) -> Option<Cell> {
        let conjuncts = formula.conjuncts();
        let mut target = None;
        for c in conjuncts {
            let Formula::NumEq(Expr::Fluent(_, a), Expr::Fluent(_, b)) = c else {
                return None;
            };
            let (a, b) = (a.first()?.name(), b.first()?.name());
            let other = if a == self.agent_name {
                b
            } else if b == self.agent_name {
                a
            } else {
                return None;
            };
            match target {
                None => target = Some(other.to_string()),
                Some(ref t) if t == other => {}
                _ => return None,
            }
        }
        self.static_cell(target.as_deref()?)
    }

    pub(crate) fn eval_cond(&self, cond: &Cond, state: &WorldState) -> bool {
        match cond {
            Cond::Const(v) => *v,
            Cond::And(items) => items.iter().all(|c| self.eval_cond(c, state)),
            Cond::Or(items) => items.iter().any(|c| self.eval_cond(c, state)),
            Cond::Not(inner) => !self.eval_cond(inner, state),
            Cond::Has(k) => state.holds_key(*k),
            Cond::OnMap(k) => state.key_available(*k),
            Cond::Locked(d) => state.is_locked(*d),
            Cond::Taken(t) => state.taken == Some(*t),
            Cond::NumEq(a, b) => self.eval_cexpr(a, state) == self.eval_cexpr(b, state),
            Cond::Overlay(id) => state.overlay_holds(*id),
        }
    }

    fn eval_cexpr(&self, e: &CExpr, state: &WorldState) -> i64 {
        match e {
            CExpr::AgentX => state.agent.x as i64,
            CExpr::AgentY => state.agent.y as i64,
            CExpr::Const(n) => *n,
            CExpr::Add(a, b) => self.eval_cexpr(a, state) + self.eval_cexpr(b, state),
            CExpr::Sub(a, b) => self.eval_cexpr(a, state) - self.eval_cexpr(b, state),
        }
    }

    pub(crate) fn apply_ops(&self, state: &WorldState, ops: &[EffectOp]) -> WorldState {
        let mut next = state.clone();
        for op in ops {
            match op {
                EffectOp::SetHas(k, v) => {
                    if *v {
                        next.inventory |= 1 << k;
                    } else {
                        next.inventory &= !(1 << k);
                    }
                }
                EffectOp::SetOnMap(k, v) => {
                    if *v {
                        next.key_on_map |= 1 << k;
                    } else {
                        next.key_on_map &= !(1 << k);
                    }
                }
                EffectOp::SetLocked(d, v) => {
                    if *v {
                        next.locked |= 1 << d;
                    } else {
                        next.locked &= !(1 << d);
                    }
                }
                EffectOp::SetTaken(t, v) => {
                    next.taken = if *v { Some(*t) } else { None };
                }
                EffectOp::SetAgentX(e) => next.agent.x = self.eval_cexpr(e, state) as i16,
                EffectOp::SetAgentY(e) => next.agent.y = self.eval_cexpr(e, state) as i16,
                EffectOp::SetOverlay(id, v) => next.overlay_set(*id, *v),
            }
        }
        next
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.x >= 0
            && cell.y >= 0
            && (cell.x as u16) < self.options.width
            && (cell.y as u16) < self.options.height
    }

    pub fn doors_at(&self, cell: Cell) -> &[u8] {
        self.door_cells.get(&cell).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn room_of(&self, cell: Cell) -> Option<u8> {
        self.room_of_cell.get(&cell).copied()
    }

    fn is_door_cell_of(&self, cell: Cell, room: u8) -> bool {
        self.doors_at(cell)
            .iter()
            .any(|d| self.doors[*d as usize].room == Some(room))
    }

    /// Movement legality: stay on the grid, never step onto a cell with a
    /// still-locked door, and cross room boundaries only through the room's
    /// door cell.
    pub fn move_ok(&self, state: &WorldState, from: Cell, to: Cell) -> bool {
        if !self.in_bounds(to) {
            return false;
        }
        if self.doors_at(to).iter().any(|d| state.is_locked(*d)) {
            return false;
        }
        match (self.room_of(from), self.room_of(to)) {
            (None, None) => true,
            (Some(a), Some(b)) => a == b,
            (None, Some(r)) => self.is_door_cell_of(from, r),
            (Some(r), None) => self.is_door_cell_of(to, r),
        }
    }

    pub fn goal_satisfied(&self, state: &WorldState, goal: usize) -> bool {
        self.eval_cond(&self.goals[goal].cond, state)
    }

    /// Surplus-key rule: every held key must be assignable to a distinct
    /// still-locked lock on the goal's door that it can open. Vacuously true
    /// with an empty inventory or when the rule is disabled.
    pub fn state_valid_for_goal(&self, state: &WorldState, goal: usize) -> bool {
        if !self.options.prune_surplus_keys {
            return true;
        }
        let held: Vec<u8> = state.held_keys().collect();
        if held.is_empty() {
            return true;
        }
        let remaining = self.relevant_locks[goal] & state.locked;
        self.match_keys(&held, remaining)
    }

    fn match_keys(&self, keys: &[u8], locks: u32) -> bool {
        let Some((&k, rest)) = keys.split_first() else {
            return true;
        };
        let mut options = locks & self.can_unlock[k as usize];
        while options != 0 {
            let d = options.trailing_zeros();
            if self.match_keys(rest, locks & !(1 << d)) {
                return true;
            }
            options &= !(1 << d);
        }
        false
    }

    /// Probe the domain's `unlock` operator once per (key, door) pair: a
    /// hypothetical state with the agent adjacent to the locked door and
    /// holding the key, evaluated with the reference evaluator.
    fn probe_unlock_matrix(&self) -> Vec<u32> {
        let mut matrix = vec![0u32; self.keys.len()];
        let Some(schema) = self.domain.action("unlock") else {
            return matrix;
        };
        for (ki, key) in self.keys.iter().enumerate() {
            for (di, door) in self.doors.iter().enumerate() {
                let mut facts = self.static_facts.clone();
                facts.insert(GroundAtom::new("has", &[&self.agent_name, &key.name]));
                facts.insert(GroundAtom::new("locked", &[&door.name]));
                let mut fluents = BTreeMap::new();
                for (name, cell) in self.all_cells() {
                    fluents.insert(GroundFluent::new("xloc", &[&name]), cell.x as i64);
                    fluents.insert(GroundFluent::new("yloc", &[&name]), cell.y as i64);
                }
                fluents.insert(
                    GroundFluent::new("xloc", &[&self.agent_name]),
                    door.cell.x as i64,
                );
                fluents.insert(
                    GroundFluent::new("yloc", &[&self.agent_name]),
                    (door.cell.y + 1) as i64,
                );
                let probe = FactState::new(&self.domain, &self.objects, facts, fluents);
                let mut binding = Binding::new();
                for (var, ty) in &schema.parameters {
                    let obj = if self.domain.is_subtype(ty, "agent") || ty == "agent" {
                        &self.agent_name
                    } else if ty == "key" {
                        &key.name
                    } else if ty == "door" {
                        &door.name
                    } else {
                        continue;
                    };
                    binding.push(var, obj);
                }
                if eval_formula(&probe, &schema.precondition, &binding).unwrap_or(false) {
                    matrix[ki] |= 1 << di;
                }
            }
        }
        matrix
    }

    fn all_cells(&self) -> Vec<(String, Cell)> {
        let mut out = vec![(self.agent_name.clone(), self.initial.agent)];
        for t in &self.trophies {
            out.push((t.name.clone(), t.cell));
        }
        for k in &self.keys {
            out.push((k.name.clone(), k.cell));
        }
        for d in &self.doors {
            out.push((d.name.clone(), d.cell));
        }
        out
    }

    pub fn describe_action(&self, action: &GroundAction) -> String {
        match action.kind {
            ActionKind::Move(dir) => format!("move {dir}"),
            ActionKind::Pickup(k) => format!("pickup {}", self.keys[k as usize].name),
            ActionKind::Unlock { door, key } => format!(
                "unlock {} {}",
                self.doors[door as usize].name, self.keys[key as usize].name
            ),
            ActionKind::Take(t) => format!("take {}", self.trophies[t as usize].name),
        }
    }

    /// Expand the compact state back into plain facts and fluents, for the
    /// reference evaluator and for property tests against it.
    pub fn to_fact_state(&self, state: &WorldState) -> FactState {
        let mut facts = self.static_facts.clone();
        for k in state.held_keys() {
            facts.insert(GroundAtom::new(
                "has",
                &[&self.agent_name, &self.keys[k as usize].name],
            ));
        }
        for k in state.keys_on_map() {
            facts.insert(GroundAtom::new("onmap", &[&self.keys[k as usize].name]));
        }
        for (i, _) in self.doors.iter().enumerate() {
            if state.is_locked(i as u8) {
                facts.insert(GroundAtom::new("locked", &[&self.doors[i].name]));
            }
        }
        if let Some(t) = state.taken {
            facts.insert(GroundAtom::new("taken", &[&self.trophies[t as usize].name]));
        }
        for id in &state.overlay {
            facts.insert(self.atom_intern[*id as usize].clone());
        }
        let mut fluents = BTreeMap::new();
        for (name, cell) in self.all_cells() {
            fluents.insert(GroundFluent::new("xloc", &[&name]), cell.x as i64);
            fluents.insert(GroundFluent::new("yloc", &[&name]), cell.y as i64);
        }
        fluents.insert(
            GroundFluent::new("xloc", &[&self.agent_name]),
            state.agent.x as i64,
        );
        fluents.insert(
            GroundFluent::new("yloc", &[&self.agent_name]),
            state.agent.y as i64,
        );
        FactState::new(&self.domain, &self.objects, facts, fluents)
    }
}
