use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::belief::{NoiseConfig, Slip, WorldHandle};
use crate::lang::{Atom, Happened, Literal, ScriptedEvent, SystemDescription, Term};
use crate::reason::{InterpError, Interpreter, State};

/// Simulated time charged per action attempt and per reading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Costs {
    pub motion: u64,
    pub manipulation: u64,
    pub reading: u64,
}

impl Default for Costs {
    fn default() -> Self {
        Costs {
            motion: 3,
            manipulation: 2,
            reading: 1,
        }
    }
}

/// Outcome of one attempt in the world.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RawOutcome {
    Success,
    Slipped,
    Failed,
    Inexecutable,
}

/// Ground truth: the state, the step, the script and the noise.
pub struct World<'a> {
    pub sd: &'a SystemDescription,
    pub interp: Interpreter<'a>,
    pub state: State,
    pub step: u32,
    pub time: u64,
    pub costs: Costs,
    pub noise: NoiseConfig,
    script: Vec<ScriptedEvent>,
    /// Steps whose scripted events have been applied.
    fired: BTreeSet<u32>,
    announced: BTreeSet<usize>,
    rng: ChaCha8Rng,
}

impl<'a> World<'a> {
    pub fn new(
        sd: &'a SystemDescription,
        truth: &[Literal],
        script: Vec<ScriptedEvent>,
        noise: NoiseConfig,
        rng: ChaCha8Rng,
    ) -> Result<Self, InterpError> {
        let interp = Interpreter::new(sd);
        let state = interp.state_from(truth)?;
        Ok(World {
            sd,
            interp,
            state,
            step: 0,
            time: 0,
            costs: Costs::default(),
            noise,
            script,
            fired: BTreeSet::new(),
            announced: BTreeSet::new(),
            rng,
        })
    }

    pub fn holds(&self, l: &Literal) -> bool {
        self.interp.literal_holds(&self.state, l)
    }

    fn pending_events(&mut self) -> Vec<Atom> {
        if !self.fired.insert(self.step) {
            return Vec::new();
        }
        self.script.iter().filter(|e| e.step == self.step).map(|e| e.action.clone()).collect()
    }

    /// Applies `actions` if possible, otherwise keeps the state.
    fn apply(&mut self, actions: &[Atom]) -> bool {
        match self.interp.step(&self.state, actions) {
            Ok(next) => {
                self.state = next;
                true
            }
            Err(_) => false,
        }
    }

    /// One attempt at `action` during the current step, together with the
    /// step's scripted events if they have not happened yet. Failed and
    /// inexecutable attempts leave the agent's part of the state unchanged.
    pub fn step_world(&mut self, action: &Atom) -> RawOutcome {
        let events = self.pending_events();
        self.time += if action.pred == "move" {
            self.costs.motion
        } else {
            self.costs.manipulation
        };
        let mut joint = events.clone();
        joint.push(action.clone());
        if self.interp.check_executable(&self.state, &joint).is_err() {
            self.apply(&events);
            return RawOutcome::Inexecutable;
        }
        let m = self.noise.motion(&action.pred);
        if self.rng.gen::<f64>() < m.success {
            if self.apply(&joint) {
                return RawOutcome::Success;
            }
            self.apply(&events);
            return RawOutcome::Failed;
        }
        if let Some(alt) = self.slip_target(action, &m.slip) {
            let mut joint = events.clone();
            joint.push(alt);
            if self.apply(&joint) {
                return RawOutcome::Slipped;
            }
        }
        self.apply(&events);
        RawOutcome::Failed
    }

    /// The action redirected to a slip destination, for actions whose last
    /// argument is a place.
    fn slip_target(&mut self, action: &Atom, slip: &Slip) -> Option<Atom> {
        let target = action.args.last()?;
        let here = self.place_of(&action.args[0])?;
        let options: Vec<Term> = match slip {
            Slip::Stay => return None,
            Slip::Adjacent => self
                .sd
                .static_facts
                .iter()
                .filter(|f| f.pred == "connected" && f.args[0] == here && f.args[1] != *target)
                .map(|f| f.args[1].clone())
                .collect(),
            Slip::Dist(d) => {
                let r: f64 = self.rng.gen();
                let mut acc = 0.0;
                for (loc, w) in d {
                    acc += w;
                    if r < acc {
                        let mut args = action.args.clone();
                        *args.last_mut().unwrap() = Term::constant(loc.clone());
                        return Some(Atom::new(action.pred.clone(), args));
                    }
                }
                return None;
            }
        };
        if options.is_empty() {
            return None;
        }
        let pick = options[self.rng.gen_range(0..options.len())].clone();
        let mut args = action.args.clone();
        *args.last_mut().unwrap() = pick;
        Some(Atom::new(action.pred.clone(), args))
    }

    /// Ends the current step: events not yet applied happen on their own.
    pub fn finish_step(&mut self) {
        let events = self.pending_events();
        if !events.is_empty() {
            self.apply(&events);
        }
        self.step += 1;
    }

    pub fn idle_until(&mut self, step: u32) {
        while self.step < step {
            self.finish_step();
        }
    }

    /// Reported script entries up to `step`, each returned once.
    pub fn announcements(&mut self, step: u32) -> Vec<Happened> {
        let mut out = Vec::new();
        for (k, e) in self.script.iter().enumerate() {
            if e.reported && e.step <= step && self.announced.insert(k) {
                out.push(Happened {
                    action: e.action.clone(),
                    step: e.step,
                });
            }
        }
        out
    }

    /// Most specific location of `who` (a place, not its room).
    pub fn place_of(&self, who: &Term) -> Option<Term> {
        let locs: Vec<&Term> = self
            .state
            .fluents
            .iter()
            .filter(|f| f.pred == "has_location" && f.args[0] == *who)
            .map(|f| &f.args[1])
            .collect();
        locs.iter()
            .find(|v| !self.sd.static_facts.iter().any(|f| f.pred == "belongs" && f.args[1] == ***v))
            .map(|v| (*v).clone())
    }

    fn rooms_of_location(&self, l: &Term) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for f in &self.sd.static_facts {
            if f.pred == "belongs" && f.args[0] == *l {
                out.insert(f.args[1].clone());
            }
            if f.pred == "belongs" && f.args[1] == *l {
                out.insert(l.clone());
            }
        }
        if out.is_empty() {
            // doors: the rooms on either side
            for f in &self.sd.static_facts {
                if f.pred == "connected" && f.args[0] == *l {
                    for g in &self.sd.static_facts {
                        if g.pred == "belongs" && g.args[0] == f.args[1] {
                            out.insert(g.args[1].clone());
                        }
                    }
                }
            }
        }
        out
    }

    fn rooms_of(&self, t: &Term) -> BTreeSet<Term> {
        if self.sd.sorts.term_is_instance_of(t, "location") {
            return self.rooms_of_location(t);
        }
        self.place_of(t).map(|p| self.rooms_of_location(&p)).unwrap_or_default()
    }

    /// Same-room visibility: a fluent is observable when it concerns the
    /// agent itself or something in (or adjoining) the agent's room.
    pub fn visible(&self, agent: &Term, fluent: &Atom) -> bool {
        if fluent.args.first() == Some(agent) {
            return true;
        }
        let here = self.rooms_of(agent);
        fluent.args.iter().any(|a| !self.rooms_of(a).is_disjoint(&here))
    }

    /// Noisy reading of `fluent` by `agent`; `None` when not visible.
    pub fn observe(&mut self, agent: &Term, fluent: &Atom) -> Option<bool> {
        self.time += self.costs.reading;
        if !self.visible(agent, fluent) {
            return None;
        }
        let truth = self.holds(&Literal::pos(fluent.clone()));
        let m = self.noise.sensor(fluent);
        let p = if truth { m.tp } else { m.fp };
        Some(self.rng.gen::<f64>() < p)
    }
}

/// The world as driven by one agent.
pub struct Handle<'w, 'a> {
    pub world: &'w mut World<'a>,
    pub agent: Term,
}

impl WorldHandle for Handle<'_, '_> {
    fn act(&mut self, action: &Atom) -> bool {
        self.world.step_world(action) != RawOutcome::Inexecutable
    }

    fn sense(&mut self, fluent: &Atom) -> Option<bool> {
        let agent = self.agent.clone();
        self.world.observe(&agent, fluent)
    }
}
