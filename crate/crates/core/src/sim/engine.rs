use serde::{Deserialize, Serialize};

use super::{AlphaSource, InitialCondition, OpinionLaw, Process, Snapshot, YLaw, ZeroNeighbourRule};
use crate::error::{contract, Result};
use crate::graph::{pair_count, pair_index, EdgeSet};
use crate::model::{EntityKind, Opinion, RngStream, VertexState};

// Clock sub-streams, all keyed by the global event counter.
const WAIT: u64 = 0;
const CATEGORY: u64 = 1;
const PAIR_I: u64 = 2;
const PAIR_J: u64 = 3;
const LAYER: u64 = 4;
const VERTEX: u64 = 5;
const FLIP_DIRECTION: u64 = 6;

/// One opinion change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flip {
    pub t: f64,
    pub vertex: usize,
    pub opinion: Opinion,
}

/// Vertices of one opinion with O(1) insert, remove and uniform pick.
#[derive(Debug, Clone, Default)]
struct Members {
    list: Vec<usize>,
}

/// A running simulation. Owns the vertices, the graph(s) and the clock.
#[derive(Debug, Clone)]
pub struct Simulation {
    process: Process,
    rng: RngStream,
    t: f64,
    vertices: Vec<VertexState>,
    /// Layered copies (model 3 only).
    layers: Vec<EdgeSet>,
    /// The graph vertices copy from: the single graph, or the resulting graph.
    graph: EdgeSet,
    deg: Vec<u32>,
    /// Active neighbours holding `Plus`; maintained for models 2 and 3.
    plus_deg: Vec<u32>,
    track_plus_deg: bool,
    n_plus: usize,
    // model 1 bookkeeping
    members: [Members; 2],
    position: Vec<usize>,
    counter: u64,
    pending: Option<f64>,
    vertex_events: u64,
    edge_events: u64,
    flip_log: Option<Vec<Flip>>,
}

impl Simulation {
    /// Draws the initial state. Every unordered pair of every layer is active
    /// independently with probability `p0`.
    pub fn new(process: Process, init: InitialCondition, seed: u64) -> Result<Self> {
        process.validate()?;
        init.validate()?;
        let rng = RngStream::new(seed);
        let n = init.n;
        let vertices: Vec<VertexState> = (0..n)
            .map(|i| {
                let plus = match init.opinions {
                    OpinionLaw::AllPlus => true,
                    OpinionLaw::AllMinus => false,
                    OpinionLaw::Bernoulli(p) => rng.uniform(EntityKind::InitOpinion, i as u64, 0) < p,
                    OpinionLaw::Balanced => i < n / 2,
                };
                let y0 = match init.y {
                    YLaw::Constant(y) => y,
                    YLaw::Uniform => rng.uniform(EntityKind::InitY, i as u64, 0),
                };
                VertexState::new(if plus { Opinion::Plus } else { Opinion::Minus }, y0)
            })
            .collect();

        let vertex_only = matches!(process, Process::Model1 { vertex_only: true, .. });
        let p0 = process.p0();
        let n_layers = process.init_layers();
        let mut layers = vec![EdgeSet::empty(n); n_layers];
        if !vertex_only {
            for pair in 0..pair_count(n) {
                for (l, layer) in layers.iter_mut().enumerate() {
                    let key = (pair * n_layers + l) as u64;
                    if rng.uniform(EntityKind::InitEdge, key, 0) < p0 {
                        layer.set_pair(pair, true);
                    }
                }
            }
        }
        let q = n_layers / 2;
        let graph = if n_layers == 1 {
            layers.pop().unwrap()
        } else {
            let mut g = EdgeSet::empty(n);
            for pair in 0..pair_count(n) {
                if resulting_rule(&layers, q, pair) {
                    g.set_pair(pair, true);
                }
            }
            g
        };
        if matches!(process, Process::Mimic3 { .. }) {
            layers.clear();
        }

        let track_plus_deg = matches!(process, Process::Model2 { .. } | Process::Model3 { .. });
        let mut sim = Self {
            process,
            rng,
            t: 0.0,
            n_plus: vertices.iter().filter(|v| v.opinion.is_plus()).count(),
            vertices,
            layers,
            deg: vec![0; n],
            plus_deg: vec![0; n],
            track_plus_deg,
            graph,
            members: [Members::default(), Members::default()],
            position: vec![0; n],
            counter: 0,
            pending: None,
            vertex_events: 0,
            edge_events: 0,
            flip_log: None,
        };
        for (i, j) in sim.graph.edges().collect::<Vec<_>>() {
            sim.deg[i] += 1;
            sim.deg[j] += 1;
            if sim.vertices[j].opinion.is_plus() {
                sim.plus_deg[i] += 1;
            }
            if sim.vertices[i].opinion.is_plus() {
                sim.plus_deg[j] += 1;
            }
        }
        for i in 0..n {
            let slot = sim.vertices[i].opinion as usize;
            sim.position[i] = sim.members[slot].list.len();
            sim.members[slot].list.push(i);
        }
        Ok(sim)
    }

    /// Records every opinion change from now on.
    pub fn with_flip_log(mut self) -> Self {
        self.flip_log = Some(Vec::new());
        self
    }

    pub fn flip_log(&self) -> Option<&[Flip]> {
        self.flip_log.as_deref()
    }

    pub fn process(&self) -> &Process {
        &self.process
    }

    pub fn seed(&self) -> u64 {
        self.rng.seed()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_plus(&self) -> usize {
        self.n_plus
    }

    pub fn opinion(&self, i: usize) -> Opinion {
        self.vertices[i].opinion
    }

    /// Raw vertex states; `y` is current only as of each `last_update`.
    pub fn vertices(&self) -> &[VertexState] {
        &self.vertices
    }

    /// `y` of vertex `i` at the current time.
    pub fn y(&self, i: usize) -> f64 {
        let mut v = self.vertices[i];
        v.advance_to(self.t);
        v.y
    }

    pub fn graph(&self) -> &EdgeSet {
        &self.graph
    }

    pub fn layers(&self) -> &[EdgeSet] {
        &self.layers
    }

    pub fn degrees(&self) -> &[u32] {
        &self.deg
    }

    pub fn min_degree(&self) -> u32 {
        self.deg.iter().copied().min().unwrap_or(0)
    }

    pub fn vertex_events(&self) -> u64 {
        self.vertex_events
    }

    pub fn edge_events(&self) -> u64 {
        self.edge_events
    }

    /// Total rates of the vertex and edge event categories.
    pub fn rates(&self) -> (f64, f64) {
        let n = self.n() as f64;
        let pairs = pair_count(self.n()) as f64;
        match &self.process {
            Process::Model1 { params, vertex_only } => {
                let v = params.gamma_pm * self.n_plus as f64 + params.gamma_mp * (self.n() - self.n_plus) as f64;
                (v, if *vertex_only { 0.0 } else { pairs })
            }
            Process::Model2 { params, .. } | Process::Mimic2 { params, .. } => (n * params.beta, pairs),
            Process::Model3 { params, .. } | Process::Mimic3 { params, .. } => {
                (n * params.beta, 2.0 * params.q as f64 * pairs)
            }
        }
    }

    /// Time of the next event. Asking does not consume randomness.
    pub fn next_event_time(&mut self) -> f64 {
        if let Some(t) = self.pending {
            return t;
        }
        let (v, e) = self.rates();
        let total = v + e;
        let next = if total > 0.0 {
            self.t + self.rng.exponential(EntityKind::Clock, WAIT, self.counter, total)
        } else {
            f64::INFINITY
        };
        self.pending = Some(next);
        next
    }

    /// Executes exactly one event.
    pub fn step(&mut self) -> Result<()> {
        let te = self.next_event_time();
        if !te.is_finite() {
            return Err(contract("no event can occur: all rates vanish"));
        }
        self.t = te;
        self.pending = None;
        let k = self.counter;
        let (v, e) = self.rates();
        let u = self.rng.uniform(EntityKind::Clock, CATEGORY, k);
        if u * (v + e) < v {
            self.vertex_events += 1;
            self.vertex_event(k, v)?;
        } else {
            self.edge_events += 1;
            self.edge_event(k);
        }
        self.counter += 1;
        Ok(())
    }

    /// Runs every event up to and including time `until`, then sets the clock
    /// to `until`.
    pub fn run_until(&mut self, until: f64) -> Result<()> {
        if !(until >= self.t) {
            return Err(contract(format!("cannot run back from t = {} to {until}", self.t)));
        }
        self.check_alpha_coverage(until)?;
        while self.next_event_time() <= until {
            self.step()?;
        }
        self.t = until;
        Ok(())
    }

    /// Runs to `until`, calling `observe` at the start, every `sample_dt` and
    /// at `until`.
    pub fn run(&mut self, until: f64, sample_dt: f64, mut observe: impl FnMut(&Simulation)) -> Result<()> {
        if !(sample_dt > 0.0) {
            return Err(contract(format!("sample_dt = {sample_dt} must be positive")));
        }
        let start = self.t;
        observe(self);
        let mut k = 1u64;
        loop {
            let next = (start + k as f64 * sample_dt).min(until);
            self.run_until(next)?;
            observe(self);
            if next >= until {
                return Ok(());
            }
            k += 1;
        }
    }

    fn check_alpha_coverage(&self, until: f64) -> Result<()> {
        match &self.process {
            Process::Mimic2 { alpha, .. } | Process::Mimic3 { alpha, .. } => alpha.check_coverage(self.t, until),
            _ => Ok(()),
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        let y: Vec<f64> = (0..self.n()).map(|i| self.y(i)).collect();
        Snapshot::new(
            self.t,
            self.vertices.iter().map(|v| v.opinion).collect(),
            y,
            self.vertices.iter().map(|v| v.y0).collect(),
            self.graph.clone(),
            self.layers.clone(),
        )
    }

    fn vertex_event(&mut self, k: u64, vertex_rate: f64) -> Result<()> {
        let n = self.n();
        let next = match &self.process {
            Process::Model1 { params, .. } => {
                let plus_rate = params.gamma_pm * self.n_plus as f64;
                let u = self.rng.uniform(EntityKind::Clock, FLIP_DIRECTION, k);
                let from = if u * vertex_rate < plus_rate { Opinion::Plus } else { Opinion::Minus };
                let list = &self.members[from as usize].list;
                let i = list[self.rng.index(EntityKind::Clock, VERTEX, k, list.len())];
                self.set_opinion(i, from.flipped());
                return Ok(());
            }
            Process::Model2 { zero_rule, .. } | Process::Model3 { zero_rule, .. } => {
                let i = self.rng.index(EntityKind::Clock, VERTEX, k, n);
                let u = self.rng.uniform(EntityKind::Vertex, i as u64, k);
                let d = self.deg[i];
                let opinion = if d == 0 {
                    match zero_rule {
                        ZeroNeighbourRule::Keep => self.vertices[i].opinion,
                        ZeroNeighbourRule::FairCoin => plus_if(u < 0.5),
                    }
                } else {
                    plus_if(u * (d as f64) < self.plus_deg[i] as f64)
                };
                (i, opinion)
            }
            Process::Mimic2 { alpha, .. } | Process::Mimic3 { alpha, .. } => {
                let i = self.rng.index(EntityKind::Clock, VERTEX, k, n);
                let u = self.rng.uniform(EntityKind::Vertex, i as u64, k);
                (i, plus_if(u < eval_alpha(alpha, self.t, self.y(i))?))
            }
        };
        self.set_opinion(next.0, next.1);
        Ok(())
    }

    fn edge_event(&mut self, k: u64) {
        let n = self.n();
        let i = self.rng.index(EntityKind::Clock, PAIR_I, k, n);
        let jp = self.rng.index(EntityKind::Clock, PAIR_J, k, n - 1);
        let j = if jp >= i { jp + 1 } else { jp };
        let pair = pair_index(i, j);
        let u = self.rng.uniform(EntityKind::Edge, pair as u64, k);
        let (xi, xj) = (self.vertices[i].opinion, self.vertices[j].opinion);
        match &self.process {
            Process::Model1 { params, .. } => {
                let p = mean_pi(params.pi_plus, params.pi_minus, xi, xj);
                self.set_edge(i, j, u < p);
            }
            Process::Mimic2 { params, .. } => {
                let p = mean_pi(params.pi_plus, params.pi_minus, xi, xj);
                self.set_edge(i, j, u < p);
            }
            Process::Model2 { params, .. } => {
                let p = if params.is_linear() || xi == xj {
                    mean_pi(params.pi_plus, params.pi_minus, xi, xj)
                } else {
                    (0.5 * (params.pi_plus + params.pi_minus)).powf(params.q_exp)
                };
                self.set_edge(i, j, u < p);
            }
            Process::Model3 { params, .. } => {
                let q = params.q as usize;
                let l = self.rng.index(EntityKind::Clock, LAYER, k, 2 * q);
                let p = if l < q {
                    mean_pi(params.pi_plus_g, params.pi_minus_g, xi, xj)
                } else {
                    mean_pi(params.pi_plus_r, params.pi_minus_r, xi, xj)
                };
                if self.layers[l].set_pair(pair, u < p) {
                    let on = resulting_rule(&self.layers, q, pair);
                    self.set_edge(i, j, on);
                }
            }
            Process::Mimic3 { params, p_plus, p_minus, .. } => {
                let l = self.rng.index(EntityKind::Clock, LAYER, k, 2 * params.q as usize);
                if l == 0 {
                    let s = [xi, xj].iter().map(|x| if x.is_plus() { *p_plus } else { *p_minus }).sum::<f64>();
                    let p = 2.0 * (0.25 * s * (2.0 - s)).powi(params.q as i32);
                    self.set_edge(i, j, u < p);
                }
            }
        }
    }

    fn set_edge(&mut self, i: usize, j: usize, on: bool) {
        if !self.graph.set(i, j, on) {
            return;
        }
        let delta: i64 = if on { 1 } else { -1 };
        for (a, b) in [(i, j), (j, i)] {
            self.deg[a] = (self.deg[a] as i64 + delta) as u32;
            if self.track_plus_deg && self.vertices[b].opinion.is_plus() {
                self.plus_deg[a] = (self.plus_deg[a] as i64 + delta) as u32;
            }
        }
    }

    fn set_opinion(&mut self, i: usize, opinion: Opinion) {
        self.vertices[i].advance_to(self.t);
        let old = self.vertices[i].opinion;
        if old == opinion {
            return;
        }
        self.vertices[i].opinion = opinion;
        if opinion.is_plus() {
            self.n_plus += 1;
        } else {
            self.n_plus -= 1;
        }
        // move between the opinion lists
        let from = &mut self.members[old as usize].list;
        let pos = self.position[i];
        let last = *from.last().unwrap();
        from.swap_remove(pos);
        if last != i {
            self.position[last] = pos;
        }
        let to = &mut self.members[opinion as usize].list;
        self.position[i] = to.len();
        to.push(i);

        if self.track_plus_deg && self.deg[i] > 0 {
            for j in 0..self.n() {
                if self.graph.contains(i, j) {
                    if opinion.is_plus() {
                        self.plus_deg[j] += 1;
                    } else {
                        self.plus_deg[j] -= 1;
                    }
                }
            }
        }
        if let Some(log) = self.flip_log.as_mut() {
            log.push(Flip { t: self.t, vertex: i, opinion });
        }
    }

    /// Recounts the maintained degree tables from scratch (test support).
    pub fn degree_tables_consistent(&self) -> bool {
        let deg = self.graph.degrees();
        (0..self.n()).all(|i| {
            let plus = self.graph.neighbours(i).filter(|&j| self.vertices[j].opinion.is_plus()).count();
            deg[i] as u32 == self.deg[i] && (!self.track_plus_deg || plus as u32 == self.plus_deg[i])
        })
    }
}

#[inline]
fn plus_if(b: bool) -> Opinion {
    if b {
        Opinion::Plus
    } else {
        Opinion::Minus
    }
}

#[inline]
fn mean_pi(pi_plus: f64, pi_minus: f64, a: Opinion, b: Opinion) -> f64 {
    let pick = |x: Opinion| if x.is_plus() { pi_plus } else { pi_minus };
    0.5 * (pick(a) + pick(b))
}

fn eval_alpha(alpha: &AlphaSource, t: f64, y: f64) -> Result<f64> {
    alpha.eval(t, y)
}

/// Resulting-graph rule: active iff every layer of one colour is active and
/// every layer of the other colour is inactive. Layers `0..q` are g, `q..2q` r.
pub(crate) fn resulting_rule(layers: &[EdgeSet], q: usize, pair: usize) -> bool {
    let g = layers[..q].iter().filter(|l| l.contains_pair(pair)).count();
    let r = layers[q..].iter().filter(|l| l.contains_pair(pair)).count();
    (g == q && r == 0) || (r == q && g == 0)
}
