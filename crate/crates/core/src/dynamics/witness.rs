use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cluster::{bad_cluster, BadCluster};
use super::{adaptive_row, HeatBath, ScanSchedule};
use crate::conditions::DecompositionScheme;
use crate::error::{Error, Result};
use crate::model::{Constraint, Csp, ProjectionScheme};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Constraint(usize),
    /// The node (TS(vbl(c*), 0), c*).
    Star,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WitnessNode {
    /// Sorted; each timestamp names its variable through the schedule.
    pub ts: Vec<i64>,
    pub kind: NodeKind,
}

/// Space-time graph over nodes (TS(c,t), c) with all timestamps in
/// `[t_min, 0]`. Two nodes are adjacent when their timestamp sets meet.
#[derive(Clone, Debug)]
pub struct WitnessGraph<'a> {
    csp: &'a Csp,
    c_star: usize,
    schedule: ScanSchedule,
    t_min: i64,
    occ: Vec<Vec<usize>>,
}

impl<'a> WitnessGraph<'a> {
    pub fn new(csp: &'a Csp, c_star: usize, t_min: i64) -> Result<Self> {
        if c_star >= csp.constraints().len() {
            return Err(Error::param(format!("c* = {c_star} is not a constraint")));
        }
        if t_min > 0 {
            return Err(Error::param("window must end at time 0"));
        }
        Ok(Self {
            csp,
            c_star,
            schedule: ScanSchedule::new(csp.n())?,
            t_min,
            occ: csp.occurrences(),
        })
    }

    pub fn schedule(&self) -> &ScanSchedule {
        &self.schedule
    }
    pub fn t_min(&self) -> i64 {
        self.t_min
    }
    pub fn c_star(&self) -> usize {
        self.c_star
    }

    pub fn node(&self, c: usize, t: i64) -> WitnessNode {
        WitnessNode {
            ts: self.schedule.ts(&self.csp.constraints()[c].vars, t),
            kind: NodeKind::Constraint(c),
        }
    }

    pub fn star(&self) -> WitnessNode {
        WitnessNode {
            ts: self
                .schedule
                .ts(&self.csp.constraints()[self.c_star].vars, 0),
            kind: NodeKind::Star,
        }
    }

    pub fn constraint(&self, x: &WitnessNode) -> &Constraint {
        match x.kind {
            NodeKind::Constraint(c) => &self.csp.constraints()[c],
            NodeKind::Star => &self.csp.constraints()[self.c_star],
        }
    }

    pub fn in_window(&self, x: &WitnessNode) -> bool {
        x.ts.first().is_some_and(|&s| s >= self.t_min) && x.ts.last().is_some_and(|&s| s <= 0)
    }

    /// 2Δk² − 2 for the formula's arity and maximum degree.
    pub fn degree_bound(&self) -> usize {
        let (d, k) = (self.csp.max_degree(), self.csp.arity());
        (2 * d * k * k).saturating_sub(2)
    }

    pub fn neighbors(&self, x: &WitnessNode) -> Vec<WitnessNode> {
        let mut out = BTreeSet::new();
        let star = self.star();
        for &s in &x.ts {
            let u = self.schedule.var(s);
            for &c in &self.occ[u] {
                if c == self.c_star {
                    continue;
                }
                let last = (s + self.schedule.n as i64 - 1).min(0);
                for t in s..=last {
                    let y = self.node(c, t);
                    if self.in_window(&y) && y != *x {
                        out.insert(y);
                    }
                }
            }
            if star.ts.contains(&s) && star != *x {
                out.insert(star.clone());
            }
        }
        out.into_iter().collect()
    }

    /// Not satisfied by the record: some forbidden tuple agrees with every
    /// non-⊥ entry of `r` at the node's timestamps.
    pub fn is_bad(&self, x: &WitnessNode, proj: &ProjectionScheme, r: &[Option<u32>]) -> bool {
        if !self.in_window(x) {
            return false;
        }
        let c = self.constraint(x);
        let at = |v: usize| -> Option<u32> {
            let s =
                x.ts.iter()
                    .copied()
                    .find(|&s| self.schedule.var(s) == v)
                    .expect("variable of node");
            r[(s - self.t_min) as usize]
        };
        c.forbidden.iter().any(|f| {
            f.iter()
                .zip(&c.vars)
                .all(|(&a, &v)| at(v).is_none_or(|b| b == proj.bucket_of(v, a)))
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadComponent {
    pub nodes: Vec<WitnessNode>,
    /// TS(C^bad), the union of the nodes' timestamps.
    pub timestamps: Vec<i64>,
}

impl BadComponent {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn contains(&self, x: &WitnessNode) -> bool {
        self.nodes.binary_search(x).is_ok()
    }
}

/// Maximal connected set of bad nodes containing the c* node. `r` is the
/// oblivious record on `[t_min, 0]`, `None` for ⊥.
pub fn bad_component(
    r: &[Option<u32>],
    g: &WitnessGraph,
    proj: &ProjectionScheme,
) -> Result<BadComponent> {
    if r.len() as i64 != 1 - g.t_min {
        return Err(Error::invalid(format!(
            "record has {} entries, window needs {}",
            r.len(),
            1 - g.t_min
        )));
    }
    let star = g.star();
    if !g.is_bad(&star, proj, r) {
        return Ok(BadComponent::default());
    }
    let mut seen = BTreeSet::from([star.clone()]);
    let mut queue = VecDeque::from([star]);
    while let Some(x) = queue.pop_front() {
        for y in g.neighbors(&x) {
            if !seen.contains(&y) && g.is_bad(&y, proj, r) {
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    let timestamps: BTreeSet<i64> = seen.iter().flat_map(|x| x.ts.iter().copied()).collect();
    Ok(BadComponent {
        nodes: seen.into_iter().collect(),
        timestamps: timestamps.into_iter().collect(),
    })
}

/// Rebuilds S^bad and τ from the bad component and the update values `o`:
/// start from c* and grow through constraints whose time-0 node lies in the
/// component and which `o` leaves unsatisfied.
pub fn reconstruct_bad_cluster(
    comp: &BadComponent,
    o: &BTreeMap<i64, u32>,
    g: &WitnessGraph,
    proj: &ProjectionScheme,
) -> Result<BadCluster> {
    let csp = g.csp;
    if !comp.contains(&g.star()) {
        return Ok(BadCluster::empty(csp.n()));
    }
    let value = |v: usize| -> Result<u32> {
        let s = g.schedule.pred(v, 0);
        o.get(&s)
            .copied()
            .ok_or_else(|| Error::invalid(format!("no update value at time {s}")))
    };
    let unsat = |c: usize| -> Result<bool> {
        let con = &csp.constraints()[c];
        let vals = con
            .vars
            .iter()
            .map(|&v| value(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(con.forbidden.iter().any(|f| {
            f.iter()
                .zip(&con.vars)
                .zip(&vals)
                .all(|((&a, &v), &b)| proj.bucket_of(v, a) == b)
        }))
    };
    if !unsat(g.c_star)? {
        return Ok(BadCluster::empty(csp.n()));
    }
    let mut set = BTreeSet::from([g.c_star]);
    let mut queue = VecDeque::from([g.c_star]);
    while let Some(c) = queue.pop_front() {
        for &v in &csp.constraints()[c].vars {
            for &d in &g.occ[v] {
                if set.contains(&d) || !comp.contains(&g.node(d, 0)) {
                    continue;
                }
                if unsat(d)? {
                    set.insert(d);
                    queue.push_back(d);
                }
            }
        }
    }
    let mut vals = vec![0; csp.n()];
    for &c in &set {
        for &v in &csp.constraints()[c].vars {
            vals[v] = value(v)?;
        }
    }
    Ok(BadCluster::from_set(csp, set, |v| vals[v]))
}

/// One simulated b-decomposed run over `[t_min, 0]`. Branches are drawn in
/// proportion to |b|, adaptive values in proportion to |ψ^{τ,⊥}| (uniform if
/// that row is missing or zero); `weight` carries the complex correction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecomposedTrace {
    pub t_min: i64,
    pub initial: Vec<u32>,
    pub r: Vec<Option<u32>>,
    pub o: Vec<u32>,
    pub final_state: Vec<u32>,
    pub weight: Complex64,
}

impl DecomposedTrace {
    pub fn updates(&self) -> BTreeMap<i64, u32> {
        self.o
            .iter()
            .enumerate()
            .map(|(i, &x)| (self.t_min + i as i64, x))
            .collect()
    }
}

fn draw<R: Rng>(rng: &mut R, w: &[f64]) -> usize {
    let total: f64 = w.iter().sum();
    if total.is_nan() || total <= 0.0 || !total.is_finite() {
        return rng.gen_range(0..w.len());
    }
    let mut x = rng.gen::<f64>() * total;
    for (i, &p) in w.iter().enumerate() {
        if x < p {
            return i;
        }
        x -= p;
    }
    w.iter().rposition(|&p| p > 0.0).unwrap_or(w.len() - 1)
}

pub fn sample_decomposed_trace<R: Rng>(
    hb: &HeatBath,
    scheme: &DecompositionScheme,
    window: usize,
    rng: &mut R,
) -> Result<DecomposedTrace> {
    let radix = &hb.counts().radix;
    scheme.check_projection(hb.counts().projection())?;
    if window == 0 {
        return Err(Error::param("empty window"));
    }
    let schedule = ScanSchedule::new(hb.n())?;
    let t_min = 1 - window as i64;
    let initial = radix.decode(
        hb.first_feasible()
            .ok_or_else(|| Error::invalid("formula has no solutions"))?,
    );
    let mut state = initial.clone();
    let (mut r, mut o) = (Vec::with_capacity(window), Vec::with_capacity(window));
    let mut weight = Complex64::new(1.0, 0.0);
    for t in t_min..=0 {
        let v = schedule.var(t);
        let dec = &scheme.vars[v];
        let mut branch: Vec<Complex64> = dec.b.clone();
        branch.push(dec.bottom);
        let abs: Vec<f64> = branch.iter().map(|z| z.norm()).collect();
        let i = draw(rng, &abs);
        weight *= branch[i] * (abs.iter().sum::<f64>() / abs[i].max(f64::MIN_POSITIVE));
        let x = if i < dec.b.len() {
            r.push(Some(i as u32));
            i as u32
        } else {
            r.push(None);
            let adaptive = match hb.row(v, radix.encode(&state)) {
                Ok(Some(row)) => adaptive_row(row, &dec.b, dec.bottom),
                _ => None,
            };
            match adaptive {
                Some(a) => {
                    let w: Vec<f64> = a.iter().map(|z| z.norm()).collect();
                    let j = draw(rng, &w);
                    let s: f64 = w.iter().sum();
                    if s > 0.0 {
                        weight *= a[j] * (s / w[j].max(f64::MIN_POSITIVE));
                    }
                    j as u32
                }
                None => rng.gen_range(0..dec.b.len() as u32),
            }
        };
        o.push(x);
        state[v] = x;
    }
    Ok(DecomposedTrace {
        t_min,
        initial,
        r,
        o,
        final_state: state,
        weight,
    })
}

/// Whether reconstruction from the trace's record and updates reproduces
/// the bad cluster of its final state.
pub fn check_trace_reconstruction(
    trace: &DecomposedTrace,
    g: &WitnessGraph,
    proj: &ProjectionScheme,
) -> Result<bool> {
    let comp = bad_component(&trace.r, g, proj)?;
    let rebuilt = reconstruct_bad_cluster(&comp, &trace.updates(), g, proj)?;
    let direct = bad_cluster(&trace.final_state, g.csp, proj, g.c_star);
    Ok(rebuilt == direct)
}
