//! Instance representations: hypergraphs, CSP formulas, CNF formulas,
//! assignments and projection (state-compression) schemes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A k-uniform hypergraph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    edges: Vec<Vec<usize>>,
    delta: usize,
}

impl Hypergraph {
    pub fn new(n: usize, k: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut deg = vec![0usize; n];
        for (i, e) in edges.iter().enumerate() {
            if e.len() != k {
                return Err(Error::invalid(format!(
                    "edge {i} has {} vertices, expected {k}",
                    e.len()
                )));
            }
            let set: BTreeSet<usize> = e.iter().copied().collect();
            if set.len() != k {
                return Err(Error::invalid(format!("edge {i} repeats a vertex")));
            }
            if let Some(&v) = set.iter().next_back() {
                if v >= n {
                    return Err(Error::invalid(format!(
                        "edge {i} mentions vertex {v} >= n={n}"
                    )));
                }
            }
            if !seen.insert(set.into_iter().collect::<Vec<_>>()) {
                return Err(Error::invalid(format!("edge {i} is a duplicate")));
            }
            for &v in e {
                deg[v] += 1;
            }
        }
        let delta = deg.into_iter().max().unwrap_or(0);
        Ok(Self { n, k, edges, delta })
    }

    /// Like [`Hypergraph::new`] but also checks a declared maximum degree.
    pub fn with_declared_delta(
        n: usize,
        k: usize,
        edges: Vec<Vec<usize>>,
        delta: usize,
    ) -> Result<Self> {
        let h = Self::new(n, k, edges)?;
        if h.delta != delta {
            return Err(Error::invalid(format!(
                "declared delta {delta} but computed {}",
                h.delta
            )));
        }
        Ok(h)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn delta(&self) -> usize {
        self.delta
    }
    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// Disjoint union of `m` copies of a single k-edge.
    pub fn disjoint_edges(k: usize, m: usize) -> Self {
        let edges = (0..m).map(|i| (i * k..(i + 1) * k).collect()).collect();
        Self::new(m * k, k, edges).expect("disjoint edges are valid")
    }

    pub fn without_last_edge(&self) -> Self {
        let mut edges = self.edges.clone();
        edges.pop();
        Self::new(self.n, self.k, edges).expect("subset of valid edges")
    }
}

/// A constraint forbids a list of assignments of its variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub vars: Vec<usize>,
    pub forbidden: Vec<Vec<u32>>,
}

impl Constraint {
    pub fn is_atomic(&self) -> bool {
        self.forbidden.len() == 1
    }

    pub fn is_violated(&self, a: &[u32]) -> bool {
        self.forbidden
            .iter()
            .any(|f| f.iter().zip(&self.vars).all(|(&x, &v)| a[v] == x))
    }

    /// Satisfied under a projected assignment: every forbidden tuple is
    /// ruled out by some variable whose bucket differs.
    pub fn satisfied_projected(&self, proj: &ProjectionScheme, sigma: &[u32]) -> bool {
        self.forbidden.iter().all(|f| {
            f.iter()
                .zip(&self.vars)
                .any(|(&x, &v)| proj.bucket_of(v, x) != sigma[v])
        })
    }
}

/// A CSP formula over per-variable domains `0..q_v`.
///
/// Atomic formulas (one forbidden tuple per constraint) are the special
/// case checked by [`Csp::is_atomic`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Csp {
    domains: Vec<u32>,
    constraints: Vec<Constraint>,
}

impl Csp {
    pub fn new(domains: Vec<u32>, constraints: Vec<Constraint>) -> Result<Self> {
        let n = domains.len();
        if domains.contains(&0) {
            return Err(Error::invalid("empty domain"));
        }
        for (i, c) in constraints.iter().enumerate() {
            let set: BTreeSet<usize> = c.vars.iter().copied().collect();
            if set.len() != c.vars.len() || c.vars.iter().any(|&v| v >= n) {
                return Err(Error::invalid(format!(
                    "constraint {i} has bad variable list"
                )));
            }
            if c.forbidden.is_empty() {
                return Err(Error::invalid(format!("constraint {i} forbids nothing")));
            }
            for f in &c.forbidden {
                if f.len() != c.vars.len() || f.iter().zip(&c.vars).any(|(&x, &v)| x >= domains[v])
                {
                    return Err(Error::invalid(format!(
                        "constraint {i} has a bad forbidden tuple"
                    )));
                }
            }
        }
        Ok(Self {
            domains,
            constraints,
        })
    }

    pub fn n(&self) -> usize {
        self.domains.len()
    }
    pub fn domains(&self) -> &[u32] {
        &self.domains
    }
    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }
    pub fn is_atomic(&self) -> bool {
        self.constraints.iter().all(Constraint::is_atomic)
    }

    pub fn arity(&self) -> usize {
        self.constraints
            .iter()
            .map(|c| c.vars.len())
            .max()
            .unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n()];
        for c in &self.constraints {
            for &v in &c.vars {
                d[v] += 1;
            }
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Constraints containing each variable.
    pub fn occurrences(&self) -> Vec<Vec<usize>> {
        let mut occ = vec![Vec::new(); self.n()];
        for (i, c) in self.constraints.iter().enumerate() {
            for &v in &c.vars {
                occ[v].push(i);
            }
        }
        occ
    }

    pub fn is_satisfied(&self, a: &[u32]) -> bool {
        !self.constraints.iter().any(|c| c.is_violated(a))
    }

    pub fn violated_count(&self, a: &[u32]) -> usize {
        self.constraints.iter().filter(|c| c.is_violated(a)).count()
    }

    /// The formula restricted to the first `i` constraints.
    pub fn prefix(&self, i: usize) -> Self {
        Self {
            domains: self.domains.clone(),
            constraints: self.constraints[..i].to_vec(),
        }
    }

    pub fn without(&self, idx: usize) -> Self {
        let mut constraints = self.constraints.clone();
        constraints.remove(idx);
        Self {
            domains: self.domains.clone(),
            constraints,
        }
    }

    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.constraints.len()];
        if order.len() != seen.len() {
            return Err(Error::invalid("constraint order is not a permutation"));
        }
        for &i in order {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid("constraint order is not a permutation"));
            }
        }
        let constraints = order.iter().map(|&i| self.constraints[i].clone()).collect();
        Ok(Self {
            domains: self.domains.clone(),
            constraints,
        })
    }

    /// Variable components induced by the constraints. Each component lists
    /// its variables and its constraint indices.
    pub fn components(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for c in &self.constraints {
            for w in c.vars.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut index = vec![usize::MAX; n];
        let mut comps: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            if index[r] == usize::MAX {
                index[r] = comps.len();
                comps.push((Vec::new(), Vec::new()));
            }
            comps[index[r]].0.push(v);
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if let Some(&v) = c.vars.first() {
                let r = find(&mut parent, v);
                comps[index[r]].1.push(i);
            }
        }
        comps
    }

    /// Sub-formula on a variable subset, relabelled to `0..vars.len()`.
    pub fn restrict(&self, vars: &[usize], cons: &[usize]) -> Self {
        let mut relabel = vec![usize::MAX; self.n()];
        for (i, &v) in vars.iter().enumerate() {
            relabel[v] = i;
        }
        let domains = vars.iter().map(|&v| self.domains[v]).collect();
        let constraints = cons
            .iter()
            .map(|&i| {
                let c = &self.constraints[i];
                Constraint {
                    vars: c.vars.iter().map(|&v| relabel[v]).collect(),
                    forbidden: c.forbidden.clone(),
                }
            })
            .collect();
        Self {
            domains,
            constraints,
        }
    }

    /// Two constraints are adjacent when they share a variable.
    pub fn dependency_graph(&self) -> Vec<Vec<usize>> {
        let occ = self.occurrences();
        let m = self.constraints.len();
        let mut adj = vec![BTreeSet::new(); m];
        for list in &occ {
            for &a in list {
                for &b in list {
                    if a != b {
                        adj[a].insert(b);
                    }
                }
            }
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }
}

/// Hyperedge constraints: each edge forbids its `q` monochromatic assignments.
pub fn coloring_csp(h: &Hypergraph, q: u32) -> Result<Csp> {
    if q < 2 {
        return Err(Error::param(format!("need q >= 2 colors, got {q}")));
    }
    let constraints = h
        .edges()
        .iter()
        .map(|e| Constraint {
            vars: e.clone(),
            forbidden: (0..q).map(|c| vec![c; e.len()]).collect(),
        })
        .collect();
    Csp::new(vec![q; h.n()], constraints)
}

/// Each hyperedge becomes `q` atomic constraints, one per monochromatic color.
pub fn coloring_to_atomic_csp(h: &Hypergraph, q: u32) -> Result<Csp> {
    if q < 2 {
        return Err(Error::param(format!("need q >= 2 colors, got {q}")));
    }
    let mut constraints = Vec::with_capacity(h.edges().len() * q as usize);
    for e in h.edges() {
        for c in 0..q {
            constraints.push(Constraint {
                vars: e.clone(),
                forbidden: vec![vec![c; e.len()]],
            });
        }
    }
    Csp::new(vec![q; h.n()], constraints)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub vars: Vec<usize>,
    pub neg: Vec<bool>,
}

/// A k-CNF formula. Value 1 means true; a negated literal is satisfied by 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    n: usize,
    k: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(n: usize, k: usize, clauses: Vec<Clause>) -> Result<Self> {
        for (i, c) in clauses.iter().enumerate() {
            if c.vars.len() != k || c.neg.len() != k {
                return Err(Error::invalid(format!(
                    "clause {i} does not have width {k}"
                )));
            }
            let set: BTreeSet<usize> = c.vars.iter().copied().collect();
            if set.len() != k || c.vars.iter().any(|&v| v >= n) {
                return Err(Error::invalid(format!("clause {i} has bad variables")));
            }
        }
        Ok(Self { n, k, clauses })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn delta(&self) -> usize {
        let mut d = vec![0usize; self.n];
        for c in &self.clauses {
            for &v in &c.vars {
                d[v] += 1;
            }
        }
        d.into_iter().max().unwrap_or(0)
    }

    /// The unique violating assignment of a clause is the negation of its literals.
    pub fn to_csp(&self) -> Csp {
        let constraints = self
            .clauses
            .iter()
            .map(|c| Constraint {
                vars: c.vars.clone(),
                forbidden: vec![c.neg.iter().map(|&b| b as u32).collect()],
            })
            .collect();
        Csp::new(vec![2; self.n], constraints).expect("clauses were validated")
    }
}

/// Bucket map of a single variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarProjection {
    pub map: Vec<u32>,
    pub buckets: u32,
    /// Local index of the distinguished bucket, if this variable has one.
    pub one: Option<u32>,
}

impl VarProjection {
    pub fn new(map: Vec<u32>, buckets: u32, one: Option<u32>) -> Result<Self> {
        if map.iter().any(|&b| b >= buckets) || one.is_some_and(|o| o >= buckets) {
            return Err(Error::invalid("bucket index out of range"));
        }
        let p = Self { map, buckets, one };
        if p.preimage_sizes().contains(&0) {
            return Err(Error::invalid("empty bucket"));
        }
        Ok(p)
    }

    pub fn identity(q: u32, one: Option<u32>) -> Self {
        Self {
            map: (0..q).collect(),
            buckets: q,
            one,
        }
    }

    pub fn preimage_sizes(&self) -> Vec<u32> {
        let mut s = vec![0; self.buckets as usize];
        for &b in &self.map {
            s[b as usize] += 1;
        }
        s
    }

    pub fn preimage(&self, b: u32) -> Vec<u32> {
        (0..self.map.len() as u32)
            .filter(|&a| self.map[a as usize] == b)
            .collect()
    }
}

/// Round-robin coloring projection. Color 0 (the special color) gets its own
/// bucket 0; colors `1..q` are dealt into buckets `1..=b` in turn.
pub fn make_coloring_projection(q: u32, b: u32) -> Result<VarProjection> {
    if b == 0 || q <= b {
        return Err(Error::param(format!("need 1 <= B < q, got B={b}, q={q}")));
    }
    let map = (0..q)
        .map(|c| if c == 0 { 0 } else { (c - 1) % b + 1 })
        .collect();
    VarProjection::new(map, b + 1, Some(0))
}

/// Per-variable projection maps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionScheme {
    vars: Vec<VarProjection>,
}

impl ProjectionScheme {
    pub fn new(vars: Vec<VarProjection>) -> Self {
        Self { vars }
    }

    pub fn uniform(n: usize, p: VarProjection) -> Self {
        Self { vars: vec![p; n] }
    }

    /// Identity on every variable; `one` marks the special symbol if any.
    pub fn identity(domains: &[u32], one: Option<u32>) -> Self {
        Self {
            vars: domains
                .iter()
                .map(|&q| VarProjection::identity(q, one.filter(|&o| o < q)))
                .collect(),
        }
    }

    /// Everything collapses to one bucket; nothing is special.
    pub fn collapse(domains: &[u32]) -> Self {
        Self {
            vars: domains
                .iter()
                .map(|&q| VarProjection {
                    map: vec![0; q as usize],
                    buckets: 1,
                    one: None,
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }
    pub fn var(&self, v: usize) -> &VarProjection {
        &self.vars[v]
    }
    pub fn vars(&self) -> &[VarProjection] {
        &self.vars
    }

    #[inline]
    pub fn bucket_of(&self, v: usize, a: u32) -> u32 {
        self.vars[v].map[a as usize]
    }

    #[inline]
    pub fn is_one(&self, v: usize, bucket: u32) -> bool {
        self.vars[v].one == Some(bucket)
    }

    pub fn bucket_counts(&self) -> Vec<u32> {
        self.vars.iter().map(|p| p.buckets).collect()
    }

    pub fn check_domains(&self, domains: &[u32]) -> Result<()> {
        if domains.len() != self.vars.len() {
            return Err(Error::invalid(
                "projection and formula disagree on variable count",
            ));
        }
        for (v, (&q, p)) in domains.iter().zip(&self.vars).enumerate() {
            if p.map.len() != q as usize {
                return Err(Error::invalid(format!(
                    "projection of variable {v} is not total"
                )));
            }
        }
        Ok(())
    }

    pub fn project(&self, a: &Assignment) -> Result<Assignment> {
        if a.level != Level::Original {
            return Err(Error::invalid("assignment is already projected"));
        }
        let values = a
            .values
            .iter()
            .enumerate()
            .map(|(v, &x)| self.bucket_of(v, x))
            .collect();
        Ok(Assignment {
            values,
            level: Level::Projected,
        })
    }

    /// Whether an original assignment maps onto a projected one.
    pub fn is_consistent(&self, original: &Assignment, projected: &Assignment) -> bool {
        original.level == Level::Original
            && projected.level == Level::Projected
            && original.values.len() == projected.values.len()
            && original
                .values
                .iter()
                .zip(&projected.values)
                .enumerate()
                .all(|(v, (&a, &b))| self.bucket_of(v, a) == b)
    }
}

/// Marked variables keep both values as `0▲, 1▲`; unmarked ones collapse to `▲`.
pub fn make_cnf_projection(f: &CnfFormula, marked: &[usize]) -> Result<ProjectionScheme> {
    let mut is_marked = vec![false; f.n()];
    for &v in marked {
        if v >= f.n() {
            return Err(Error::invalid(format!("marked variable {v} out of range")));
        }
        is_marked[v] = true;
    }
    let vars = is_marked
        .into_iter()
        .map(|m| {
            if m {
                VarProjection::identity(2, Some(1))
            } else {
                VarProjection {
                    map: vec![0, 0],
                    buckets: 1,
                    one: None,
                }
            }
        })
        .collect();
    Ok(ProjectionScheme { vars })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    Original,
    Projected,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub values: Vec<u32>,
    pub level: Level,
}

impl Assignment {
    pub fn original(values: Vec<u32>) -> Self {
        Self {
            values,
            level: Level::Original,
        }
    }
    pub fn projected(values: Vec<u32>) -> Self {
        Self {
            values,
            level: Level::Projected,
        }
    }
}

/// Mixed-radix indexing of product spaces, first variable least significant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedRadix {
    dims: Vec<u32>,
    strides: Vec<u64>,
    total: u64,
}

impl MixedRadix {
    pub fn new(dims: &[u32]) -> Result<Self> {
        let mut strides = Vec::with_capacity(dims.len());
        let mut total: u64 = 1;
        for &d in dims {
            strides.push(total);
            total = total
                .checked_mul(d as u64)
                .ok_or_else(|| Error::budget("state space", f64::INFINITY, u64::MAX))?;
        }
        Ok(Self {
            dims: dims.to_vec(),
            strides,
            total,
        })
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }
    pub fn total(&self) -> u64 {
        self.total
    }
    pub fn stride(&self, v: usize) -> u64 {
        self.strides[v]
    }

    pub fn decode_into(&self, mut idx: u64, out: &mut [u32]) {
        for (o, &d) in out.iter_mut().zip(&self.dims) {
            *o = (idx % d as u64) as u32;
            idx /= d as u64;
        }
    }

    pub fn decode(&self, idx: u64) -> Vec<u32> {
        let mut out = vec![0; self.dims.len()];
        self.decode_into(idx, &mut out);
        out
    }

    pub fn encode(&self, a: &[u32]) -> u64 {
        a.iter()
            .zip(&self.strides)
            .map(|(&x, &s)| x as u64 * s)
            .sum()
    }

    #[inline]
    pub fn digit(&self, idx: u64, v: usize) -> u32 {
        ((idx / self.strides[v]) % self.dims[v] as u64) as u32
    }

    /// Odometer increment; returns false after the last state.
    #[inline]
    pub fn advance(&self, a: &mut [u32]) -> bool {
        for (x, &d) in a.iter_mut().zip(&self.dims) {
            *x += 1;
            if *x < d {
                return true;
            }
            *x = 0;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomization_counts() {
        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let csp = coloring_to_atomic_csp(&h, 3).unwrap();
        assert_eq!(csp.constraints().len(), 3);
        assert_eq!(csp.max_degree(), 3);
        assert!(csp.is_atomic());

        let h = Hypergraph::new(4, 3, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        let csp = coloring_to_atomic_csp(&h, 2).unwrap();
        assert_eq!(csp.constraints().len(), 4);
        assert_eq!(csp.degrees(), vec![2, 4, 4, 2]);
        assert!(coloring_to_atomic_csp(&h, 1).is_err());
    }

    #[test]
    fn hypergraph_validation() {
        assert!(Hypergraph::new(3, 2, vec![vec![0, 1], vec![1, 0]]).is_err());
        assert!(Hypergraph::new(3, 2, vec![vec![0, 0]]).is_err());
        assert!(Hypergraph::new(3, 2, vec![vec![0, 3]]).is_err());
        assert!(Hypergraph::new(3, 3, vec![vec![0, 1]]).is_err());
        assert!(Hypergraph::with_declared_delta(3, 2, vec![vec![0, 1], vec![1, 2]], 1).is_err());
        assert_eq!(
            Hypergraph::with_declared_delta(3, 2, vec![vec![0, 1], vec![1, 2]], 2)
                .unwrap()
                .delta(),
            2
        );
    }

    #[test]
    fn coloring_projection_q6_b2() {
        let p = make_coloring_projection(6, 2).unwrap();
        // colors 1..6 in the usual numbering are 0..5 here
        assert_eq!(p.preimage(0), vec![0]);
        assert_eq!(p.preimage(1), vec![1, 3, 5]);
        assert_eq!(p.preimage(2), vec![2, 4]);
        assert!(make_coloring_projection(2, 2).is_err());
    }

    #[test]
    fn coloring_projection_q700() {
        let p = make_coloring_projection(700, 13).unwrap();
        let sizes = p.preimage_sizes();
        assert_eq!(sizes[0], 1);
        assert_eq!(sizes[1..].iter().min(), Some(&53));
        assert_eq!(sizes[1..].iter().max(), Some(&54));
    }

    #[test]
    fn cnf_projection_shapes() {
        let f = CnfFormula::new(
            3,
            2,
            vec![Clause {
                vars: vec![0, 1],
                neg: vec![false, true],
            }],
        )
        .unwrap();
        let p = make_cnf_projection(&f, &[0]).unwrap();
        assert_eq!(p.bucket_counts(), vec![2, 1, 1]);
        let p = make_cnf_projection(&f, &[]).unwrap();
        assert_eq!(MixedRadix::new(&p.bucket_counts()).unwrap().total(), 1);
        let p = make_cnf_projection(&f, &[0, 1, 2]).unwrap();
        assert_eq!(p, ProjectionScheme::identity(&[2, 2, 2], Some(1)));
    }

    #[test]
    fn cnf_violating_assignment() {
        let f = CnfFormula::new(
            2,
            2,
            vec![Clause {
                vars: vec![0, 1],
                neg: vec![false, true],
            }],
        )
        .unwrap();
        let csp = f.to_csp();
        // x0 ∨ ¬x1 fails only at x0=0, x1=1
        assert!(!csp.is_satisfied(&[0, 1]));
        assert!(csp.is_satisfied(&[0, 0]));
        assert!(csp.is_satisfied(&[1, 1]));
    }

    #[test]
    fn consistency_relation() {
        let p = ProjectionScheme::uniform(2, make_coloring_projection(6, 2).unwrap());
        let a = Assignment::original(vec![0, 3]);
        let b = p.project(&a).unwrap();
        assert_eq!(b.values, vec![0, 1]);
        assert!(p.is_consistent(&a, &b));
        assert!(!p.is_consistent(&Assignment::original(vec![0, 2]), &b));
    }

    #[test]
    fn mixed_radix_roundtrip() {
        let r = MixedRadix::new(&[2, 3, 4]).unwrap();
        let mut a = vec![0; 3];
        for i in 0..r.total() {
            assert_eq!(r.decode(i), a);
            assert_eq!(r.encode(&a), i);
            assert_eq!(r.digit(i, 1), a[1]);
            r.advance(&mut a);
        }
        assert_eq!(a, vec![0, 0, 0]);
    }

    #[test]
    fn components_split() {
        let h = Hypergraph::new(7, 3, vec![vec![0, 1, 2], vec![4, 5, 6]]).unwrap();
        let csp = coloring_csp(&h, 3).unwrap();
        let comps = csp.components();
        assert_eq!(comps.len(), 3);
        assert_eq!(comps[1], (vec![3], vec![]));
    }
}
