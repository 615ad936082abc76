//! Seeded instance generators and the JSON instance format.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    coloring_csp, coloring_to_atomic_csp, make_coloring_projection, Clause, CnfFormula, Constraint,
    Csp, Hypergraph, ProjectionScheme, VarProjection,
};

/// An instance file, tagged by `"type"`. Unknown fields are rejected.
///
/// `projection` optionally gives one bucket array per variable (bucket of
/// each domain symbol); the special bucket is the one holding the special
/// symbol (color 0 for hypergraphs, value 1 otherwise).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Instance {
    Hypergraph {
        n: usize,
        k: usize,
        edges: Vec<Vec<usize>>,
        q: u32,
        /// Round-robin bucket count when no projection is given; defaults to 1.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<u32>,
        /// Expand each edge into q single-tuple constraints.
        #[serde(default, skip_serializing_if = "is_false")]
        atomic: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        projection: Option<Vec<Vec<u32>>>,
    },
    Cnf {
        n: usize,
        k: usize,
        clauses: Vec<Clause>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        projection: Option<Vec<Vec<u32>>>,
    },
    Csp {
        domains: Vec<u32>,
        constraints: Vec<Constraint>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        projection: Option<Vec<Vec<u32>>>,
    },
}

fn is_false(b: &bool) -> bool {
    !b
}

impl Instance {
    pub fn coloring(h: &Hypergraph, q: u32, b: Option<u32>) -> Self {
        Instance::Hypergraph {
            n: h.n(),
            k: h.k(),
            edges: h.edges().to_vec(),
            q,
            b,
            atomic: false,
            projection: None,
        }
    }

    pub fn from_cnf(f: &CnfFormula) -> Self {
        Instance::Cnf {
            n: f.n(),
            k: f.k(),
            clauses: f.clauses().to_vec(),
            projection: None,
        }
    }

    pub fn hypergraph(&self) -> Result<Option<(Hypergraph, u32)>> {
        match self {
            Instance::Hypergraph { n, k, q, edges, .. } => {
                Ok(Some((Hypergraph::new(*n, *k, edges.clone())?, *q)))
            }
            _ => Ok(None),
        }
    }

    pub fn csp(&self) -> Result<Csp> {
        match self {
            Instance::Hypergraph { q, atomic, .. } => {
                let (h, _) = self.hypergraph()?.expect("hypergraph");
                if *atomic {
                    coloring_to_atomic_csp(&h, *q)
                } else {
                    coloring_csp(&h, *q)
                }
            }
            Instance::Cnf { n, k, clauses, .. } => {
                Ok(CnfFormula::new(*n, *k, clauses.clone())?.to_csp())
            }
            Instance::Csp {
                domains,
                constraints,
                ..
            } => Csp::new(domains.clone(), constraints.clone()),
        }
    }

    pub fn cnf(&self) -> Result<Option<CnfFormula>> {
        match self {
            Instance::Cnf { n, k, clauses, .. } => {
                Ok(Some(CnfFormula::new(*n, *k, clauses.clone())?))
            }
            _ => Ok(None),
        }
    }

    fn special_symbol(&self) -> u32 {
        match self {
            Instance::Hypergraph { .. } => 0,
            _ => 1,
        }
    }

    fn explicit_projection(&self) -> Option<&Vec<Vec<u32>>> {
        match self {
            Instance::Hypergraph { projection, .. }
            | Instance::Cnf { projection, .. }
            | Instance::Csp { projection, .. } => projection.as_ref(),
        }
    }

    /// The file's projection, or by default the round-robin bucket map for
    /// hypergraphs and the identity map otherwise.
    pub fn projection(&self) -> Result<ProjectionScheme> {
        let csp = self.csp()?;
        let sym = self.special_symbol();
        if let Some(maps) = self.explicit_projection() {
            if maps.len() != csp.n() {
                return Err(Error::invalid(
                    "projection needs one bucket array per variable",
                ));
            }
            let vars = maps
                .iter()
                .map(|m| {
                    let buckets = m.iter().max().map_or(0, |&x| x + 1);
                    VarProjection::new(m.clone(), buckets, m.get(sym as usize).copied())
                })
                .collect::<Result<Vec<_>>>()?;
            let p = ProjectionScheme::new(vars);
            p.check_domains(csp.domains())?;
            return Ok(p);
        }
        match self {
            Instance::Hypergraph { n, q, b, .. } => Ok(ProjectionScheme::uniform(
                *n,
                make_coloring_projection(*q, b.unwrap_or(1))?,
            )),
            _ => Ok(ProjectionScheme::identity(csp.domains(), Some(sym))),
        }
    }

    /// Identity map marking the special symbol.
    pub fn special(&self) -> Result<ProjectionScheme> {
        Ok(ProjectionScheme::identity(
            self.csp()?.domains(),
            Some(self.special_symbol()),
        ))
    }
}

/// Random k-uniform hypergraph with maximum degree at most `max_delta`,
/// built by rejection until `edges` edges are placed or attempts run out.
pub fn random_hypergraph<R: Rng>(
    n: usize,
    k: usize,
    max_delta: usize,
    edges: usize,
    rng: &mut R,
) -> Result<Hypergraph> {
    if k < 2 || k > n {
        return Err(Error::param(format!("need 2 <= k <= n, got k={k}, n={n}")));
    }
    if edges > 0 && max_delta == 0 {
        return Err(Error::param("edges requested with maximum degree 0"));
    }
    if edges * k > n * max_delta {
        return Err(Error::param(format!(
            "{edges} edges of size {k} cannot fit degree {max_delta} on {n} vertices"
        )));
    }
    let mut deg = vec![0usize; n];
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let verts: Vec<usize> = (0..n).collect();
    for _ in 0..edges * 200 {
        if out.len() == edges {
            break;
        }
        let free: Vec<usize> = verts
            .iter()
            .copied()
            .filter(|&v| deg[v] < max_delta)
            .collect();
        if free.len() < k {
            break;
        }
        let mut e: Vec<usize> = free.choose_multiple(rng, k).copied().collect();
        e.sort_unstable();
        if seen.insert(e.clone()) {
            for &v in &e {
                deg[v] += 1;
            }
            out.push(e);
        }
    }
    Hypergraph::new(n, k, out)
}

/// Linear hypertree: each new edge meets the existing ones in exactly one vertex.
pub fn random_hypertree<R: Rng>(k: usize, edges: usize, rng: &mut R) -> Result<Hypergraph> {
    if k < 2 {
        return Err(Error::param("need k >= 2"));
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut n = 0;
    for i in 0..edges {
        let mut e = Vec::with_capacity(k);
        if i > 0 {
            e.push(rng.gen_range(0..n));
        }
        while e.len() < k {
            e.push(n);
            n += 1;
        }
        out.push(e);
    }
    Hypergraph::new(n.max(if edges == 0 { 0 } else { k }), k, out)
}

/// Random k-CNF on n variables with every variable in at most `max_delta`
/// clauses and random signs.
pub fn random_cnf<R: Rng>(
    n: usize,
    k: usize,
    max_delta: usize,
    clauses: usize,
    rng: &mut R,
) -> Result<CnfFormula> {
    let h = random_hypergraph(n, k, max_delta, clauses, rng)?;
    if h.edges().len() < clauses {
        return Err(Error::param(format!(
            "only {} of {clauses} clauses could be placed",
            h.edges().len()
        )));
    }
    let cls = h
        .edges()
        .iter()
        .map(|e| Clause {
            vars: e.clone(),
            neg: (0..k).map(|_| rng.gen_bool(0.5)).collect(),
        })
        .collect();
    CnfFormula::new(n, k, cls)
}

/// Random atomic CSP: each constraint forbids one random tuple on k random variables.
pub fn random_atomic_csp<R: Rng>(
    domains: &[u32],
    k: usize,
    constraints: usize,
    rng: &mut R,
) -> Result<Csp> {
    let n = domains.len();
    if k == 0 || k > n {
        return Err(Error::param("need 1 <= k <= n"));
    }
    let verts: Vec<usize> = (0..n).collect();
    let cons = (0..constraints)
        .map(|_| {
            let mut vars: Vec<usize> = verts.choose_multiple(rng, k).copied().collect();
            vars.sort_unstable();
            let f = vars.iter().map(|&v| rng.gen_range(0..domains[v])).collect();
            Constraint {
                vars,
                forbidden: vec![f],
            }
        })
        .collect();
    Csp::new(domains.to_vec(), cons)
}

/// Random simple graph with maximum degree at most `max_degree`.
pub fn random_graph<R: Rng>(
    n: usize,
    max_degree: usize,
    edge_attempts: usize,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    if n < 2 {
        return adj;
    }
    for _ in 0..edge_attempts {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b || adj[a].contains(&b) || adj[a].len() >= max_degree || adj[b].len() >= max_degree
        {
            continue;
        }
        adj[a].push(b);
        adj[b].push(a);
    }
    for l in &mut adj {
        l.sort_unstable();
    }
    adj
}

/// Vertices reachable from `root`.
pub fn component_of(adj: &[Vec<usize>], root: usize) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..adj.len()).filter(|&v| seen[v]).collect()
}

/// A small coloring instance with its bucket count.
#[derive(Clone, Debug)]
pub struct TinyInstance {
    pub name: &'static str,
    pub h: Hypergraph,
    pub q: u32,
    pub b: u32,
}

impl TinyInstance {
    pub fn csp(&self) -> Csp {
        coloring_csp(&self.h, self.q).expect("tiny corpus is valid")
    }
    pub fn projection(&self) -> ProjectionScheme {
        ProjectionScheme::uniform(
            self.h.n(),
            make_coloring_projection(self.q, self.b).expect("tiny corpus is valid"),
        )
    }
    pub fn instance(&self) -> Instance {
        Instance::coloring(&self.h, self.q, Some(self.b))
    }
}

/// The standard tiny coloring corpus.
pub fn tiny_corpus() -> Vec<TinyInstance> {
    let h = |n, k, e: &[&[usize]]| {
        Hypergraph::new(n, k, e.iter().map(|x| x.to_vec()).collect()).expect("valid")
    };
    vec![
        TinyInstance {
            name: "two-edges-share-2",
            h: h(4, 3, &[&[0, 1, 2], &[1, 2, 3]]),
            q: 6,
            b: 2,
        },
        TinyInstance {
            name: "single-edge",
            h: h(3, 3, &[&[0, 1, 2]]),
            q: 6,
            b: 2,
        },
        TinyInstance {
            name: "two-edges-share-1",
            h: h(5, 3, &[&[0, 1, 2], &[2, 3, 4]]),
            q: 4,
            b: 1,
        },
        TinyInstance {
            name: "triangle",
            h: h(3, 2, &[&[0, 1], &[1, 2], &[0, 2]]),
            q: 4,
            b: 1,
        },
        TinyInstance {
            name: "disjoint-pair",
            h: h(6, 3, &[&[0, 1, 2], &[3, 4, 5]]),
            q: 3,
            b: 1,
        },
        TinyInstance {
            name: "sunflower",
            h: h(7, 3, &[&[0, 1, 2], &[0, 3, 4], &[0, 5, 6]]),
            q: 3,
            b: 1,
        },
        TinyInstance {
            name: "four-uniform-pair",
            h: h(6, 4, &[&[0, 1, 2, 3], &[2, 3, 4, 5]]),
            q: 4,
            b: 2,
        },
        TinyInstance {
            name: "three-cycle",
            h: h(6, 3, &[&[0, 1, 2], &[2, 3, 4], &[4, 5, 0]]),
            q: 3,
            b: 1,
        },
    ]
}
