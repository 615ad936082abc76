//! Complex systematic-scan Glauber dynamics on the projected space, run as
//! exact propagation of dense measures, plus the combinatorial structures
//! used to analyse it.

mod cluster;
mod twotree;
mod witness;

pub use cluster::{
    bad_cluster, verify_conditional_interval, BadCluster, LiftingGroup, LiftingReport,
};
pub use twotree::{construct_2tree, count_2trees, graph_max_degree, two_tree_count_bound, TwoTree};
pub use witness::{
    bad_component, check_trace_reconstruction, reconstruct_bad_cluster, sample_decomposed_trace,
    BadComponent, DecomposedTrace, NodeKind, WitnessGraph, WitnessNode,
};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::DecompositionScheme;
use crate::error::{Error, Result};
use crate::exact::{ComplexMeasure, ProjectedCounts};

/// Largest projected space for which dense kernel matrices are built.
pub const DENSE_KERNEL_LIMIT: u64 = 4096;

/// Systematic scan over `n` variables: time `t` updates variable `t mod n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSchedule {
    pub n: usize,
}

impl ScanSchedule {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("schedule over zero variables"));
        }
        Ok(Self { n })
    }

    pub fn var(&self, t: i64) -> usize {
        t.rem_euclid(self.n as i64) as usize
    }

    /// Last time `<= t` at which `u` was updated.
    pub fn pred(&self, u: usize, t: i64) -> i64 {
        t - (t - u as i64).rem_euclid(self.n as i64)
    }

    /// Sorted timestamps of the latest updates of `vars` up to `t`.
    pub fn ts(&self, vars: &[usize], t: i64) -> Vec<i64> {
        let mut out: Vec<i64> = vars.iter().map(|&v| self.pred(v, t)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Row {
    Defined(Vec<Complex64>),
    /// Context with no extension; unreachable from feasible states.
    Infeasible,
    /// The conditional denominator vanishes at λ.
    Undefined,
}

/// Heat-bath conditionals ψ_v^τ for every variable and every context,
/// computed once from exact counts.
#[derive(Clone, Debug)]
pub struct HeatBath {
    counts: ProjectedCounts,
    lam: Complex64,
    psi: ComplexMeasure,
    /// `bases[v]`: states whose digit at `v` is 0.
    bases: Vec<Vec<u64>>,
    rows: Vec<Vec<Row>>,
}

impl HeatBath {
    pub fn new(counts: &ProjectedCounts, lam: Complex64) -> Result<Self> {
        let psi = counts.measure(lam)?;
        let radix = &counts.radix;
        let n = radix.dims().len();
        let mut bases = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        for v in 0..n {
            let b: Vec<u64> = (0..radix.total())
                .filter(|&s| radix.digit(s, v) == 0)
                .collect();
            let r = b
                .par_iter()
                .map(|&s| match counts.conditional(v, s, lam) {
                    Ok(Some(row)) => Row::Defined(row),
                    Ok(None) => Row::Infeasible,
                    Err(_) => Row::Undefined,
                })
                .collect();
            bases.push(b);
            rows.push(r);
        }
        Ok(Self {
            counts: counts.clone(),
            lam,
            psi,
            bases,
            rows,
        })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lam
    }
    pub fn psi(&self) -> &ComplexMeasure {
        &self.psi
    }
    pub fn counts(&self) -> &ProjectedCounts {
        &self.counts
    }
    pub fn n(&self) -> usize {
        self.bases.len()
    }

    fn base_index(&self, v: usize, base: u64) -> usize {
        // bases[v] is sorted, so locate by binary search
        self.bases[v].binary_search(&base).expect("base state")
    }

    /// ψ_v^τ for the context of `state` off `v`.
    pub fn row(&self, v: usize, state: u64) -> Result<Option<&[Complex64]>> {
        let radix = &self.counts.radix;
        let base = state - radix.digit(state, v) as u64 * radix.stride(v);
        match &self.rows[v][self.base_index(v, base)] {
            Row::Defined(r) => Ok(Some(r)),
            Row::Infeasible => Ok(None),
            Row::Undefined => Err(undefined(v, &radix.decode(base))),
        }
    }

    /// μ ↦ μP for the heat-bath update of variable `v`.
    pub fn apply(&self, mu: &ComplexMeasure, v: usize) -> Result<ComplexMeasure> {
        let radix = &self.counts.radix;
        let stride = radix.stride(v);
        let d = radix.dims()[v] as u64;
        let blocks: Vec<Result<Option<Vec<Complex64>>>> = self.bases[v]
            .par_iter()
            .zip(&self.rows[v])
            .map(|(&base, row)| {
                let mass: Complex64 = (0..d)
                    .map(|x| mu.values[(base + x * stride) as usize])
                    .sum();
                if mass.is_zero() {
                    return Ok(None);
                }
                match row {
                    Row::Defined(r) => Ok(Some(r.iter().map(|p| mass * p).collect())),
                    Row::Infeasible => Err(Error::Undefined(format!(
                        "mass on unextendable context of variable {v} at {:?}",
                        radix.decode(base)
                    ))),
                    Row::Undefined => Err(undefined(v, &radix.decode(base))),
                }
            })
            .collect();
        let mut out = vec![Complex64::zero(); mu.values.len()];
        for (&base, blk) in self.bases[v].iter().zip(blocks) {
            if let Some(vals) = blk? {
                for (x, val) in vals.into_iter().enumerate() {
                    out[(base + x as u64 * stride) as usize] = val;
                }
            }
        }
        Ok(ComplexMeasure {
            radix: radix.clone(),
            values: out,
        })
    }

    /// ‖ψP_v − ψ‖₁ for each variable.
    pub fn stationarity_residuals(&self) -> Result<Vec<f64>> {
        (0..self.n())
            .map(|v| Ok(self.apply(&self.psi, v)?.l1_distance(&self.psi)))
            .collect()
    }

    /// A feasible state of least index, a convenient start for point masses.
    pub fn first_feasible(&self) -> Option<u64> {
        (0..self.counts.radix.total()).find(|&s| self.counts.is_extendable(s))
    }
}

fn undefined(v: usize, ctx: &[u32]) -> Error {
    Error::Undefined(format!(
        "conditional of variable {v} undefined in context {ctx:?}"
    ))
}

/// Dense heat-bath matrix at one time step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionKernel {
    pub t: i64,
    pub var: usize,
    pub rows: Vec<Vec<Complex64>>,
}

impl TransitionKernel {
    pub fn max_row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().sum::<Complex64>() - 1.0).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, mu: &ComplexMeasure) -> ComplexMeasure {
        let mut out = vec![Complex64::zero(); mu.values.len()];
        for (m, row) in mu.values.iter().zip(&self.rows) {
            if m.is_zero() {
                continue;
            }
            for (o, p) in out.iter_mut().zip(row) {
                *o += m * p;
            }
        }
        ComplexMeasure {
            radix: mu.radix.clone(),
            values: out,
        }
    }
}

/// P_t(σ,τ) = ψ_v^{σ(V∖v)}(τ_v). Rows of unextendable contexts hold σ fixed.
pub fn heat_bath_kernel(
    hb: &HeatBath,
    schedule: &ScanSchedule,
    t: i64,
) -> Result<TransitionKernel> {
    let radix = &hb.counts.radix;
    let total = radix.total();
    if total > DENSE_KERNEL_LIMIT {
        return Err(Error::budget(
            "dense kernel",
            total as f64,
            DENSE_KERNEL_LIMIT,
        ));
    }
    let v = schedule.var(t);
    let stride = radix.stride(v);
    let mut rows = Vec::with_capacity(total as usize);
    for s in 0..total {
        let mut row = vec![Complex64::zero(); total as usize];
        match hb.row(v, s)? {
            Some(r) => {
                let base = s - radix.digit(s, v) as u64 * stride;
                for (x, p) in r.iter().enumerate() {
                    row[(base + x as u64 * stride) as usize] = *p;
                }
            }
            None => row[s as usize] = Complex64::new(1.0, 0.0),
        }
        rows.push(row);
    }
    Ok(TransitionKernel { t, var: v, rows })
}

/// μ_0 P_1 ⋯ P_{nT}.
pub fn propagate(initial: &ComplexMeasure, hb: &HeatBath, sweeps: usize) -> Result<ComplexMeasure> {
    let schedule = ScanSchedule::new(hb.n())?;
    let mut mu = initial.clone();
    for t in 1..=(sweeps * hb.n()) as i64 {
        mu = hb.apply(&mu, schedule.var(t))?;
    }
    Ok(mu)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub lambda: Complex64,
    pub sweeps: usize,
    pub start_state: Vec<u32>,
    pub stationarity: Vec<f64>,
    pub max_stationarity: f64,
    /// ‖μ_T − ψ‖₁ after each sweep.
    pub distances: Vec<f64>,
    pub normalization_error: f64,
}

/// Point-mass start at the first feasible state, with the distance to ψ
/// recorded after every sweep.
pub fn convergence_run(hb: &HeatBath, sweeps: usize) -> Result<ConvergenceReport> {
    let start = hb
        .first_feasible()
        .ok_or_else(|| Error::invalid("formula has no solutions"))?;
    let radix = &hb.counts.radix;
    let stationarity = hb.stationarity_residuals()?;
    let mut mu = ComplexMeasure::point_mass(radix, start);
    let mut distances = Vec::with_capacity(sweeps);
    let mut norm_err: f64 = 0.0;
    for _ in 0..sweeps {
        mu = propagate(&mu, hb, 1)?;
        norm_err = norm_err.max((mu.total() - 1.0).norm());
        distances.push(mu.l1_distance(&hb.psi));
    }
    Ok(ConvergenceReport {
        lambda: hb.lam,
        sweeps,
        start_state: radix.decode(start),
        max_stationarity: stationarity.iter().copied().fold(0.0, f64::max),
        stationarity,
        distances,
        normalization_error: norm_err,
    })
}

/// One b-decomposed update.
#[derive(Clone, Debug, PartialEq)]
pub struct DecomposedStep {
    pub measure: ComplexMeasure,
    /// The oblivious branch measure r_t: one entry per bucket, then ⊥.
    pub oblivious: Vec<Complex64>,
    /// Total mass routed through the adaptive branch.
    pub adaptive_mass: Complex64,
    /// max |b + b(⊥)ψ^{τ,⊥} − ψ^τ| over the rows that carried mass.
    pub max_split_error: f64,
}

/// ψ^{τ,⊥} = (ψ^τ − b)/b(⊥), with 0·∞ = 0 when b(⊥) = 0.
pub fn adaptive_row(
    row: &[Complex64],
    b: &[Complex64],
    bottom: Complex64,
) -> Option<Vec<Complex64>> {
    if bottom.is_zero() {
        return None;
    }
    Some(row.iter().zip(b).map(|(p, bx)| (p - bx) / bottom).collect())
}

pub fn decomposed_step(
    mu: &ComplexMeasure,
    hb: &HeatBath,
    scheme: &DecompositionScheme,
    t: i64,
) -> Result<DecomposedStep> {
    scheme.check_projection(hb.counts.projection())?;
    let radix = &hb.counts.radix;
    let v = ScanSchedule::new(hb.n())?.var(t);
    let dec = &scheme.vars[v];
    let stride = radix.stride(v);
    let d = radix.dims()[v] as u64;
    let mut out = vec![Complex64::zero(); mu.values.len()];
    let mut adaptive_mass = Complex64::zero();
    let mut err: f64 = 0.0;
    for &base in &hb.bases[v] {
        let mass: Complex64 = (0..d)
            .map(|x| mu.values[(base + x * stride) as usize])
            .sum();
        if mass.is_zero() {
            continue;
        }
        let row = hb.row(v, base)?.ok_or_else(|| {
            Error::Undefined(format!(
                "mass on unextendable context of variable {v} at {:?}",
                radix.decode(base)
            ))
        })?;
        let adaptive = adaptive_row(row, &dec.b, dec.bottom);
        adaptive_mass += mass * dec.bottom;
        for x in 0..d as usize {
            let a = adaptive
                .as_ref()
                .map_or(Complex64::zero(), |r| dec.bottom * r[x]);
            let p = dec.b[x] + a;
            err = err.max((p - row[x]).norm());
            out[(base + x as u64 * stride) as usize] = mass * p;
        }
    }
    let mut oblivious = dec.b.clone();
    oblivious.push(dec.bottom);
    Ok(DecomposedStep {
        measure: ComplexMeasure {
            radix: radix.clone(),
            values: out,
        },
        oblivious,
        adaptive_mass,
        max_split_error: err,
    })
}

/// Checks b + b(⊥)·ψ^{τ,⊥} = ψ^τ exactly in rationals for every variable and
/// every extendable context. `b` lists the bucket values then b(⊥), the same
/// for every variable.
pub fn decomposition_identity_rational(
    counts: &ProjectedCounts,
    lam: &BigRational,
    b: &[BigRational],
) -> Result<bool> {
    let radix = &counts.radix;
    let proj = counts.projection();
    let (bottom, buckets) = b
        .split_last()
        .ok_or_else(|| Error::param("empty decomposition"))?;
    for v in 0..radix.dims().len() {
        let d = radix.dims()[v];
        if buckets.len() != d as usize {
            return Err(Error::invalid(
                "decomposition does not match the projection",
            ));
        }
        let stride = radix.stride(v);
        for base in (0..radix.total()).filter(|&s| radix.digit(s, v) == 0) {
            let w: Vec<BigRational> = (0..d)
                .map(|x| {
                    let n = BigRational::from_integer(
                        counts.counts[(base + x as u64 * stride) as usize]
                            .clone()
                            .into(),
                    );
                    if proj.is_one(v, x) {
                        n * lam
                    } else {
                        n
                    }
                })
                .collect();
            let z: BigRational = w.iter().sum();
            if z.is_zero() {
                continue;
            }
            for (x, wx) in w.iter().enumerate() {
                let psi = wx / &z;
                let rebuilt = if bottom.is_zero() {
                    buckets[x].clone()
                } else {
                    let adaptive = (&psi - &buckets[x]) / bottom;
                    &buckets[x] + bottom * adaptive
                };
                if rebuilt != psi {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{
        build_coloring_decomposition, coloring_decomposition_rational, ColoringParams,
    };
    use crate::exact::{projected_counts_coloring, DEFAULT_BUDGET};
    use crate::model::{make_coloring_projection, Hypergraph, ProjectionScheme};

    fn two_edge(lam: Complex64) -> HeatBath {
        let h = Hypergraph::new(4, 3, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        let proj = ProjectionScheme::uniform(4, make_coloring_projection(6, 2).unwrap());
        let counts = projected_counts_coloring(&h, &proj, DEFAULT_BUDGET).unwrap();
        HeatBath::new(&counts, lam).unwrap()
    }

    #[test]
    fn schedule() {
        let s = ScanSchedule::new(4).unwrap();
        assert_eq!(s.var(-1), 3);
        assert_eq!(s.pred(2, 0), -2);
        assert_eq!(s.pred(0, 0), 0);
        assert_eq!(s.pred(3, 7), 7);
        for t in -20..20 {
            for u in 0..4 {
                let p = s.pred(u, t);
                assert!(p <= t && p > t - 4 && s.var(p) == u);
            }
        }
        assert_eq!(s.ts(&[0, 1, 2], 0), vec![-3, -2, 0]);
    }

    #[test]
    fn real_kernel_is_stochastic_and_stationary() {
        let hb = two_edge(Complex64::new(1.0, 0.0));
        let sched = ScanSchedule::new(4).unwrap();
        for t in 0..4 {
            let k = heat_bath_kernel(&hb, &sched, t).unwrap();
            assert!(k.max_row_sum_error() < 1e-14);
            assert!(k.rows.iter().flatten().all(|p| p.im == 0.0 && p.re >= 0.0));
            assert!(k.apply(hb.psi()).l1_distance(hb.psi()) < 1e-14);
        }
    }

    #[test]
    fn product_measure_kernel() {
        let h = Hypergraph::new(2, 3, vec![]).unwrap();
        let proj = ProjectionScheme::uniform(2, make_coloring_projection(4, 1).unwrap());
        let counts = projected_counts_coloring(&h, &proj, DEFAULT_BUDGET).unwrap();
        let lam = Complex64::new(0.3, 0.2);
        let hb = HeatBath::new(&counts, lam).unwrap();
        let r = hb.row(0, 0).unwrap().unwrap();
        assert!((r[0] - lam / (lam + 3.0)).norm() < 1e-15);
        assert!(hb
            .stationarity_residuals()
            .unwrap()
            .iter()
            .all(|&x| x < 1e-15));
    }

    #[test]
    fn undefined_conditional_errors() {
        // one vertex, q=2, B=1: the marginal denominator is 1 + λ
        let h = Hypergraph::new(2, 2, vec![]).unwrap();
        let proj = ProjectionScheme::uniform(2, make_coloring_projection(2, 1).unwrap());
        let counts = projected_counts_coloring(&h, &proj, DEFAULT_BUDGET).unwrap();
        // Z = (1+λ)², so ψ itself is undefined at -1
        assert!(HeatBath::new(&counts, Complex64::new(-1.0, 0.0)).is_err());
    }

    #[test]
    fn propagation_converges() {
        for lam in [
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.01),
            Complex64::new(0.5, -0.01),
        ] {
            let hb = two_edge(lam);
            let start = ComplexMeasure::point_mass(&hb.counts.radix, hb.first_feasible().unwrap());
            assert_eq!(propagate(&start, &hb, 0).unwrap(), start);
            let mu = propagate(&start, &hb, 100).unwrap();
            assert!(mu.l1_distance(hb.psi()) < 1e-8, "{lam}");
            assert!((mu.total() - 1.0).norm() < 1e-12);
            let fixed = propagate(hb.psi(), &hb, 3).unwrap();
            assert!(fixed.l1_distance(hb.psi()) < 1e-12);
        }
    }

    #[test]
    fn decomposed_step_matches_heat_bath() {
        let lam = Complex64::new(1.0, 0.001);
        let hb = two_edge(lam);
        let p = ColoringParams::new(3, 2, 6, 2, 1.0).unwrap();
        let scheme = build_coloring_decomposition(&p, 4, lam).unwrap();
        let mut mu = ComplexMeasure::point_mass(&hb.counts.radix, hb.first_feasible().unwrap());
        for t in 1..=12 {
            let step = decomposed_step(&mu, &hb, &scheme, t).unwrap();
            let direct = hb.apply(&mu, ScanSchedule::new(4).unwrap().var(t)).unwrap();
            assert!(step.max_split_error < 1e-14);
            assert!(step.measure.l1_distance(&direct) < 1e-14);
            assert!((step.oblivious.iter().sum::<Complex64>() - 1.0).norm() < 1e-14);
            mu = step.measure;
        }
        let b = coloring_decomposition_rational(&p, &BigRational::from_integer(1.into())).unwrap();
        assert!(decomposition_identity_rational(
            hb.counts(),
            &BigRational::from_integer(1.into()),
            &b
        )
        .unwrap());
    }

    #[test]
    fn oblivious_only_scheme_gives_product_dynamics() {
        // b(⊥)=0 with b equal to the marginal of an unconstrained instance
        let h = Hypergraph::new(2, 3, vec![]).unwrap();
        let proj = ProjectionScheme::uniform(2, make_coloring_projection(4, 1).unwrap());
        let counts = projected_counts_coloring(&h, &proj, DEFAULT_BUDGET).unwrap();
        let lam = Complex64::new(1.0, 0.0);
        let hb = HeatBath::new(&counts, lam).unwrap();
        let b = vec![Complex64::new(0.25, 0.0), Complex64::new(0.75, 0.0)];
        let scheme = DecompositionScheme {
            tag: crate::conditions::SchemeTag::Custom,
            vars: vec![
                crate::conditions::VarDecomposition {
                    b,
                    bottom: Complex64::zero()
                };
                2
            ],
            warnings: vec![],
        };
        let start = ComplexMeasure::point_mass(&hb.counts.radix, 0);
        let s1 = decomposed_step(&start, &hb, &scheme, 0).unwrap();
        let s2 = decomposed_step(&s1.measure, &hb, &scheme, 1).unwrap();
        assert!(s2.measure.l1_distance(hb.psi()) < 1e-15);
        assert_eq!(s2.adaptive_mass, Complex64::zero());
    }
}
