//! Exact partition polynomials, Gibbs and projected measures, and exact
//! marginals. Everything else in the crate is tested against this layer.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Constraint, Csp, Hypergraph, Level, MixedRadix, ProjectionScheme};
use crate::poly::{binomial_shift, PartitionPolynomial, PolyVar};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

const CHUNK: u64 = 1 << 14;

/// Visit every assignment of the product space in parallel chunks and fold
/// per-chunk accumulators together. Merging must be associative.
pub(crate) fn par_enumerate<A, I, V, M>(
    domains: &[u32],
    budget: u64,
    what: &str,
    init: I,
    visit: V,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    V: Fn(&mut A, &[u32]) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let radix =
        MixedRadix::new(domains).map_err(|_| Error::budget(what, space_size(domains), budget))?;
    let total = radix.total();
    if total > budget {
        return Err(Error::budget(what, total as f64, budget));
    }
    let chunks = total.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .map(|ci| {
            let start = ci * CHUNK;
            let end = total.min(start + CHUNK);
            let mut a = radix.decode(start);
            let mut acc = init();
            for _ in start..end {
                visit(&mut acc, &a);
                radix.advance(&mut a);
            }
            acc
        })
        .reduce(&init, &merge))
}

pub(crate) fn space_size(domains: &[u32]) -> f64 {
    domains.iter().map(|&d| d as f64).product()
}

fn add_vecs(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// `is_one[v][a]`: whether symbol `a` of variable `v` lands in the special bucket.
pub(crate) fn special_table(proj: &ProjectionScheme) -> Vec<Vec<bool>> {
    proj.vars()
        .iter()
        .map(|p| p.map.iter().map(|&b| p.one == Some(b)).collect())
        .collect()
}

#[inline]
fn special_count(table: &[Vec<bool>], a: &[u32]) -> usize {
    a.iter().zip(table).filter(|(&x, t)| t[x as usize]).count()
}

/// Coefficient `m` counts satisfying assignments with exactly `m` variables
/// in the special bucket.
pub fn brute_force_partition_poly(
    csp: &Csp,
    special: &ProjectionScheme,
) -> Result<PartitionPolynomial> {
    brute_force_partition_poly_with_budget(csp, special, DEFAULT_BUDGET)
}

pub fn brute_force_partition_poly_with_budget(
    csp: &Csp,
    special: &ProjectionScheme,
    budget: u64,
) -> Result<PartitionPolynomial> {
    special.check_domains(csp.domains())?;
    let table = special_table(special);
    let n = csp.n();
    let counts = par_enumerate(
        csp.domains(),
        budget,
        "brute-force partition polynomial",
        || vec![0u64; n + 1],
        |acc, a| {
            if csp.is_satisfied(a) {
                acc[special_count(&table, a)] += 1;
            }
        },
        add_vecs,
    )?;
    Ok(PartitionPolynomial::from_u64(&counts, PolyVar::Lambda))
}

/// Product over connected components, each solved by enumeration; free
/// variables contribute their closed form `(#special)·λ + (#other)`.
pub fn factorized_partition_poly(
    csp: &Csp,
    special: &ProjectionScheme,
) -> Result<PartitionPolynomial> {
    factorized_partition_poly_with_budget(csp, special, DEFAULT_BUDGET)
}

pub fn factorized_partition_poly_with_budget(
    csp: &Csp,
    special: &ProjectionScheme,
    budget: u64,
) -> Result<PartitionPolynomial> {
    special.check_domains(csp.domains())?;
    let table = special_table(special);
    let mut acc = PartitionPolynomial::one(PolyVar::Lambda);
    for (ci, (vars, cons)) in csp.components().into_iter().enumerate() {
        let factor = if cons.is_empty() {
            let ones = table[vars[0]].iter().filter(|&&b| b).count() as u64;
            let rest = table[vars[0]].len() as u64 - ones;
            PartitionPolynomial::from_u64(&[rest, ones], PolyVar::Lambda)
        } else {
            let sub = csp.restrict(&vars, &cons);
            let sub_proj =
                ProjectionScheme::new(vars.iter().map(|&v| special.var(v).clone()).collect());
            brute_force_partition_poly_with_budget(&sub, &sub_proj, budget).map_err(
                |e| match e {
                    Error::Budget { needed, budget, .. } => Error::budget(
                        format!("component {ci} ({} variables)", vars.len()),
                        needed,
                        budget,
                    ),
                    other => other,
                },
            )?
        };
        acc = acc.mul(&factor);
    }
    Ok(acc)
}

/// `(λ + q − 1)^k − λ^k − (q − 1)`: one hyperedge with color 0 special.
pub fn single_edge_closed_form(k: u32, q: u32) -> Result<PartitionPolynomial> {
    if k < 2 || q < 2 {
        return Err(Error::param(format!("need k, q >= 2, got k={k}, q={q}")));
    }
    let qm1 = BigInt::from(q - 1);
    let mut c = binomial_shift(k, &qm1);
    c[k as usize] -= 1;
    c[0] -= &qm1;
    PartitionPolynomial::new(c, PolyVar::Lambda)
}

/// Satisfying-assignment counts per projected configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectedCounts {
    pub radix: MixedRadix,
    pub counts: Vec<BigUint>,
    /// Number of special buckets in each projected configuration.
    pub ones: Vec<u32>,
    proj: ProjectionScheme,
}

fn ones_per_state(radix: &MixedRadix, proj: &ProjectionScheme) -> Vec<u32> {
    let mut a = vec![0; proj.n()];
    (0..radix.total())
        .map(|_| {
            let m = a
                .iter()
                .enumerate()
                .filter(|(v, &b)| proj.is_one(*v, b))
                .count() as u32;
            radix.advance(&mut a);
            m
        })
        .collect()
}

impl ProjectedCounts {
    pub fn from_counts(proj: &ProjectionScheme, counts: Vec<BigUint>) -> Result<Self> {
        let radix = MixedRadix::new(&proj.bucket_counts())?;
        if counts.len() as u64 != radix.total() {
            return Err(Error::invalid(
                "count vector does not match projected space",
            ));
        }
        let ones = ones_per_state(&radix, proj);
        Ok(Self {
            radix,
            counts,
            ones,
            proj: proj.clone(),
        })
    }

    pub fn projection(&self) -> &ProjectionScheme {
        &self.proj
    }

    pub fn polynomial(&self) -> PartitionPolynomial {
        let mut c = vec![BigInt::zero(); self.proj.n() + 1];
        for (n, &m) in self.counts.iter().zip(&self.ones) {
            c[m as usize] += BigInt::from(n.clone());
        }
        PartitionPolynomial::new(c, PolyVar::Lambda).expect("counts are nonnegative")
    }

    pub fn is_extendable(&self, state: u64) -> bool {
        !self.counts[state as usize].is_zero()
    }

    /// The projected measure ψ at a complex external field.
    pub fn measure(&self, lam: Complex64) -> Result<ComplexMeasure> {
        if self.polynomial().vanishes_at(lam) {
            return Err(Error::ZeroPartition(format!("Z({lam}) = 0")));
        }
        let w: Vec<Complex64> = self
            .counts
            .iter()
            .zip(&self.ones)
            .map(|(n, &m)| {
                if n.is_zero() {
                    Complex64::zero()
                } else {
                    lam.powu(m) * n.to_f64().unwrap_or(f64::INFINITY)
                }
            })
            .collect();
        let z: Complex64 = w.iter().sum();
        Ok(ComplexMeasure {
            radix: self.radix.clone(),
            values: w.into_iter().map(|x| x / z).collect(),
        })
    }

    /// ψ in exact rationals, for rational λ.
    pub fn measure_rational(&self, lam: &BigRational) -> Result<Vec<BigRational>> {
        let z = self.polynomial().eval_rational(lam);
        if z.is_zero() {
            return Err(Error::ZeroPartition(format!("Z({lam}) = 0")));
        }
        Ok(self
            .counts
            .iter()
            .zip(&self.ones)
            .map(|(n, &m)| {
                BigRational::from_integer(BigInt::from(n.clone()))
                    * num_traits::pow(lam.clone(), m as usize)
                    / &z
            })
            .collect())
    }

    /// Conditional marginal ψ_v^τ on the buckets of `v`, where τ is the
    /// context of `state` off `v`. The common factor λ^{m(τ)} cancels, so
    /// only the special bucket of `v` carries λ. `Ok(None)` when τ is not
    /// extendable; an error when it is but the denominator vanishes.
    pub fn conditional(
        &self,
        v: usize,
        state: u64,
        lam: Complex64,
    ) -> Result<Option<Vec<Complex64>>> {
        let stride = self.radix.stride(v);
        let base = state - self.radix.digit(state, v) as u64 * stride;
        let d = self.radix.dims()[v];
        let cell = |x: u32| &self.counts[(base + x as u64 * stride) as usize];
        if (0..d).all(|x| cell(x).is_zero()) {
            return Ok(None);
        }
        let mut c0 = BigInt::zero();
        let mut c1 = BigInt::zero();
        let mut w = Vec::with_capacity(d as usize);
        for x in 0..d {
            let n = cell(x);
            let nf = n.to_f64().unwrap_or(f64::INFINITY);
            if self.proj.is_one(v, x) {
                c1 += BigInt::from(n.clone());
                w.push(lam * nf);
            } else {
                c0 += BigInt::from(n.clone());
                w.push(Complex64::new(nf, 0.0));
            }
        }
        let den = PartitionPolynomial::new(vec![c0, c1], PolyVar::Lambda).expect("nonnegative");
        if den.vanishes_at(lam) {
            return Err(Error::Undefined(format!(
                "marginal on variable {v} vanishes under the pinning of state {state}"
            )));
        }
        let z: Complex64 = w.iter().sum();
        Ok(Some(w.into_iter().map(|x| x / z).collect()))
    }
}

/// Counts by enumerating the original space.
pub fn projected_counts(
    csp: &Csp,
    proj: &ProjectionScheme,
    budget: u64,
) -> Result<ProjectedCounts> {
    let (all, _) = projected_counts_split(csp, None, proj, budget)?;
    Ok(all)
}

/// Counts of solutions of `base`, and of those that also violate `extra`.
pub fn projected_counts_split(
    base: &Csp,
    extra: Option<&Constraint>,
    proj: &ProjectionScheme,
    budget: u64,
) -> Result<(ProjectedCounts, Vec<BigUint>)> {
    proj.check_domains(base.domains())?;
    let radix = MixedRadix::new(&proj.bucket_counts())?;
    let states = radix.total() as usize;
    if states as u64 > budget {
        return Err(Error::budget("projected space", states as f64, budget));
    }
    let strides: Vec<u64> = (0..proj.n()).map(|v| radix.stride(v)).collect();
    let (all, viol) = par_enumerate(
        base.domains(),
        budget,
        "projected counts",
        || (vec![0u64; states], vec![0u64; states]),
        |acc, a| {
            if base.is_satisfied(a) {
                let idx: u64 = a
                    .iter()
                    .enumerate()
                    .map(|(v, &x)| proj.bucket_of(v, x) as u64 * strides[v])
                    .sum();
                acc.0[idx as usize] += 1;
                if extra.is_some_and(|c| c.is_violated(a)) {
                    acc.1[idx as usize] += 1;
                }
            }
        },
        |a, b| (add_vecs(a.0, b.0), add_vecs(a.1, b.1)),
    )?;
    let counts = all.into_iter().map(BigUint::from).collect();
    Ok((
        ProjectedCounts::from_counts(proj, counts)?,
        viol.into_iter().map(BigUint::from).collect(),
    ))
}

/// Proper list-coloring count for hypergraph coloring with lists given by
/// bucket preimages, by inclusion–exclusion over bucket-monochromatic edges.
pub fn projected_counts_coloring(
    h: &Hypergraph,
    proj: &ProjectionScheme,
    budget: u64,
) -> Result<ProjectedCounts> {
    if proj.n() != h.n() {
        return Err(Error::invalid(
            "projection and hypergraph disagree on vertex count",
        ));
    }
    let radix = MixedRadix::new(&proj.bucket_counts())?;
    let states = radix.total();
    let preimages: Vec<Vec<Vec<u32>>> = proj
        .vars()
        .iter()
        .map(|p| (0..p.buckets).map(|b| p.preimage(b)).collect())
        .collect();
    let mut counts = Vec::with_capacity(states as usize);
    let mut a = vec![0u32; h.n()];
    let mut work: u64 = 0;
    for _ in 0..states {
        let lists: Vec<&[u32]> = a
            .iter()
            .enumerate()
            .map(|(v, &b)| preimages[v][b as usize].as_slice())
            .collect();
        let mono: Vec<&Vec<usize>> = h
            .edges()
            .iter()
            .filter(|e| !intersect_lists(e.iter().map(|&v| lists[v])).is_empty())
            .collect();
        if mono.len() > 30 {
            return Err(Error::budget(
                "inclusion-exclusion over edges",
                2f64.powi(mono.len() as i32),
                1 << 30,
            ));
        }
        work += 1 << mono.len();
        if work > budget {
            return Err(Error::budget(
                "inclusion-exclusion over edges",
                work as f64,
                budget,
            ));
        }
        let mut total = BigInt::zero();
        for mask in 0u64..(1u64 << mono.len()) {
            let mut parent: Vec<usize> = (0..h.n()).collect();
            for (i, e) in mono.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for w in e.windows(2) {
                        let (x, y) = (root(&mut parent, w[0]), root(&mut parent, w[1]));
                        if x != y {
                            parent[x] = y;
                        }
                    }
                }
            }
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); h.n()];
            for v in 0..h.n() {
                let r = root(&mut parent, v);
                groups[r].push(v);
            }
            let mut term = BigInt::one();
            for g in groups.iter().filter(|g| !g.is_empty()) {
                let size = intersect_lists(g.iter().map(|&v| lists[v])).len();
                term *= size;
                if size == 0 {
                    break;
                }
            }
            if mask.count_ones() % 2 == 1 {
                total -= term;
            } else {
                total += term;
            }
        }
        counts.push(
            total
                .to_biguint()
                .expect("inclusion-exclusion count is nonnegative"),
        );
        radix.advance(&mut a);
    }
    ProjectedCounts::from_counts(proj, counts)
}

fn root(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

fn intersect_lists<'a>(mut lists: impl Iterator<Item = &'a [u32]>) -> Vec<u32> {
    let mut acc: Vec<u32> = match lists.next() {
        Some(l) => l.to_vec(),
        None => return Vec::new(),
    };
    for l in lists {
        acc.retain(|x| l.binary_search(x).is_ok());
        if acc.is_empty() {
            break;
        }
    }
    acc
}

/// Complex-valued vector over a mixed-radix configuration space.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMeasure {
    pub radix: MixedRadix,
    pub values: Vec<Complex64>,
}

impl ComplexMeasure {
    pub fn point_mass(radix: &MixedRadix, state: u64) -> Self {
        let mut values = vec![Complex64::zero(); radix.total() as usize];
        values[state as usize] = Complex64::one();
        Self {
            radix: radix.clone(),
            values,
        }
    }

    pub fn total(&self) -> Complex64 {
        self.values.iter().sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.total() - 1.0).norm() <= tol
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .sum()
    }

    pub fn support(&self) -> Vec<u64> {
        (0..self.values.len() as u64)
            .filter(|&i| self.values[i as usize] != Complex64::zero())
            .collect()
    }

    pub fn event(&self, pred: impl Fn(&[u32]) -> bool) -> Complex64 {
        let mut a = vec![0; self.radix.dims().len()];
        let mut acc = Complex64::zero();
        for x in &self.values {
            if pred(&a) {
                acc += x;
            }
            self.radix.advance(&mut a);
        }
        acc
    }
}

/// μ(σ) = λ^{m(σ)}/Z over the original space, zero off the solutions.
pub fn gibbs_measure(
    csp: &Csp,
    special: &ProjectionScheme,
    lam: Complex64,
) -> Result<ComplexMeasure> {
    let table = special_table(special);
    let radix = MixedRadix::new(csp.domains())?;
    if radix.total() > DEFAULT_BUDGET {
        return Err(Error::budget(
            "Gibbs measure",
            radix.total() as f64,
            DEFAULT_BUDGET,
        ));
    }
    let poly = brute_force_partition_poly(csp, special)?;
    if poly.vanishes_at(lam) {
        return Err(Error::ZeroPartition(format!("Z({lam}) = 0")));
    }
    let mut a = vec![0; csp.n()];
    let mut values = Vec::with_capacity(radix.total() as usize);
    for _ in 0..radix.total() {
        values.push(if csp.is_satisfied(&a) {
            lam.powu(special_count(&table, &a) as u32)
        } else {
            Complex64::zero()
        });
        radix.advance(&mut a);
    }
    let z: Complex64 = values.iter().sum();
    values.iter_mut().for_each(|x| *x /= z);
    Ok(ComplexMeasure { radix, values })
}

/// Pushforward of the Gibbs measure under the projection.
pub fn projected_measure(
    csp: &Csp,
    proj: &ProjectionScheme,
    lam: Complex64,
) -> Result<ComplexMeasure> {
    projected_counts(csp, proj, DEFAULT_BUDGET)?.measure(lam)
}

/// Exact law of the special count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution {
    #[serde(with = "rational_vec")]
    pub probs: Vec<BigRational>,
    #[serde(with = "rational")]
    pub mean: BigRational,
    #[serde(with = "rational")]
    pub variance: BigRational,
}

impl ExactDistribution {
    pub fn new(probs: Vec<BigRational>) -> Result<Self> {
        let total: BigRational = probs.iter().sum();
        if total != BigRational::one() {
            return Err(Error::invalid("probabilities do not sum to 1"));
        }
        let mut mean = BigRational::zero();
        let mut second = BigRational::zero();
        for (m, p) in probs.iter().enumerate() {
            let x = BigRational::from_integer(BigInt::from(m));
            mean += &x * p;
            second += &x * &x * p;
        }
        let variance = second - &mean * &mean;
        Ok(Self {
            probs,
            mean,
            variance,
        })
    }

    pub fn cdf(&self) -> Vec<BigRational> {
        let mut acc = BigRational::zero();
        self.probs
            .iter()
            .map(|p| {
                acc += p;
                acc.clone()
            })
            .collect()
    }

    /// CSV rows `m,numerator,denominator`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,numerator,denominator\n");
        for (m, p) in self.probs.iter().enumerate() {
            s.push_str(&format!("{m},{},{}\n", p.numer(), p.denom()));
        }
        s
    }
}

mod rational {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod rational_vec {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        x.iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// P(X = m) = c_m λ^m / Z(λ) for a positive rational λ.
pub fn exact_law_of_special_count(
    poly: &PartitionPolynomial,
    lam: &BigRational,
) -> Result<ExactDistribution> {
    if *lam <= BigRational::zero() {
        return Err(Error::param("external field must be positive"));
    }
    let z = poly.eval_rational(lam);
    if z.is_zero() {
        return Err(Error::ZeroPartition("Z(λ) = 0".into()));
    }
    let mut pow = BigRational::one();
    let mut probs = Vec::with_capacity(poly.coeffs().len());
    for c in poly.coeffs() {
        probs.push(BigRational::from_integer(c.clone()) * &pow / &z);
        pow *= lam;
    }
    ExactDistribution::new(probs)
}

/// A partial assignment pinned at either level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialAssignment {
    pub values: Vec<Option<u32>>,
    pub level: Level,
}

impl PartialAssignment {
    pub fn empty(n: usize, level: Level) -> Self {
        Self {
            values: vec![None; n],
            level,
        }
    }

    pub fn with(mut self, v: usize, x: u32) -> Self {
        self.values[v] = Some(x);
        self
    }

    fn admits(&self, proj: &ProjectionScheme, a: &[u32]) -> bool {
        self.values
            .iter()
            .zip(a)
            .enumerate()
            .all(|(v, (p, &x))| match (p, self.level) {
                (None, _) => true,
                (Some(y), Level::Original) => *y == x,
                (Some(y), Level::Projected) => proj.bucket_of(v, x) == *y,
            })
    }
}

/// Events for conditional marginals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    Whole,
    VarIs { var: usize, value: u32 },
    VarInBucket { var: usize, bucket: u32 },
    VarSpecial { var: usize },
    Violates(Constraint),
}

impl Event {
    pub fn holds(&self, proj: &ProjectionScheme, a: &[u32]) -> bool {
        match self {
            Event::Whole => true,
            Event::VarIs { var, value } => a[*var] == *value,
            Event::VarInBucket { var, bucket } => proj.bucket_of(*var, a[*var]) == *bucket,
            Event::VarSpecial { var } => proj.is_one(*var, proj.bucket_of(*var, a[*var])),
            Event::Violates(c) => c.is_violated(a),
        }
    }

    /// Parse `whole`, `var:V=A`, `bucket:V=B`, `special:V`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::param(format!("unrecognised event {s:?}"));
        let pair = |t: &str| -> Result<(usize, u32)> {
            let (a, b) = t.split_once('=').ok_or_else(bad)?;
            Ok((
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ))
        };
        if s == "whole" {
            Ok(Event::Whole)
        } else if let Some(t) = s.strip_prefix("var:") {
            let (var, value) = pair(t)?;
            Ok(Event::VarIs { var, value })
        } else if let Some(t) = s.strip_prefix("bucket:") {
            let (var, bucket) = pair(t)?;
            Ok(Event::VarInBucket { var, bucket })
        } else if let Some(t) = s.strip_prefix("special:") {
            Ok(Event::VarSpecial {
                var: t.trim().parse().map_err(|_| bad())?,
            })
        } else {
            Err(bad())
        }
    }
}

/// Exact μ(event | pin) by enumeration. Numerator and denominator are
/// integer polynomials in λ, so a zero-measure pin is detected exactly.
pub fn conditional_marginal(
    csp: &Csp,
    special: &ProjectionScheme,
    lam: Complex64,
    pin: &PartialAssignment,
    event: &Event,
) -> Result<Complex64> {
    let (num, den) = conditional_polys(csp, special, pin, event, DEFAULT_BUDGET)?;
    if den.vanishes_at(lam) {
        return Err(Error::ZeroPartition(
            "conditioning on a zero-measure event".into(),
        ));
    }
    Ok(num.eval_c64(lam) / den.eval_c64(lam))
}

/// Exact μ(event | pin) at rational λ.
pub fn conditional_marginal_rational(
    csp: &Csp,
    special: &ProjectionScheme,
    lam: &BigRational,
    pin: &PartialAssignment,
    event: &Event,
) -> Result<BigRational> {
    let (num, den) = conditional_polys(csp, special, pin, event, DEFAULT_BUDGET)?;
    let d = den.eval_rational(lam);
    if d.is_zero() {
        return Err(Error::ZeroPartition(
            "conditioning on a zero-measure event".into(),
        ));
    }
    Ok(num.eval_rational(lam) / d)
}

fn conditional_polys(
    csp: &Csp,
    special: &ProjectionScheme,
    pin: &PartialAssignment,
    event: &Event,
    budget: u64,
) -> Result<(PartitionPolynomial, PartitionPolynomial)> {
    special.check_domains(csp.domains())?;
    if pin.values.len() != csp.n() {
        return Err(Error::invalid("pin length differs from variable count"));
    }
    let table = special_table(special);
    let n = csp.n();
    let (num, den) = par_enumerate(
        csp.domains(),
        budget,
        "conditional marginal",
        || (vec![0u64; n + 1], vec![0u64; n + 1]),
        |acc, a| {
            if pin.admits(special, a) && csp.is_satisfied(a) {
                let m = special_count(&table, a);
                acc.1[m] += 1;
                if event.holds(special, a) {
                    acc.0[m] += 1;
                }
            }
        },
        |a, b| (add_vecs(a.0, b.0), add_vecs(a.1, b.1)),
    )?;
    Ok((
        PartitionPolynomial::from_u64(&num, PolyVar::Lambda),
        PartitionPolynomial::from_u64(&den, PolyVar::Lambda),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{coloring_csp, coloring_to_atomic_csp, make_coloring_projection};

    fn one_special(n: usize, q: u32) -> ProjectionScheme {
        ProjectionScheme::identity(&vec![q; n], Some(0))
    }

    #[test]
    fn single_edge_q3() {
        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let csp = coloring_to_atomic_csp(&h, 3).unwrap();
        let p = brute_force_partition_poly(&csp, &one_special(3, 3)).unwrap();
        assert_eq!(
            p,
            PartitionPolynomial::from_u64(&[6, 12, 6], PolyVar::Lambda)
        );
        assert_eq!(single_edge_closed_form(3, 3).unwrap(), p);
    }

    #[test]
    fn single_edge_q2() {
        let h = Hypergraph::new(2, 2, vec![vec![0, 1]]).unwrap();
        let csp = coloring_to_atomic_csp(&h, 2).unwrap();
        let p = brute_force_partition_poly(&csp, &one_special(2, 2)).unwrap();
        assert_eq!(p, PartitionPolynomial::from_u64(&[0, 2], PolyVar::Lambda));
        assert_eq!(single_edge_closed_form(2, 2).unwrap(), p);
    }

    #[test]
    fn no_constraints() {
        let csp = Csp::new(vec![3], vec![]).unwrap();
        let p = brute_force_partition_poly(&csp, &one_special(1, 3)).unwrap();
        assert_eq!(p, PartitionPolynomial::from_u64(&[2, 1], PolyVar::Lambda));
    }

    #[test]
    fn factorized_matches() {
        let h = Hypergraph::new(4, 3, vec![vec![0, 1, 2]]).unwrap();
        let csp = coloring_csp(&h, 3).unwrap();
        let p = factorized_partition_poly(&csp, &one_special(4, 3)).unwrap();
        let expect = PartitionPolynomial::from_u64(&[6, 12, 6], PolyVar::Lambda)
            .mul(&PartitionPolynomial::from_u64(&[2, 1], PolyVar::Lambda));
        assert_eq!(p, expect);
        assert_eq!(
            brute_force_partition_poly(&csp, &one_special(4, 3)).unwrap(),
            expect
        );

        let h = Hypergraph::disjoint_edges(3, 2);
        let csp = coloring_csp(&h, 3).unwrap();
        let e = PartitionPolynomial::from_u64(&[6, 12, 6], PolyVar::Lambda);
        assert_eq!(
            factorized_partition_poly(&csp, &one_special(6, 3)).unwrap(),
            e.pow(2)
        );
    }

    #[test]
    fn closed_form_k50() {
        let p = single_edge_closed_form(50, 700).unwrap();
        assert_eq!(p.degree(), Some(49));
        let expect = BigInt::from(700).pow(50) - 1 - 699;
        assert_eq!(p.total(), expect);
    }

    #[test]
    fn budget_error() {
        let csp = Csp::new(vec![10; 9], vec![]).unwrap();
        let e =
            brute_force_partition_poly_with_budget(&csp, &one_special(9, 10), 1000).unwrap_err();
        assert!(matches!(e, Error::Budget { .. }));
    }

    #[test]
    fn gibbs_single_edge() {
        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let csp = coloring_csp(&h, 3).unwrap();
        let mu = gibbs_measure(&csp, &one_special(3, 3), Complex64::new(1.0, 0.0)).unwrap();
        assert!(mu.is_normalized(1e-12));
        let no_one = mu.event(|a| a.iter().all(|&x| x != 0));
        assert!((no_one - 6.0 / 24.0).norm() < 1e-14);
        let e = gibbs_measure(&csp, &one_special(3, 3), Complex64::new(-1.0, 0.0)).unwrap_err();
        assert!(matches!(e, Error::ZeroPartition(_)));
    }

    #[test]
    fn projected_identity_and_collapse() {
        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let csp = coloring_csp(&h, 3).unwrap();
        let lam = Complex64::new(0.7, 0.2);
        let id = one_special(3, 3);
        let psi = projected_measure(&csp, &id, lam).unwrap();
        let mu = gibbs_measure(&csp, &id, lam).unwrap();
        assert!(psi.l1_distance(&mu) < 1e-14);
        let all = ProjectionScheme::collapse(csp.domains());
        let psi = projected_measure(&csp, &all, lam).unwrap();
        assert_eq!(psi.values.len(), 1);
        assert!((psi.values[0] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn two_edge_q6_projection() {
        let h = Hypergraph::new(4, 3, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        let csp = coloring_csp(&h, 6).unwrap();
        let proj = ProjectionScheme::uniform(4, make_coloring_projection(6, 2).unwrap());
        let counts = projected_counts(&csp, &proj, DEFAULT_BUDGET).unwrap();
        assert_eq!(counts.counts.len(), 81);
        let ie = projected_counts_coloring(&h, &proj, DEFAULT_BUDGET).unwrap();
        assert_eq!(counts, ie);
        let psi = counts.measure(Complex64::new(1.0, 0.0)).unwrap();
        assert!(psi.values.iter().all(|x| x.im == 0.0 && x.re >= 0.0));
        // spot check against direct count: all four vertices in bucket 2 = {colors 2,4}
        let state = counts.radix.encode(&[2, 2, 2, 2]);
        // 2^4 colorings of {2,4}, minus those with an edge monochromatic
        // edges {0,1,2},{1,2,3}: mono first: 2*2, mono second: 2*2, both: 2
        assert_eq!(
            counts.counts[state as usize],
            BigUint::from(16u32 - 4 - 4 + 2)
        );
    }

    #[test]
    fn law_single_edge() {
        let p = PartitionPolynomial::from_u64(&[6, 12, 6], PolyVar::Lambda);
        let d = exact_law_of_special_count(&p, &BigRational::one()).unwrap();
        let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(d.probs, vec![q(1, 4), q(1, 2), q(1, 4)]);
        assert_eq!(d.mean, q(1, 1));
        assert_eq!(d.variance, q(1, 2));
        let d = exact_law_of_special_count(&p.pow(5), &BigRational::one()).unwrap();
        assert_eq!(d.mean, q(5, 1));
        assert_eq!(d.variance, q(5, 2));
    }

    #[test]
    fn conditional_single_edge() {
        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let csp = coloring_csp(&h, 3).unwrap();
        let sp = one_special(3, 3);
        let pin = PartialAssignment::empty(3, Level::Original).with(0, 0);
        let r = conditional_marginal_rational(
            &csp,
            &sp,
            &BigRational::one(),
            &pin,
            &Event::VarIs { var: 1, value: 0 },
        )
        .unwrap();
        // 9 completions minus the monochromatic one; v1 = 0 in 3 of them, one excluded
        assert_eq!(r, BigRational::new(2.into(), 8.into()));
        let w =
            conditional_marginal(&csp, &sp, Complex64::new(1.0, 0.0), &pin, &Event::Whole).unwrap();
        assert!((w - 1.0).norm() < 1e-15);
        let impossible = PartialAssignment::empty(3, Level::Original)
            .with(0, 0)
            .with(1, 0)
            .with(2, 0);
        assert!(conditional_marginal(
            &csp,
            &sp,
            Complex64::new(1.0, 0.0),
            &impossible,
            &Event::Whole
        )
        .is_err());
    }
}
