use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{par_enumerate, special_table, PartialAssignment, DEFAULT_BUDGET};
use crate::model::{Csp, Level, ProjectionScheme};
use crate::poly::{PartitionPolynomial, PolyVar};

/// Constraints around c* that the projected assignment leaves unsatisfied,
/// with that assignment restricted to their variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadCluster {
    pub constraints: Vec<usize>,
    pub assignment: PartialAssignment,
}

impl BadCluster {
    pub fn empty(n: usize) -> Self {
        Self {
            constraints: Vec::new(),
            assignment: PartialAssignment::empty(n, Level::Projected),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub(crate) fn from_set(csp: &Csp, set: BTreeSet<usize>, value: impl Fn(usize) -> u32) -> Self {
        let mut assignment = PartialAssignment::empty(csp.n(), Level::Projected);
        for &c in &set {
            for &v in &csp.constraints()[c].vars {
                assignment.values[v] = Some(value(v));
            }
        }
        Self {
            constraints: set.into_iter().collect(),
            assignment,
        }
    }
}

/// Connected component of c* among the constraints not satisfied by the
/// projected assignment `sigma`; empty when c* itself is satisfied.
pub fn bad_cluster(sigma: &[u32], csp: &Csp, proj: &ProjectionScheme, c_star: usize) -> BadCluster {
    let cons = csp.constraints();
    let bad = |c: usize| !cons[c].satisfied_projected(proj, sigma);
    if !bad(c_star) {
        return BadCluster::empty(csp.n());
    }
    let occ = csp.occurrences();
    let mut seen = BTreeSet::from([c_star]);
    let mut queue = VecDeque::from([c_star]);
    while let Some(c) = queue.pop_front() {
        for &v in &cons[c].vars {
            for &d in &occ[v] {
                if !seen.contains(&d) && bad(d) {
                    seen.insert(d);
                    queue.push_back(d);
                }
            }
        }
    }
    BadCluster::from_set(csp, seen, |v| sigma[v])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftingGroup {
    pub cluster: Vec<usize>,
    pub tau: Vec<Option<u32>>,
    /// ψ(S^bad = S ∧ τ).
    pub measure: Complex64,
    /// μ(c* violated | S^bad = S ∧ τ), absent on zero-measure groups.
    pub conditional: Option<Complex64>,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftingReport {
    pub c_star: usize,
    pub lambda: Complex64,
    pub groups: Vec<LiftingGroup>,
    pub zero_measure_groups: usize,
    pub max_imag: f64,
    /// Σ |ψ(S^bad = S ∧ τ)| over nonempty S.
    pub lifting_sum: f64,
    /// |μ(c* violated)|.
    pub violation_abs: f64,
    pub violations: Vec<String>,
    pub pass: bool,
}

const LIFT_TOL: f64 = 1e-12;

/// Groups the solutions of C ∖ {c*} by their bad cluster (S, τ) and checks
/// that each conditional probability of violating c* is a real number in
/// [0,1], or that zero-measure groups carry no violating mass.
pub fn verify_conditional_interval(
    csp: &Csp,
    proj: &ProjectionScheme,
    lam: Complex64,
    c_star: usize,
) -> Result<LiftingReport> {
    proj.check_domains(csp.domains())?;
    if c_star >= csp.constraints().len() {
        return Err(Error::param(format!("c* = {c_star} is not a constraint")));
    }
    let base = csp.without(c_star);
    let star = &csp.constraints()[c_star];
    let table = special_table(proj);
    let n = csp.n();
    type Groups = BTreeMap<(Vec<usize>, Vec<Option<u32>>), (Vec<u64>, Vec<u64>)>;
    let groups: Groups = par_enumerate(
        csp.domains(),
        DEFAULT_BUDGET,
        "lifting check",
        Groups::new,
        |acc, a| {
            if !base.is_satisfied(a) {
                return;
            }
            let sigma: Vec<u32> = a
                .iter()
                .enumerate()
                .map(|(v, &x)| proj.bucket_of(v, x))
                .collect();
            let cl = bad_cluster(&sigma, csp, proj, c_star);
            let m = a.iter().zip(&table).filter(|(&x, t)| t[x as usize]).count();
            let e = acc
                .entry((cl.constraints, cl.assignment.values))
                .or_insert_with(|| (vec![0; n + 1], vec![0; n + 1]));
            e.0[m] += 1;
            if star.is_violated(a) {
                e.1[m] += 1;
            }
        },
        |mut a, b| {
            for (k, (x, y)) in b {
                let e = a
                    .entry(k)
                    .or_insert_with(|| (vec![0; n + 1], vec![0; n + 1]));
                for (p, q) in e.0.iter_mut().zip(x) {
                    *p += q;
                }
                for (p, q) in e.1.iter_mut().zip(y) {
                    *p += q;
                }
            }
            a
        },
    )?;

    let mut z_coeffs = vec![0u64; n + 1];
    for (all, _) in groups.values() {
        for (z, c) in z_coeffs.iter_mut().zip(all) {
            *z += c;
        }
    }
    let z_poly = PartitionPolynomial::from_u64(&z_coeffs, PolyVar::Lambda);
    if z_poly.vanishes_at(lam) {
        return Err(Error::ZeroPartition(format!("Z({lam}) = 0 without c*")));
    }
    let z = z_poly.eval_c64(lam);

    let mut out = Vec::with_capacity(groups.len());
    let (mut zero_groups, mut max_imag, mut lifting_sum) = (0, 0.0f64, 0.0);
    let mut violating = Complex64::new(0.0, 0.0);
    let mut violations = Vec::new();
    for ((cluster, tau), (all, viol)) in groups {
        let a1 = PartitionPolynomial::from_u64(&all, PolyVar::Lambda);
        let a2 = PartitionPolynomial::from_u64(&viol, PolyVar::Lambda);
        let measure = a1.eval_c64(lam) / z;
        violating += a2.eval_c64(lam) / z;
        if !cluster.is_empty() {
            lifting_sum += measure.norm();
        }
        let (conditional, ok) = if a1.vanishes_at(lam) {
            zero_groups += 1;
            (None, a2.vanishes_at(lam))
        } else {
            let r = a2.eval_c64(lam) / a1.eval_c64(lam);
            max_imag = max_imag.max(r.im.abs());
            (
                Some(r),
                r.im.abs() <= LIFT_TOL && r.re >= -LIFT_TOL && r.re <= 1.0 + LIFT_TOL,
            )
        };
        if !ok {
            violations.push(format!(
                "group S={cluster:?} tau={tau:?}: conditional {conditional:?}"
            ));
        }
        out.push(LiftingGroup {
            cluster,
            tau,
            measure,
            conditional,
            ok,
        });
    }
    let violation_abs = violating.norm();
    if violation_abs > lifting_sum + LIFT_TOL {
        violations.push(format!(
            "|mu(c* violated)| = {violation_abs} exceeds lifting sum {lifting_sum}"
        ));
    }
    Ok(LiftingReport {
        c_star,
        lambda: lam,
        groups: out,
        zero_measure_groups: zero_groups,
        max_imag,
        lifting_sum,
        violation_abs,
        pass: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{coloring_csp, make_coloring_projection, Hypergraph};

    fn two_edge() -> (Csp, ProjectionScheme) {
        let h = Hypergraph::new(4, 3, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        (
            coloring_csp(&h, 6).unwrap(),
            ProjectionScheme::uniform(4, make_coloring_projection(6, 2).unwrap()),
        )
    }

    #[test]
    fn clusters_on_two_edges() {
        let (csp, proj) = two_edge();
        assert!(bad_cluster(&[0, 1, 2, 1], &csp, &proj, 0).is_empty());
        let both = bad_cluster(&[1, 1, 1, 1], &csp, &proj, 0);
        assert_eq!(both.constraints, vec![0, 1]);
        assert_eq!(both.assignment.values, vec![Some(1); 4]);
        let one = bad_cluster(&[1, 1, 1, 2], &csp, &proj, 0);
        assert_eq!(one.constraints, vec![0]);
        assert_eq!(one.assignment.values[3], None);
    }

    #[test]
    fn lifting_real_and_complex() {
        let (csp, proj) = two_edge();
        for lam in [
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 1.0 / 3888.0),
            Complex64::new(0.5, -0.01),
        ] {
            for c_star in 0..2 {
                let r = verify_conditional_interval(&csp, &proj, lam, c_star).unwrap();
                assert!(r.pass, "{:?}", r.violations);
                assert!(r.groups.len() > 1);
                assert!(r.violation_abs <= r.lifting_sum + 1e-12);
            }
        }
    }
}
