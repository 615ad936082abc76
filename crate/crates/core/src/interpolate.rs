//! Fisher zeros: the violation-penalty partition polynomial, its reduction
//! to an external-field polynomial, and a truncated cluster expansion of
//! ln Z^fs(1 + x) evaluated at x = −1 as an approximate counter.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{factorized_partition_poly_with_budget, par_enumerate, DEFAULT_BUDGET};
use crate::model::{Constraint, Csp, ProjectionScheme, VarProjection};
use crate::poly::{mul_coeffs, to_rug_int, trim, PartitionPolynomial, PolyVar};

/// Coefficient j counts assignments violating exactly j constraints.
pub fn fisher_partition_poly(csp: &Csp) -> Result<PartitionPolynomial> {
    fisher_partition_poly_with_budget(csp, DEFAULT_BUDGET)
}

pub fn fisher_partition_poly_with_budget(csp: &Csp, budget: u64) -> Result<PartitionPolynomial> {
    let m = csp.constraints().len();
    let counts = par_enumerate(
        csp.domains(),
        budget,
        "Fisher polynomial",
        || vec![0u64; m + 1],
        |acc, a| acc[csp.violated_count(a)] += 1,
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )?;
    Ok(PartitionPolynomial::from_u64(&counts, PolyVar::Beta))
}

/// Φ′: each constraint gains a fresh binary variable that must be 1
/// whenever the original constraint is violated. The field λ = β/(1−β)
/// weighs the fresh variables set to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedInstance {
    pub csp: Csp,
    pub special: ProjectionScheme,
    /// Index of the first fresh variable; fresh variable `i` belongs to constraint `i`.
    pub first_new: usize,
    pub lambda: Option<Complex64>,
}

/// The structural reduction, independent of β.
pub fn fisher_reduce_structure(csp: &Csp) -> Result<ReducedInstance> {
    let n = csp.n();
    let mut domains = csp.domains().to_vec();
    domains.extend(std::iter::repeat_n(2, csp.constraints().len()));
    let constraints = csp
        .constraints()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut vars = c.vars.clone();
            vars.push(n + i);
            let forbidden = c
                .forbidden
                .iter()
                .map(|f| {
                    let mut f = f.clone();
                    f.push(0);
                    f
                })
                .collect();
            Constraint { vars, forbidden }
        })
        .collect();
    let reduced = Csp::new(domains, constraints)?;
    let mut vars: Vec<VarProjection> = csp
        .domains()
        .iter()
        .map(|&q| VarProjection::identity(q, None))
        .collect();
    vars.extend(std::iter::repeat_n(
        VarProjection::identity(2, Some(1)),
        csp.constraints().len(),
    ));
    Ok(ReducedInstance {
        csp: reduced,
        special: ProjectionScheme::new(vars),
        first_new: n,
        lambda: None,
    })
}

pub fn fisher_reduce(csp: &Csp, beta: Complex64) -> Result<ReducedInstance> {
    if beta == Complex64::one() {
        return Err(Error::param("the reduction needs beta != 1"));
    }
    let mut r = fisher_reduce_structure(csp)?;
    r.lambda = Some(beta / (Complex64::one() - beta));
    Ok(r)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionReport {
    pub constraints: usize,
    /// Σ_j L_j β^j (1−β)^{|C|−j} equals the Fisher polynomial coefficientwise.
    pub exact_identity: bool,
    pub fisher: Vec<String>,
    pub lee_yang: Vec<String>,
    pub beta: Option<Complex64>,
    pub lhs: Option<Complex64>,
    pub rhs: Option<Complex64>,
    /// |lhs − rhs| / max(1, |lhs|), both sides evaluated at 256 bits.
    pub rel_error: Option<f64>,
}

/// Checks Z^fs(Φ, β) = (1−β)^{|C|}·Z^ly(Φ′, β/(1−β)), exactly as
/// polynomials, and numerically at `beta` when given.
pub fn verify_reduction_identity(csp: &Csp, beta: Option<Complex64>) -> Result<ReductionReport> {
    let m = csp.constraints().len();
    let fisher = fisher_partition_poly(csp)?;
    let red = fisher_reduce_structure(csp)?;
    let ly = factorized_partition_poly_with_budget(&red.csp, &red.special, DEFAULT_BUDGET)?;
    if ly.degree().unwrap_or(0) > m {
        return Err(Error::invalid("reduced polynomial exceeds degree |C|"));
    }
    let mut combined = vec![BigInt::zero(); m + 1];
    let one_minus: [BigInt; 2] = [BigInt::one(), -BigInt::one()];
    for (j, lj) in ly.coeffs().iter().enumerate() {
        let mut term = vec![BigInt::zero(); j];
        term.push(lj.clone());
        for _ in j..m {
            term = mul_coeffs(&term, &one_minus);
        }
        for (c, t) in combined.iter_mut().zip(term) {
            *c += t;
        }
    }
    trim(&mut combined);
    let exact_identity = combined == fisher.coeffs();
    let (lhs, rhs, rel_error) = match beta {
        Some(b) => {
            fisher_reduce(csp, b)?;
            let bm = rug::Complex::with_val(EVAL_PRECISION, (b.re, b.im));
            let one_minus_b = rug::Complex::with_val(EVAL_PRECISION, 1 - &bm);
            let lam = rug::Complex::with_val(EVAL_PRECISION, &bm / &one_minus_b);
            let lhs = fisher.eval_mp(&bm);
            let rhs =
                rug::Complex::with_val(EVAL_PRECISION, rug::ops::Pow::pow(&one_minus_b, m as u32))
                    * ly.eval_mp(&lam);
            let diff = rug::Complex::with_val(EVAL_PRECISION, &lhs - &rhs)
                .abs()
                .real()
                .to_f64();
            let scale = rug::Complex::with_val(EVAL_PRECISION, lhs.abs_ref())
                .real()
                .to_f64()
                .max(1.0);
            let c64 = |z: &rug::Complex| Complex64::new(z.real().to_f64(), z.imag().to_f64());
            (Some(c64(&lhs)), Some(c64(&rhs)), Some(diff / scale))
        }
        None => (None, None, None),
    };
    Ok(ReductionReport {
        constraints: m,
        exact_identity,
        fisher: fisher.to_decimal_strings(),
        lee_yang: ly.to_decimal_strings(),
        beta,
        lhs,
        rhs,
        rel_error,
    })
}

const EVAL_PRECISION: u32 = 256;

pub const MAX_ORDER: usize = 10;

/// Taylor coefficients of Z^fs(1 + x): a_j sums, over j-sets S of
/// constraints, the number of assignments violating all of S.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSeries {
    #[serde(with = "biguint_strings")]
    pub coeffs: Vec<BigUint>,
    pub order: usize,
}

mod biguint_strings {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(x.iter().map(ToString::to_string))
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Assignments of the variables of `set` violating every constraint in it.
fn violating_all(csp: &Csp, set: &[usize]) -> BigUint {
    let cons = csp.constraints();
    if set.iter().all(|&c| cons[c].is_atomic()) {
        // each variable is pinned by every constraint mentioning it
        let mut pin: HashMap<usize, u32> = HashMap::new();
        for &c in set {
            for (&v, &x) in cons[c].vars.iter().zip(&cons[c].forbidden[0]) {
                if *pin.entry(v).or_insert(x) != x {
                    return BigUint::zero();
                }
            }
        }
        return BigUint::one();
    }
    let mut vars: Vec<usize> = set
        .iter()
        .flat_map(|&c| cons[c].vars.iter().copied())
        .collect();
    vars.sort_unstable();
    vars.dedup();
    let sub = csp.restrict(&vars, set);
    let mut a = vec![0; vars.len()];
    let radix = crate::model::MixedRadix::new(sub.domains()).expect("small support");
    let mut count = 0u64;
    loop {
        if sub.constraints().iter().all(|c| c.is_violated(&a)) {
            count += 1;
        }
        if !radix.advance(&mut a) {
            break;
        }
    }
    BigUint::from(count)
}

/// Splits a constraint set into its connected pieces.
fn pieces(adj: &[Vec<usize>], set: &[usize]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = set.to_vec();
    let mut out = Vec::new();
    while let Some(start) = left.pop() {
        let mut piece = vec![start];
        let mut i = 0;
        while i < piece.len() {
            let c = piece[i];
            left.retain(|&d| {
                if adj[c].contains(&d) {
                    piece.push(d);
                    false
                } else {
                    true
                }
            });
            i += 1;
        }
        piece.sort_unstable();
        out.push(piece);
    }
    out
}

/// Series by enumeration of constraint subsets up to size `order`, each
/// split into connected pieces with memoised per-piece counts.
pub fn cluster_series(csp: &Csp, order: usize) -> Result<ClusterSeries> {
    if order > MAX_ORDER {
        return Err(Error::param(format!(
            "order {order} exceeds the limit {MAX_ORDER}"
        )));
    }
    let m = csp.constraints().len();
    let subsets: f64 = (0..=order.min(m)).map(|j| binom_f64(m, j)).sum();
    if subsets > DEFAULT_BUDGET as f64 {
        return Err(Error::budget(
            "cluster series subsets",
            subsets,
            DEFAULT_BUDGET,
        ));
    }
    let adj = csp.dependency_graph();
    let domain_product = |vars: &mut dyn Iterator<Item = usize>| -> BigUint {
        vars.map(|v| BigUint::from(csp.domains()[v])).product()
    };
    let mut memo: HashMap<Vec<usize>, BigUint> = HashMap::new();
    let mut coeffs = vec![domain_product(&mut (0..csp.n()))];
    for j in 1..=order {
        let mut total = BigUint::zero();
        if j <= m {
            let mut idx: Vec<usize> = (0..j).collect();
            loop {
                let mut covered = vec![false; csp.n()];
                for &c in &idx {
                    for &v in &csp.constraints()[c].vars {
                        covered[v] = true;
                    }
                }
                let mut term = domain_product(&mut (0..csp.n()).filter(|&v| !covered[v]));
                for p in pieces(&adj, &idx) {
                    let val = memo
                        .entry(p.clone())
                        .or_insert_with(|| violating_all(csp, &p))
                        .clone();
                    term *= val;
                    if term.is_zero() {
                        break;
                    }
                }
                total += term;
                if !next_combination(&mut idx, m) {
                    break;
                }
            }
        }
        coeffs.push(total);
    }
    Ok(ClusterSeries { coeffs, order })
}

fn binom_f64(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// a_j = Σ_m C(m, j) f_m from the Fisher coefficients f.
pub fn binomial_transform(fisher: &PartitionPolynomial, order: usize) -> Vec<BigUint> {
    (0..=order)
        .map(|j| {
            let mut s = BigInt::zero();
            for (m, f) in fisher.coeffs().iter().enumerate() {
                if m >= j {
                    s += f * binom_big(m, j);
                }
            }
            s.to_biguint().expect("nonnegative")
        })
        .collect()
}

fn binom_big(n: usize, k: usize) -> BigInt {
    let mut b = BigInt::one();
    for i in 0..k {
        b = b * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    b
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogCountEstimate {
    /// Estimates of ln Z^fs(0) truncated at orders 0..=J.
    pub estimates: Vec<f64>,
    pub exact: Option<f64>,
    /// |estimate − exact| at each order, evaluated at 256 bits.
    pub errors: Option<Vec<f64>>,
}

impl LogCountEstimate {
    pub fn estimate(&self) -> f64 {
        *self.estimates.last().expect("order 0 always present")
    }

    /// Errors do not increase over the last three orders and drop overall.
    pub fn last_three_decreasing(&self) -> Option<bool> {
        let e = self.errors.as_ref()?;
        if e.len() < 3 {
            return None;
        }
        // a log coefficient can vanish exactly, repeating the error once
        let t = &e[e.len() - 3..];
        Some(t[0] >= t[1] && t[1] >= t[2] && t[0] > t[2])
    }
}

/// Formal logarithm of the series divided by a_0, summed at x = −1.
/// `exact` is |Ω_Φ| = Z^fs(0) when known.
pub fn truncated_log_count(
    series: &ClusterSeries,
    order: usize,
    exact: Option<&BigUint>,
) -> Result<LogCountEstimate> {
    let a0 = series
        .coeffs
        .first()
        .filter(|a| !a.is_zero())
        .ok_or_else(|| Error::param("a_0 must be positive"))?;
    if order > series.order {
        return Err(Error::param(format!(
            "series only has order {}",
            series.order
        )));
    }
    let a0r = BigRational::from_integer(BigInt::from(a0.clone()));
    let g: Vec<BigRational> = series
        .coeffs
        .iter()
        .map(|a| BigRational::from_integer(BigInt::from(a.clone())) / &a0r)
        .collect();
    let mut ell: Vec<BigRational> = vec![BigRational::zero()];
    for j in 1..=order {
        let mut s = BigRational::zero();
        for i in 1..j {
            s += BigRational::from_integer(BigInt::from(i)) * &ell[i] * &g[j - i];
        }
        ell.push(&g[j] - s / BigRational::from_integer(BigInt::from(j)));
    }
    const PREC: u32 = 256;
    let to_float = |x: &BigRational| {
        let mut f = Float::with_val(PREC, to_rug_int(x.numer()));
        f /= to_rug_int(x.denom());
        f
    };
    let ln_a0 = Float::with_val(PREC, to_rug_int(&BigInt::from(a0.clone()))).ln();
    let ln_exact = exact
        .filter(|e| !e.is_zero())
        .map(|e| Float::with_val(PREC, to_rug_int(&BigInt::from(e.clone()))).ln());
    let mut partial = BigRational::zero();
    let mut estimates = Vec::with_capacity(order + 1);
    let mut errors = Vec::with_capacity(order + 1);
    for (j, l) in ell.iter().enumerate() {
        if j % 2 == 1 {
            partial -= l;
        } else {
            partial += l;
        }
        let est = Float::with_val(PREC, &ln_a0 + to_float(&partial));
        if let Some(e) = &ln_exact {
            errors.push(Float::with_val(PREC, &est - e).abs().to_f64());
        }
        estimates.push(est.to_f64());
    }
    Ok(LogCountEstimate {
        estimates,
        exact: ln_exact.as_ref().map(Float::to_f64),
        errors: ln_exact.map(|_| errors),
    })
}

/// Exact |Ω_Φ| from the Fisher polynomial's constant term.
pub fn solution_count(fisher: &PartitionPolynomial) -> BigUint {
    fisher
        .coeffs()
        .first()
        .and_then(|c| (!c.is_negative()).then(|| c.to_biguint()))
        .flatten()
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{coloring_csp, coloring_to_atomic_csp, Hypergraph};

    fn edge(k: usize, q: u32) -> Csp {
        coloring_to_atomic_csp(&Hypergraph::new(k, k, vec![(0..k).collect()]).unwrap(), q).unwrap()
    }

    #[test]
    fn fisher_small() {
        let p = fisher_partition_poly(&edge(2, 2)).unwrap();
        assert_eq!(p, PartitionPolynomial::from_u64(&[2, 2], PolyVar::Beta));
        let free = Csp::new(vec![3, 3], vec![]).unwrap();
        assert_eq!(
            fisher_partition_poly(&free).unwrap(),
            PartitionPolynomial::from_u64(&[9], PolyVar::Beta)
        );
        let p = fisher_partition_poly(&edge(3, 3)).unwrap();
        assert_eq!(p, PartitionPolynomial::from_u64(&[24, 3], PolyVar::Beta));
    }

    #[test]
    fn reduction() {
        let c = edge(2, 2);
        let r = fisher_reduce(&c, Complex64::new(0.5, 0.0)).unwrap();
        assert_eq!(r.csp.n(), 4);
        assert!(r.csp.constraints().iter().all(|c| c.vars.len() == 3));
        assert_eq!(r.lambda, Some(Complex64::new(1.0, 0.0)));
        assert!(fisher_reduce(&c, Complex64::new(1.0, 0.0)).is_err());
        let rep = verify_reduction_identity(&c, Some(Complex64::new(0.3, 0.2))).unwrap();
        assert!(rep.exact_identity);
        assert!(rep.rel_error.unwrap() < 1e-12);
        // at β = 0 the reduced polynomial's constant term is the solution count
        assert_eq!(rep.lee_yang[0], rep.fisher[0]);
        let h = Hypergraph::new(4, 3, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        assert!(
            verify_reduction_identity(
                &coloring_csp(&h, 3).unwrap(),
                Some(Complex64::new(-0.4, 0.9))
            )
            .unwrap()
            .exact_identity
        );
    }

    #[test]
    fn series_matches_binomial_transform() {
        let c = edge(3, 3);
        let s = cluster_series(&c, 3).unwrap();
        assert_eq!(s.coeffs[0], BigUint::from(27u32));
        assert_eq!(s.coeffs[1], BigUint::from(3u32));
        let f = fisher_partition_poly(&c).unwrap();
        assert_eq!(binomial_transform(&f, 3), s.coeffs);
        let h = Hypergraph::new(5, 3, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        for csp in [
            coloring_csp(&h, 3).unwrap(),
            coloring_to_atomic_csp(&h, 3).unwrap(),
        ] {
            let f = fisher_partition_poly(&csp).unwrap();
            assert_eq!(
                binomial_transform(&f, 6),
                cluster_series(&csp, 6).unwrap().coeffs
            );
        }
        assert!(cluster_series(&c, 11).is_err());
    }

    #[test]
    fn log_count_converges() {
        let c = edge(3, 3);
        let s = cluster_series(&c, 10).unwrap();
        let est = truncated_log_count(&s, 10, Some(&BigUint::from(24u32))).unwrap();
        assert!((est.estimate() - 24f64.ln()).abs() < 1e-9);
        assert_eq!(est.last_three_decreasing(), Some(true));
        let free = Csp::new(vec![3, 3], vec![]).unwrap();
        let est = truncated_log_count(
            &cluster_series(&free, 0).unwrap(),
            0,
            Some(&BigUint::from(9u32)),
        )
        .unwrap();
        assert!(est.errors.unwrap()[0] < 1e-60);
    }
}
