//! Certified complex roots of partition polynomials, distance to the unit
//! segment, and the self-reduction ratio chain.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rug::float::Round;
use rug::ops::{AddAssignRound, MulAssignRound};
use rug::{Assign, Complex, Float, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{conditional_marginal, special_table, Event, PartialAssignment};
use crate::model::{Csp, Level, ProjectionScheme};
use crate::poly::{to_rug_int, PartitionPolynomial};

pub const DEFAULT_PRECISION: u32 = 256;
const GUARD_BITS: u32 = 64;
const MAX_ITER: usize = 2000;

// ---- integer polynomial helpers (lowest degree first, trimmed) ----

type IPoly = Vec<Integer>;

fn deg(a: &[Integer]) -> usize {
    a.len() - 1
}

fn trimmed(mut a: IPoly) -> IPoly {
    while a.last().is_some_and(|c| *c == 0) {
        a.pop();
    }
    a
}

fn derivative(a: &[Integer]) -> IPoly {
    trimmed(
        a.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| Integer::from(c * i as u64))
            .collect(),
    )
}

fn primitive(mut a: IPoly) -> IPoly {
    let mut g = Integer::new();
    for c in &a {
        g.gcd_mut(c);
        if g == 1 {
            break;
        }
    }
    if g == 0 {
        return a;
    }
    if a.last().is_some_and(|c| *c < 0) {
        g = -g;
    }
    if g != 1 {
        for c in &mut a {
            c.div_exact_mut(&g);
        }
    }
    a
}

/// Some nonzero multiple of the remainder of `a` by `b`.
fn pseudo_rem(a: &[Integer], b: &[Integer]) -> IPoly {
    let mut r = a.to_vec();
    let lb = b.last().unwrap().clone();
    let mut t = Integer::new();
    while !r.is_empty() && r.len() >= b.len() {
        let lr = r.last().unwrap().clone();
        let shift = r.len() - b.len();
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (i, c) in b.iter().enumerate() {
            t.assign(&lr * c);
            r[i + shift] -= &t;
        }
        r = primitive(trimmed(r));
    }
    r
}

fn gcd_poly(a: &[Integer], b: &[Integer]) -> IPoly {
    let (mut a, mut b) = (primitive(a.to_vec()), primitive(b.to_vec()));
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let r = pseudo_rem(&a, &b);
        a = b;
        b = r;
    }
    primitive(a)
}

/// `a / b` when `b` divides `a` over the rationals and `b` is primitive.
fn div_exact(a: &[Integer], b: &[Integer]) -> IPoly {
    if a.len() < b.len() {
        return Vec::new();
    }
    let mut r = a.to_vec();
    let lb = b.last().unwrap();
    let mut q = vec![Integer::new(); a.len() - b.len() + 1];
    let mut t = Integer::new();
    for shift in (0..q.len()).rev() {
        let c = Integer::from(r[shift + deg(b)].div_exact_ref(lb));
        for (i, x) in b.iter().enumerate() {
            t.assign(&c * x);
            r[i + shift] -= &t;
        }
        q[shift] = c;
    }
    debug_assert!(r.iter().all(|c| *c == 0), "inexact polynomial division");
    trimmed(q)
}

fn sub(a: &[Integer], b: &[Integer]) -> IPoly {
    let n = a.len().max(b.len());
    let z = Integer::new();
    trimmed(
        (0..n)
            .map(|i| Integer::from(a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)))
            .collect(),
    )
}

/// Yun's square-free decomposition: pairs `(g_i, i)` with `f ∝ ∏ g_i^i`.
fn square_free(f: &[Integer]) -> Vec<(IPoly, usize)> {
    let f = primitive(trimmed(f.to_vec()));
    let mut out = Vec::new();
    if f.len() <= 1 {
        return out;
    }
    let df = derivative(&f);
    let a0 = gcd_poly(&f, &df);
    let mut b = div_exact(&f, &a0);
    let mut c = div_exact(&df, &a0);
    let mut i = 1;
    loop {
        let d = sub(&c, &derivative(&b));
        if b.len() <= 1 {
            break;
        }
        let a = if d.is_empty() {
            b.clone()
        } else {
            gcd_poly(&b, &d)
        };
        if a.len() > 1 {
            out.push((a.clone(), i));
        }
        let nb = div_exact(&b, &a);
        c = if d.is_empty() {
            Vec::new()
        } else {
            div_exact(&d, &a)
        };
        b = nb;
        i += 1;
    }
    out
}

// ---- root finding ----

#[derive(Clone, Debug)]
pub struct Root {
    pub z: Complex,
    /// Certified: the disk of this radius around `z` holds exactly
    /// `multiplicity` roots counted once per distinct root.
    pub radius: Float,
    pub multiplicity: usize,
}

impl Root {
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.z.real().to_f64(), self.z.imag().to_f64())
    }
    pub fn radius_f64(&self) -> f64 {
        self.radius.to_f64_round(Round::Up)
    }
}

#[derive(Clone, Debug)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub precision_bits: u32,
    /// Largest |Z(root)| over the returned approximations.
    pub residual: f64,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
    pub fn max_radius(&self) -> f64 {
        self.roots.iter().map(Root::radius_f64).fold(0.0, f64::max)
    }
}

fn eval(coeffs: &[rug::Integer], z: &Complex) -> Complex {
    let mut acc = Complex::new(z.prec());
    for c in coeffs.iter().rev() {
        acc *= z;
        acc += c;
    }
    acc
}

fn eval_with_derivative(coeffs: &[rug::Integer], z: &Complex) -> (Complex, Complex) {
    let mut p = Complex::new(z.prec());
    let mut dp = Complex::new(z.prec());
    for c in coeffs.iter().rev() {
        dp *= z;
        dp += &p;
        p *= z;
        p += c;
    }
    (p, dp)
}

/// Upper bound on the Horner rounding error at `z`.
fn horner_error(abs_coeffs: &[Float], z: &Complex, prec: u32) -> Float {
    let r = Float::with_val_round(prec, z.abs_ref(), Round::Up).0;
    let mut s = Float::new(prec);
    for c in abs_coeffs.iter().rev() {
        s.mul_assign_round(&r, Round::Up);
        s.add_assign_round(c, Round::Up);
    }
    let d = abs_coeffs.len() as u32;
    (s * (4 * d + 4)) >> prec
}

fn f_abs_up(z: &Complex, prec: u32) -> Float {
    Float::with_val_round(prec, z.abs_ref(), Round::Up).0
}

fn f_abs_down(z: &Complex, prec: u32) -> Float {
    Float::with_val_round(prec, z.abs_ref(), Round::Down).0
}

/// Aberth–Ehrlich on a square-free integer polynomial, then Newton polish
/// and Braess–Hadeler inclusion disks of radius d·|W_i|.
fn roots_square_free(ig: &[Integer], bits: u32) -> Result<Vec<(Complex, Float)>> {
    let prec = bits + GUARD_BITS;
    let d = deg(ig);
    let lead = Float::with_val(prec, &ig[d]);
    let abs_coeffs: Vec<Float> = ig
        .iter()
        .map(|c| Float::with_val_round(prec, &*c.as_abs(), Round::Up).0)
        .collect();

    let mut zs: Vec<Complex> = if d == 1 {
        let q = rug::Rational::from((-ig[0].clone(), ig[1].clone()));
        vec![Complex::with_val(prec, (Float::with_val(prec, &q), 0))]
    } else {
        // Fujiwara bound 2·max |a_{d−j}/a_d|^{1/j}
        let mut r = Float::new(prec);
        for j in 1..=d {
            let t = Float::with_val(prec, &abs_coeffs[d - j] / &abs_coeffs[d]).root(j as u32);
            if t > r {
                r = t;
            }
        }
        r *= 2;
        (0..d)
            .map(|j| {
                let mut theta = Float::with_val(prec, rug::float::Constant::Pi);
                theta *= 2 * j as u32;
                theta /= d as u32;
                theta += 0.4f64;
                let (s, c) = theta.sin_cos(Float::new(prec));
                Complex::with_val(prec, (c * &r, s * &r))
            })
            .collect()
    };

    if d > 1 {
        let tol = Float::with_val(prec, 1) >> (prec - 16);
        let loose = Float::with_val(prec, 1) >> (bits / 2);
        let mut prev = Float::with_val(prec, f64::INFINITY);
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let mut max_rel = Float::new(prec);
            for i in 0..d {
                let (p, dp) = eval_with_derivative(ig, &zs[i]);
                if p.is_zero() {
                    continue;
                }
                let w = Complex::with_val(prec, &p / &dp);
                let mut s = Complex::new(prec);
                for j in 0..d {
                    if j != i {
                        let diff = Complex::with_val(prec, &zs[i] - &zs[j]);
                        s += diff.recip();
                    }
                }
                let denom = Complex::with_val(prec, 1) - Complex::with_val(prec, &w * &s);
                let step = Complex::with_val(prec, &w / &denom);
                let scale = f_abs_up(&zs[i], prec).max(&Float::with_val(prec, 1));
                let rel = Float::with_val(prec, f_abs_up(&step, prec) / scale);
                if rel > max_rel {
                    max_rel = rel;
                }
                zs[i] -= step;
            }
            // stop at the rounding floor once the steps stop shrinking
            let stalled = max_rel <= loose && Float::with_val(prec, &max_rel * 2u32) > prev;
            if max_rel <= tol || stalled {
                converged = true;
                break;
            }
            prev = max_rel;
        }
        if !converged {
            return Err(Error::NonConvergence(format!(
                "Aberth iteration on degree {d} factor hit {MAX_ITER} steps"
            )));
        }
    }
    for z in zs.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_with_derivative(ig, z);
            if p.is_zero() || dp.is_zero() {
                break;
            }
            *z -= Complex::with_val(prec, &p / &dp);
        }
    }

    let slack = Float::with_val(prec, 1) + (Float::with_val(prec, 1) >> (prec / 2));
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let p = eval(ig, &zs[i]);
        let num = f_abs_up(&p, prec) + horner_error(&abs_coeffs, &zs[i], prec);
        let mut den = Float::with_val(prec, lead.abs_ref());
        for j in 0..d {
            if j != i {
                let diff = Complex::with_val(prec, &zs[i] - &zs[j]);
                den.mul_assign_round(&f_abs_down(&diff, prec), Round::Down);
            }
        }
        if den.is_zero() {
            return Err(Error::NonConvergence(
                "coincident root approximations".into(),
            ));
        }
        let radius = Float::with_val_round(prec, &num / &den, Round::Up).0 * d as u32 * &slack;
        out.push((zs[i].clone(), radius));
    }
    // disjointness of the inclusion disks
    for i in 0..d {
        for j in i + 1..d {
            let diff = Complex::with_val(prec, &out[i].0 - &out[j].0);
            let gap = f_abs_down(&diff, prec);
            let rr = Float::with_val_round(prec, &out[i].1 + &out[j].1, Round::Up).0;
            if gap <= rr {
                return Err(Error::NonConvergence(format!(
                    "inclusion disks overlap (radii {:.3e}, {:.3e})",
                    out[i].1.to_f64(),
                    out[j].1.to_f64()
                )));
            }
        }
    }
    Ok(out)
}

/// All complex roots with certified radii. Multiple roots are separated by a
/// square-free decomposition first, so every disk holds one distinct root.
pub fn find_roots(poly: &PartitionPolynomial, precision_bits: u32) -> Result<RootSet> {
    let c = poly.coeffs();
    if c.len() <= 1 {
        return Err(Error::param("polynomial is constant"));
    }
    let prec = precision_bits + GUARD_BITS;
    let zero_mult = c.iter().position(|x| !x.is_zero()).unwrap();
    let mut roots = Vec::new();
    if zero_mult > 0 {
        roots.push(Root {
            z: Complex::new(prec),
            radius: Float::new(prec),
            multiplicity: zero_mult,
        });
    }
    let rest: IPoly = c[zero_mult..].iter().map(to_rug_int).collect();
    for (g, mult) in square_free(&rest) {
        for (z, radius) in roots_square_free(&g, precision_bits)? {
            roots.push(Root {
                z,
                radius,
                multiplicity: mult,
            });
        }
    }
    let ic: Vec<rug::Integer> = c.iter().map(to_rug_int).collect();
    let residual = roots
        .iter()
        .map(|r| f_abs_up(&eval(&ic, &r.z), prec).to_f64())
        .fold(0.0, f64::max);
    let set = RootSet {
        roots,
        precision_bits,
        residual,
    };
    if set.total_multiplicity() != poly.degree().unwrap() {
        return Err(Error::NonConvergence(
            "root count differs from degree".into(),
        ));
    }
    Ok(set)
}

/// Lower bound on the distance from `z` to the segment [0, 1].
pub fn distance_to_unit_segment(z: &Complex) -> Float {
    let prec = z.prec().0;
    let (re, im) = (z.real(), z.imag());
    if *re >= 0 && *re <= 1 {
        Float::with_val(prec, im.abs_ref())
    } else if *re < 0 {
        Float::with_val_round(prec, re.hypot_ref(im), Round::Down).0
    } else {
        let shifted = Float::with_val_round(prec, re - 1u32, Round::Down).0;
        Float::with_val_round(prec, shifted.hypot_ref(im), Round::Down).0
    }
}

pub fn distance_to_unit_segment_f64(z: Complex64) -> f64 {
    distance_to_unit_segment(&Complex::with_val(53, (z.re, z.im))).to_f64_round(Round::Down)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootReport {
    pub re: f64,
    pub im: f64,
    pub radius: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StripVerdict {
    pub gamma: String,
    pub roots: Vec<RootReport>,
    /// min over roots of (distance to [0,1]) − (error radius), rounded down.
    pub min_distance: f64,
    pub pass: bool,
    /// The margin could not be separated from γ.
    pub boundary: bool,
    pub precision_bits: u32,
}

pub fn rational_to_float(x: &BigRational, prec: u32, round: Round) -> Float {
    let r = rug::Rational::from((to_rug_int(x.numer()), to_rug_int(x.denom())));
    Float::with_val_round(prec, &r, round).0
}

/// Pass iff every root is at certified distance strictly more than γ from
/// [0, 1]. A tie or an unresolvable comparison fails closed.
pub fn verify_strip(
    poly: &PartitionPolynomial,
    gamma: &BigRational,
    precision_bits: u32,
) -> Result<StripVerdict> {
    let set = find_roots(poly, precision_bits)?;
    let prec = precision_bits + GUARD_BITS;
    let mut min_margin: Option<Float> = None;
    let mut certain_fail = false;
    let g_up = rational_to_float(gamma, prec, Round::Up);
    let g_down = rational_to_float(gamma, prec, Round::Down);
    for r in &set.roots {
        let dist = distance_to_unit_segment(&r.z);
        let m = Float::with_val_round(prec, &dist - &r.radius, Round::Down).0;
        // dist is a lower bound rounded from a value at most one ulp above
        let hi = Float::with_val_round(prec, &dist + &r.radius, Round::Up).0
            * (Float::with_val(prec, 1) + (Float::with_val(prec, 1) >> (prec - 4)));
        certain_fail |= hi < g_down;
        if min_margin.as_ref().is_none_or(|x| m < *x) {
            min_margin = Some(m);
        }
    }
    let min_margin = min_margin.expect("nonconstant polynomial has a root");
    let pass = min_margin.partial_cmp(&g_up) == Some(Ordering::Greater);
    let boundary = !pass && !certain_fail;
    Ok(StripVerdict {
        gamma: gamma.to_string(),
        roots: set
            .roots
            .iter()
            .map(|r| RootReport {
                re: r.z.real().to_f64(),
                im: r.z.imag().to_f64(),
                radius: r.radius_f64(),
                multiplicity: r.multiplicity,
            })
            .collect(),
        min_distance: min_margin.to_f64_round(Round::Down),
        pass,
        boundary,
        precision_bits,
    })
}

/// γ = 1/(16Δ²k⁵).
pub fn coloring_gamma(k: u64, delta: u64) -> BigRational {
    BigRational::new(
        BigInt::one(),
        BigInt::from(16u64) * BigInt::from(delta).pow(2) * BigInt::from(k).pow(5),
    )
}

// ---- self-reduction ----

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelfReduction {
    pub z0: Complex64,
    pub z: Complex64,
    /// Z_i/Z_{i−1} from exact polynomials.
    pub ratios: Vec<Complex64>,
    /// 1 − μ_{i−1}(c_i violated) from exact conditional marginals.
    pub ratios_marginal: Vec<Complex64>,
    pub max_discrepancy: f64,
    /// Indices i (1-based) with |μ_{i−1}(c_i violated)| ≥ 1.
    pub flagged: Vec<usize>,
    /// First i (1-based) with Z_i(λ) = 0; the chain stops there.
    pub vanishing: Option<usize>,
}

pub fn self_reduction_chain(
    csp: &Csp,
    special: &ProjectionScheme,
    lam: Complex64,
    order: Option<&[usize]>,
) -> Result<SelfReduction> {
    let csp = match order {
        Some(o) => csp.reordered(o)?,
        None => csp.clone(),
    };
    special.check_domains(csp.domains())?;
    let m = csp.constraints().len();
    let n = csp.n();
    let table = special_table(special);

    // Z_0 = ∏_v Σ_a λ^{[a special]}
    let mut z0 = PartitionPolynomial::one(crate::poly::PolyVar::Lambda);
    for t in &table {
        let ones = t.iter().filter(|&&b| b).count() as u64;
        z0 = z0.mul(&PartitionPolynomial::from_u64(
            &[t.len() as u64 - ones, ones],
            crate::poly::PolyVar::Lambda,
        ));
    }
    if z0.vanishes_at(lam) {
        return Err(Error::ZeroPartition("Z_0 vanishes".into()));
    }

    // hist[f][j]: assignments whose first violated constraint is f (m = none)
    let hist = crate::exact::par_enumerate(
        csp.domains(),
        crate::exact::DEFAULT_BUDGET,
        "self-reduction chain",
        || vec![vec![0u64; n + 1]; m + 1],
        |acc, a| {
            let f = csp
                .constraints()
                .iter()
                .position(|c| c.is_violated(a))
                .unwrap_or(m);
            let j = a.iter().zip(&table).filter(|(&x, t)| t[x as usize]).count();
            acc[f][j] += 1;
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                for (p, q) in x.iter_mut().zip(y) {
                    *p += q;
                }
            }
            a
        },
    )?;
    // Z_i sums rows f >= i
    let mut zs = Vec::with_capacity(m + 1);
    let mut acc = vec![0u64; n + 1];
    for f in (0..=m).rev() {
        for (p, q) in acc.iter_mut().zip(&hist[f]) {
            *p += q;
        }
        zs.push(PartitionPolynomial::from_u64(
            &acc,
            crate::poly::PolyVar::Lambda,
        ));
    }
    zs.reverse();

    let mut out = SelfReduction {
        z0: z0.eval_c64(lam),
        z: zs[m].eval_c64(lam),
        ratios: Vec::new(),
        ratios_marginal: Vec::new(),
        max_discrepancy: 0.0,
        flagged: Vec::new(),
        vanishing: None,
    };
    for i in 1..=m {
        let ratio = zs[i].eval_c64(lam) / zs[i - 1].eval_c64(lam);
        let viol = conditional_marginal(
            &csp.prefix(i - 1),
            special,
            lam,
            &PartialAssignment::empty(n, Level::Original),
            &Event::Violates(csp.constraints()[i - 1].clone()),
        )?;
        let via = Complex64::new(1.0, 0.0) - viol;
        out.max_discrepancy = out.max_discrepancy.max((ratio - via).norm());
        if viol.norm() >= 1.0 {
            out.flagged.push(i);
        }
        out.ratios.push(ratio);
        out.ratios_marginal.push(via);
        if zs[i].vanishes_at(lam) {
            out.vanishing = Some(i);
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::single_edge_closed_form;
    use crate::model::{coloring_csp, coloring_to_atomic_csp, Hypergraph};
    use crate::poly::PolyVar;

    fn p(c: &[u64]) -> PartitionPolynomial {
        PartitionPolynomial::from_u64(c, PolyVar::Lambda)
    }

    #[test]
    fn square_free_parts() {
        let ints = |c: &[i64]| c.iter().map(|&x| Integer::from(x)).collect::<Vec<_>>();
        assert_eq!(square_free(&ints(&[6, 12, 6])), vec![(ints(&[1, 1]), 2)]);
        // (x+1)(x+2)^3
        let g = p(&[1, 1]).mul(&p(&[2, 1]).pow(3));
        let sf = square_free(&g.coeffs().iter().map(to_rug_int).collect::<Vec<_>>());
        assert_eq!(sf, vec![(ints(&[1, 1]), 1), (ints(&[2, 1]), 3)]);
    }

    #[test]
    fn double_root() {
        let r = find_roots(&p(&[6, 12, 6]), 128).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert_eq!(r.roots[0].multiplicity, 2);
        assert!((r.roots[0].to_c64() + 1.0).norm() < 1e-30);
        assert!(r.max_radius() <= 1e-30);
    }

    #[test]
    fn zero_root_and_constant() {
        let r = find_roots(&p(&[0, 2]), 128).unwrap();
        assert_eq!(r.roots[0].to_c64(), Complex64::new(0.0, 0.0));
        assert!(find_roots(&p(&[5]), 128).is_err());
    }

    #[test]
    fn quadratic_complex_roots() {
        // λ² + 1
        let r = find_roots(&p(&[1, 0, 1]), 128).unwrap();
        let mut ims: Vec<f64> = r.roots.iter().map(|x| x.to_c64().im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-30 && (ims[1] - 1.0).abs() < 1e-30);
    }

    #[test]
    fn distances() {
        let d = |re: f64, im: f64| distance_to_unit_segment_f64(Complex64::new(re, im));
        assert_eq!(d(-1.0, 0.0), 1.0);
        assert_eq!(d(0.5, 3e-10), 3e-10);
        assert_eq!(d(2.0, 0.0), 1.0);
        assert_eq!(d(-3.0, 4.0), 5.0);
    }

    #[test]
    fn strip_single_edge() {
        let v = verify_strip(&p(&[6, 12, 6]), &coloring_gamma(3, 1), 256).unwrap();
        assert!(v.pass);
        assert_eq!(v.gamma, "1/3888");
        let g = BigRational::new(1.into(), 34992.into());
        assert!(verify_strip(&p(&[6, 12, 6]), &g, 256).unwrap().pass);
        let v = verify_strip(
            &p(&[0, 2]),
            &BigRational::new(1.into(), BigInt::from(10).pow(40)),
            256,
        )
        .unwrap();
        assert!(!v.pass);
    }

    #[test]
    fn strip_tie_fails_closed() {
        let v = verify_strip(&p(&[6, 12, 6]), &BigRational::one(), 256).unwrap();
        assert!(!v.pass);
        assert!(v.boundary);
    }

    #[test]
    fn strip_k50() {
        let e = single_edge_closed_form(50, 700).unwrap();
        let v = verify_strip(&e, &coloring_gamma(50, 1), 256).unwrap();
        assert!(v.pass, "{v:?}");
        assert_eq!(v.roots.len(), 49);
        assert!(v.min_distance > 100.0);
    }

    #[test]
    fn chain_single_edge() {
        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let csp = coloring_to_atomic_csp(&h, 3).unwrap();
        let sp = ProjectionScheme::identity(csp.domains(), Some(0));
        let r = self_reduction_chain(&csp, &sp, Complex64::new(1.0, 0.0), None).unwrap();
        let prod: Complex64 = r.ratios.iter().product();
        assert!((prod - 24.0 / 27.0).norm() < 1e-14);
        assert!(r.max_discrepancy < 1e-12);
        assert!((prod * r.z0 - r.z).norm() < 1e-12);
        assert!(r.flagged.is_empty());

        let empty = Csp::new(vec![3], vec![]).unwrap();
        let sp = ProjectionScheme::identity(empty.domains(), Some(0));
        assert!(
            self_reduction_chain(&empty, &sp, Complex64::new(1.0, 0.0), None)
                .unwrap()
                .ratios
                .is_empty()
        );
    }

    #[test]
    fn chain_vanishes() {
        let h = Hypergraph::new(2, 2, vec![vec![0, 1]]).unwrap();
        let csp = coloring_csp(&h, 2).unwrap();
        let sp = ProjectionScheme::identity(csp.domains(), Some(0));
        let r = self_reduction_chain(&csp, &sp, Complex64::new(0.0, 0.0), None).unwrap();
        assert_eq!(r.vanishing, Some(1));
    }
}
