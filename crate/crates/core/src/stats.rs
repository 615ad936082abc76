//! Exact-law checks of the limit theorems and the Chebyshev bound, local
//! uniformity and total influence on small instances, and the randomized
//! variable marking for CNF formulas.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::float::Constant;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::conditions::{
    check_chebyshev_condition, check_clt_condition, check_cnf_condition, CnfParams,
};
use crate::error::{Error, Result};
use crate::exact::{
    exact_law_of_special_count, par_enumerate, special_table, ExactDistribution, DEFAULT_BUDGET,
};
use crate::model::{CnfFormula, Csp, Hypergraph, ProjectionScheme};
use crate::poly::{f64_to_rational, to_rug_int, PartitionPolynomial};

/// Working precision for the normal CDF and density.
pub const STATS_PRECISION: u32 = 192;

fn rat(x: &BigRational) -> Float {
    let mut f = Float::with_val(STATS_PRECISION, to_rug_int(x.numer()));
    f /= to_rug_int(x.denom());
    f
}

fn normal_cdf(z: &Float) -> Float {
    let s = Float::with_val(STATS_PRECISION, -z) / Float::with_val(STATS_PRECISION, 2).sqrt();
    s.erfc() / 2u32
}

fn normal_density(z: &Float) -> Float {
    let two_pi = Float::with_val(STATS_PRECISION, Constant::Pi) * 2u32;
    let e = Float::with_val(STATS_PRECISION, z * z) / -2i32;
    e.exp() / two_pi.sqrt()
}

fn mean_std(dist: &ExactDistribution) -> Result<(Float, Float)> {
    if dist.variance <= BigRational::zero() {
        return Err(Error::param("degenerate distribution: zero variance"));
    }
    Ok((rat(&dist.mean), rat(&dist.variance).sqrt()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CltReport {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    /// sup_t |P(X* ≤ t) − Φ(t)|.
    pub d_k: f64,
    /// ln n / √n.
    pub envelope: f64,
    /// d_K · √n / ln n.
    pub scaled: f64,
}

/// Kolmogorov distance between the standardized law and N(0,1). The sup is
/// attained at a jump, from the left or the right.
pub fn clt_report(dist: &ExactDistribution) -> Result<CltReport> {
    let (mu, sd) = mean_std(dist)?;
    let cdf = dist.cdf();
    let mut prev = Float::with_val(STATS_PRECISION, 0);
    let mut sup = Float::with_val(STATS_PRECISION, 0);
    for (m, f) in cdf.iter().enumerate() {
        let z = (Float::with_val(STATS_PRECISION, m) - &mu) / &sd;
        let phi = normal_cdf(&z);
        let right = rat(f);
        for v in [
            Float::with_val(STATS_PRECISION, &right - &phi),
            Float::with_val(STATS_PRECISION, &prev - &phi),
        ] {
            let a = v.abs();
            if a > sup {
                sup = a;
            }
        }
        prev = right;
    }
    let n = dist.probs.len() - 1;
    let (nf, d) = (n as f64, sup.to_f64());
    let envelope = nf.ln() / nf.sqrt();
    Ok(CltReport {
        n,
        mean: mu.to_f64(),
        std: sd.to_f64(),
        d_k: d,
        envelope,
        scaled: d / envelope,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LcltReport {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    /// sup_t |P(X = t) − σ⁻¹𝒩((t−μ)/σ)|.
    pub sup_error: f64,
    pub argmax: i64,
    /// ln^{7/2} n / n.
    pub envelope: f64,
    pub scaled: f64,
}

/// Pointwise comparison over the support widened to μ ± 6σ.
pub fn lclt_report(dist: &ExactDistribution) -> Result<LcltReport> {
    let (mu, sd) = mean_std(dist)?;
    let n = dist.probs.len() - 1;
    let six = Float::with_val(STATS_PRECISION, &sd * 6u32);
    let lo = (Float::with_val(STATS_PRECISION, &mu - &six)
        .floor()
        .to_f64() as i64)
        .min(0);
    let hi = (Float::with_val(STATS_PRECISION, &mu + &six).ceil().to_f64() as i64).max(n as i64);
    let mut sup = Float::with_val(STATS_PRECISION, 0);
    let mut argmax = 0;
    for t in lo..=hi {
        let p = if t >= 0 && (t as usize) <= n {
            rat(&dist.probs[t as usize])
        } else {
            Float::with_val(STATS_PRECISION, 0)
        };
        let z = (Float::with_val(STATS_PRECISION, t) - &mu) / &sd;
        let dens = normal_density(&z) / &sd;
        let a = Float::with_val(STATS_PRECISION, p - dens).abs();
        if a > sup {
            sup = a;
            argmax = t;
        }
    }
    let nf = n as f64;
    let envelope = nf.ln().powf(3.5) / nf;
    let e = sup.to_f64();
    Ok(LcltReport {
        n,
        mean: mu.to_f64(),
        std: sd.to_f64(),
        sup_error: e,
        argmax,
        envelope,
        scaled: e / envelope,
    })
}

/// Law of the special-color count on `m` disjoint k-edges with q colors.
pub fn disjoint_edges_law(k: u32, q: u32, m: u32, lam: &BigRational) -> Result<ExactDistribution> {
    let p = crate::exact::single_edge_closed_form(k, q)?.pow(m);
    exact_law_of_special_count(&p, lam)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum UniformityMode {
    /// λ/(q−1+λ) ± λ/((q−1+λ)Δk).
    Chebyshev,
    /// Lower q*λ/D′ − q*λ/(D′Δk), upper q*λ/D′ + (q−q*)/(D′Δk), D′ = q − q* + q*λ.
    Clt { q_star: u64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniformityReport {
    pub lower: f64,
    pub upper: f64,
    pub marginals: Vec<f64>,
    pub pass: Vec<bool>,
    pub all_pass: bool,
}

/// Exact marginals P(σ_v special) for all variables in one pass.
pub fn special_marginals(
    csp: &Csp,
    special: &ProjectionScheme,
    lam: &BigRational,
) -> Result<Vec<BigRational>> {
    special.check_domains(csp.domains())?;
    let n = csp.n();
    let table = special_table(special);
    // per m: total count, then per-variable counts of being special
    let acc = par_enumerate(
        csp.domains(),
        DEFAULT_BUDGET,
        "marginals",
        || vec![vec![0u64; n + 1]; n + 1],
        |acc, a| {
            if csp.is_satisfied(a) {
                let flags: Vec<bool> = a.iter().zip(&table).map(|(&x, t)| t[x as usize]).collect();
                let m = flags.iter().filter(|&&b| b).count();
                acc[m][0] += 1;
                for (v, &f) in flags.iter().enumerate() {
                    if f {
                        acc[m][v + 1] += 1;
                    }
                }
            }
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
    let mut pow = BigRational::one();
    let mut z = BigRational::zero();
    let mut num = vec![BigRational::zero(); n];
    for row in &acc {
        z += BigRational::from_integer(row[0].into()) * &pow;
        for v in 0..n {
            num[v] += BigRational::from_integer(row[v + 1].into()) * &pow;
        }
        pow *= lam;
    }
    if z.is_zero() {
        return Err(Error::ZeroPartition("Z(λ) = 0".into()));
    }
    Ok(num.into_iter().map(|x| x / &z).collect())
}

pub fn local_uniformity_check(
    csp: &Csp,
    special: &ProjectionScheme,
    lam: f64,
    mode: UniformityMode,
) -> Result<UniformityReport> {
    if lam.is_nan() || lam <= 0.0 {
        return Err(Error::param("lambda must be positive"));
    }
    let q = *csp
        .domains()
        .iter()
        .max()
        .ok_or_else(|| Error::invalid("no variables"))? as f64;
    let dk = (csp.max_degree() * csp.arity()) as f64;
    let inv = if dk > 0.0 { 1.0 / dk } else { 0.0 };
    let (lower, upper) = match mode {
        UniformityMode::Chebyshev => {
            let c = lam / (q - 1.0 + lam);
            (c - c * inv, c + c * inv)
        }
        UniformityMode::Clt { q_star } => {
            let qs = q_star as f64;
            let d = q - qs + qs * lam;
            (
                qs * lam / d - qs * lam / d * inv,
                qs * lam / d + (q - qs) / d * inv,
            )
        }
    };
    let marg = special_marginals(csp, special, &f64_to_rational(lam))?;
    let marginals: Vec<f64> = marg
        .iter()
        .map(|x| x.to_f64().unwrap_or(f64::NAN))
        .collect();
    // the bounds are floats, so allow for their last bit
    let slack = 1e-15;
    let pass: Vec<bool> = marginals
        .iter()
        .map(|&m| m >= lower - slack && m <= upper + slack)
        .collect();
    Ok(UniformityReport {
        lower,
        upper,
        all_pass: pass.iter().all(|&b| b),
        marginals,
        pass,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ListUniformityReport {
    pub rho: f64,
    /// min over v and c ∈ Q_v of μ_v(c)·|Q_v|.
    pub min_scaled_marginal: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Uniform proper list colorings: checks μ_v(c) ≥ (1 − 1/ϱ)/|Q_v|.
pub fn list_coloring_uniformity(
    h: &Hypergraph,
    lists: &[Vec<u32>],
    rho: f64,
) -> Result<ListUniformityReport> {
    if lists.len() != h.n() || lists.iter().any(Vec::is_empty) {
        return Err(Error::invalid("one nonempty list per vertex required"));
    }
    let mut constraints = Vec::new();
    for e in h.edges() {
        let common: Vec<u32> = lists[e[0]]
            .iter()
            .copied()
            .filter(|c| e.iter().all(|&v| lists[v].contains(c)))
            .collect();
        let forbidden: Vec<Vec<u32>> = common
            .iter()
            .map(|c| {
                e.iter()
                    .map(|&v| lists[v].iter().position(|x| x == c).unwrap() as u32)
                    .collect()
            })
            .collect();
        if !forbidden.is_empty() {
            constraints.push(crate::model::Constraint {
                vars: e.clone(),
                forbidden,
            });
        }
    }
    let csp = Csp::new(lists.iter().map(|l| l.len() as u32).collect(), constraints)?;
    let n = csp.n();
    let counts = par_enumerate(
        csp.domains(),
        DEFAULT_BUDGET,
        "list colorings",
        || (0u64, vec![Vec::<u64>::new(); n]),
        |acc, a| {
            if csp.is_satisfied(a) {
                acc.0 += 1;
                for (v, &x) in a.iter().enumerate() {
                    if acc.1[v].is_empty() {
                        acc.1[v] = vec![0; lists[v].len()];
                    }
                    acc.1[v][x as usize] += 1;
                }
            }
        },
        |mut a, b| {
            a.0 += b.0;
            for (x, y) in a.1.iter_mut().zip(b.1) {
                if x.is_empty() {
                    *x = y;
                } else if !y.is_empty() {
                    for (p, q) in x.iter_mut().zip(y) {
                        *p += q;
                    }
                }
            }
            a
        },
    )?;
    if counts.0 == 0 {
        return Err(Error::invalid("no proper list coloring"));
    }
    let min = (0..n)
        .flat_map(|v| {
            let c = &counts.1[v];
            (0..lists[v].len())
                .map(move |x| c.get(x).copied().unwrap_or(0) as f64 * lists[v].len() as f64)
        })
        .fold(f64::INFINITY, f64::min)
        / counts.0 as f64;
    let bound = 1.0 - 1.0 / rho;
    Ok(ListUniformityReport {
        rho,
        min_scaled_marginal: min,
        bound,
        pass: min >= bound,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailCheck {
    pub delta: f64,
    pub tail: f64,
    pub bound: f64,
    pub vacuous: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChebyshevReport {
    pub n: usize,
    pub k: u64,
    pub delta_degree: u64,
    pub q: u64,
    pub condition_pass: bool,
    pub mean: f64,
    pub variance: f64,
    pub variance_bound: f64,
    pub variance_ok: bool,
    pub mean_lower_bound: f64,
    pub mean_ok: bool,
    /// Relative slack of the mean bound, (E − bound)/E.
    pub mean_gap: f64,
    pub tails: Vec<TailCheck>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

/// Exact tails P(|X − E| ≥ δE) against 4Δk(Δk+1)/(δ² (λ/(q−1+λ)(1−1/(Δk)))² |V|),
/// with Var ≤ 4Δk(Δk+1)|V| and E ≥ λ/(q−1+λ)(1−1/(Δk))|V|. All exact in rationals.
pub fn chebyshev_verify(
    poly: &PartitionPolynomial,
    n: usize,
    k: u64,
    delta_degree: u64,
    q: u64,
    lam: &BigRational,
    deltas: &[f64],
) -> Result<ChebyshevReport> {
    let dist = exact_law_of_special_count(poly, lam)?;
    let lam_f = lam.to_f64().unwrap_or(f64::NAN);
    let cond = check_chebyshev_condition(k, delta_degree, q, lam_f)?;
    let mut warnings = Vec::new();
    if !cond.pass {
        warnings.push("Chebyshev condition does not hold; bounds are not implied".into());
    }
    let r = |x: u64| BigRational::from_integer(BigInt::from(x));
    let dk = r(delta_degree * k);
    let nn = r(n as u64);
    let var_bound = r(4) * &dk * (&dk + r(1)) * &nn;
    let c = lam / (r(q - 1) + lam) * (r(1) - dk.recip());
    let mean_bound = &c * &nn;
    let mut tails = Vec::new();
    for &d in deltas {
        let dr = f64_to_rational(d);
        if dr <= BigRational::zero() {
            return Err(Error::param("tail deltas must be positive"));
        }
        let thr = &dr * &dist.mean;
        let tail: BigRational = dist
            .probs
            .iter()
            .enumerate()
            .filter(|(m, _)| {
                let x = r(*m as u64) - &dist.mean;
                x.clone().max(-x) >= thr
            })
            .map(|(_, p)| p.clone())
            .sum();
        let bound = r(4) * &dk * (&dk + r(1)) / (&dr * &dr * &c * &c * &nn);
        tails.push(TailCheck {
            delta: d,
            tail: tail.to_f64().unwrap_or(f64::NAN),
            bound: bound.to_f64().unwrap_or(f64::INFINITY),
            vacuous: bound >= BigRational::one(),
            pass: tail <= bound,
        });
    }
    let variance_ok = dist.variance <= var_bound;
    let mean_ok = dist.mean >= mean_bound;
    let mean_f = dist.mean.to_f64().unwrap_or(f64::NAN);
    let mb = mean_bound.to_f64().unwrap_or(f64::NAN);
    Ok(ChebyshevReport {
        n,
        k,
        delta_degree,
        q,
        condition_pass: cond.pass,
        mean: mean_f,
        variance: dist.variance.to_f64().unwrap_or(f64::NAN),
        variance_bound: var_bound.to_f64().unwrap_or(f64::INFINITY),
        variance_ok,
        mean_lower_bound: mb,
        mean_ok,
        mean_gap: (mean_f - mb) / mean_f,
        pass: variance_ok && mean_ok && tails.iter().all(|t| t.pass),
        tails,
        warnings,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub var: usize,
    pub value: u32,
    /// Σ_{u≠v} |P(σ_u special | σ_v = x) − P(σ_u special)|.
    pub influence: f64,
    pub per_var: Vec<f64>,
    /// The influence bound, when the CLT condition holds and x is special.
    pub bound: Option<f64>,
}

pub fn total_influence_exact(
    csp: &Csp,
    special: &ProjectionScheme,
    lam: f64,
    v: usize,
    value: u32,
) -> Result<InfluenceReport> {
    if v >= csp.n() || value >= csp.domains()[v] {
        return Err(Error::param(format!("pin {v}={value} out of range")));
    }
    let lr = f64_to_rational(lam);
    let base = special_marginals(csp, special, &lr)?;
    let mut domains = csp.domains().to_vec();
    // pin by shrinking the domain through an extra unary constraint
    let others: Vec<Vec<u32>> = (0..domains[v])
        .filter(|&x| x != value)
        .map(|x| vec![x])
        .collect();
    let mut cons = csp.constraints().to_vec();
    if !others.is_empty() {
        cons.push(crate::model::Constraint {
            vars: vec![v],
            forbidden: others,
        });
    }
    let pinned_csp = Csp::new(std::mem::take(&mut domains), cons)?;
    let pinned = special_marginals(&pinned_csp, special, &lr).map_err(|e| match e {
        Error::ZeroPartition(_) => {
            Error::ZeroPartition(format!("pin {v}={value} has zero measure"))
        }
        other => other,
    })?;
    let per_var: Vec<f64> = (0..csp.n())
        .map(|u| {
            if u == v {
                0.0
            } else {
                (&pinned[u] - &base[u]).to_f64().unwrap_or(f64::NAN).abs()
            }
        })
        .collect();
    let influence = per_var.iter().sum();
    let table = special_table(special);
    let q_star = table[v].iter().filter(|&&b| b).count() as u64;
    let q = csp.domains()[v] as u64;
    let (k, d) = (csp.arity() as u64, csp.max_degree() as u64);
    let bound = if table[v][value as usize] && q_star > 0 && q_star < q && k > 0 && d > 0 {
        let cond = check_clt_condition(k, d, q, q_star, lam)?;
        cond.pass.then(|| {
            let qs = q_star as f64;
            let dd = q as f64 - qs + qs * lam;
            let dk = (d * k) as f64;
            1.0 / (2.0 * qs) * (qs * lam * (q as f64 - qs)) / (dd * dd) * ((dk - 1.0) / dk).powi(2)
        })
    } else {
        None
    };
    Ok(InfluenceReport {
        var: v,
        value,
        influence,
        per_var,
        bound,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkingResult {
    pub success: bool,
    pub marked: Vec<usize>,
    /// (marked, unmarked) per clause.
    pub per_clause: Vec<(usize, usize)>,
    pub global: (usize, usize),
    pub resampling_steps: usize,
    pub attempts: usize,
    pub seed: u64,
}

/// Independent check of the count requirements of a marking.
pub fn verify_marking(f: &CnfFormula, p: &CnfParams, marked: &[usize]) -> bool {
    let mut is = vec![false; f.n()];
    for &v in marked {
        if v >= f.n() {
            return false;
        }
        is[v] = true;
    }
    let clauses_ok = f.clauses().iter().all(|c| {
        let m = c.vars.iter().filter(|&&v| is[v]).count() as u64;
        m >= p.k_mk && (c.vars.len() as u64 - m) >= p.k_umk
    });
    let total = is.iter().filter(|&&b| b).count() as f64;
    let n = f.n() as f64;
    clauses_ok && total >= p.alpha * n && (n - total) >= p.beta * n
}

/// Moser–Tardos resampling: each variable is marked with probability
/// (1+α−β)/2; a clause with too few marked or unmarked variables resamples
/// its variables, and the global count event resamples everything.
/// At most 6n resamplings per attempt and ⌈log₂(1/δ)⌉ attempts.
pub fn moser_tardos_marking(
    f: &CnfFormula,
    p: &CnfParams,
    seed: u64,
    fail_prob: f64,
) -> Result<MarkingResult> {
    if f.k() as u64 != p.k || f.delta() as u64 > p.delta {
        return Err(Error::param("formula does not match the parameters"));
    }
    if !(fail_prob > 0.0 && fail_prob < 1.0) {
        return Err(Error::param("failure probability must lie in (0,1)"));
    }
    let cond = check_cnf_condition(p)?;
    if !cond
        .item("2a")
        .is_some_and(|i| i.verdict == crate::interval::Verdict::Pass)
    {
        return Err(Error::Precondition(
            "2^k is too small for the marking lemma".into(),
        ));
    }
    let n = f.n();
    let prob = (1.0 + p.alpha - p.beta) / 2.0;
    let attempts = (1.0 / fail_prob).log2().ceil().max(1.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps_total = 0;
    let (min_marked, min_unmarked) = (
        (p.alpha * n as f64).ceil() as usize,
        (p.beta * n as f64).ceil() as usize,
    );
    for attempt in 1..=attempts {
        let mut is: Vec<bool> = (0..n).map(|_| rng.gen_bool(prob)).collect();
        let mut steps = 0;
        loop {
            let bad_clause = f.clauses().iter().find(|c| {
                let m = c.vars.iter().filter(|&&v| is[v]).count() as u64;
                m < p.k_mk || (c.vars.len() as u64 - m) < p.k_umk
            });
            let total = is.iter().filter(|&&b| b).count();
            let global_bad = total < min_marked || n - total < min_unmarked;
            if bad_clause.is_none() && !global_bad {
                let marked: Vec<usize> = (0..n).filter(|&v| is[v]).collect();
                if !verify_marking(f, p, &marked) {
                    return Err(Error::invalid(
                        "marking passed resampling but failed verification",
                    ));
                }
                let per_clause = f
                    .clauses()
                    .iter()
                    .map(|c| {
                        let m = c.vars.iter().filter(|&&v| is[v]).count();
                        (m, c.vars.len() - m)
                    })
                    .collect();
                return Ok(MarkingResult {
                    success: true,
                    global: (total, n - total),
                    marked,
                    per_clause,
                    resampling_steps: steps_total + steps,
                    attempts: attempt,
                    seed,
                });
            }
            if steps >= 6 * n.max(1) {
                break;
            }
            steps += 1;
            match bad_clause {
                Some(c) => {
                    for &v in &c.vars {
                        is[v] = rng.gen_bool(prob);
                    }
                }
                None => {
                    for x in is.iter_mut() {
                        *x = rng.gen_bool(prob);
                    }
                }
            }
        }
        steps_total += steps;
    }
    Err(Error::NonConvergence(format!(
        "marking failed after {attempts} attempts and {steps_total} resamplings (seed {seed})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{coloring_csp, coloring_to_atomic_csp, make_coloring_projection, Clause};

    fn one() -> BigRational {
        BigRational::one()
    }

    #[test]
    fn clt_single_edge() {
        let d = disjoint_edges_law(3, 3, 1, &one()).unwrap();
        // 24 colorings: X = 0 for 6, 1 for 12, 2 for 6
        assert_eq!(d.probs.len(), 3);
        let r = clt_report(&d).unwrap();
        // laws (1/4, 1/2, 1/4): the gap at the median jump is exactly 1/4
        assert!((r.d_k - 0.25).abs() < 1e-15);
        assert!((r.std - 0.5f64.sqrt()).abs() < 1e-15);
        let l = lclt_report(&d).unwrap();
        assert!(l.sup_error > 0.0);
        assert!(clt_report(&ExactDistribution::new(vec![one()]).unwrap()).is_err());
    }

    #[test]
    fn trends_on_disjoint_edges() {
        let mut prev: Option<(CltReport, LcltReport)> = None;
        for m in [16, 64] {
            let d = disjoint_edges_law(3, 3, m, &one()).unwrap();
            let (c, l) = (clt_report(&d).unwrap(), lclt_report(&d).unwrap());
            if let Some((pc, pl)) = &prev {
                assert!(c.d_k < pc.d_k && l.sup_error < pl.sup_error);
            }
            prev = Some((c, l));
        }
    }

    #[test]
    fn lclt_symmetric() {
        // binomial(4, 1/2) is symmetric about 2
        let p: Vec<BigRational> = [1, 4, 6, 4, 1]
            .iter()
            .map(|&c| BigRational::new(c.into(), 16.into()))
            .collect();
        let l = lclt_report(&ExactDistribution::new(p).unwrap()).unwrap();
        let mirrored = lclt_report(
            &ExactDistribution::new(
                [1, 4, 6, 4, 1]
                    .iter()
                    .rev()
                    .map(|&c| BigRational::new(c.into(), 16.into()))
                    .collect(),
            )
            .unwrap(),
        )
        .unwrap();
        assert_eq!(l.sup_error, mirrored.sup_error);
        let c = clt_report(
            &ExactDistribution::new(
                [1, 4, 6, 4, 1]
                    .iter()
                    .map(|&c| BigRational::new(c.into(), 16.into()))
                    .collect(),
            )
            .unwrap(),
        )
        .unwrap();
        assert!((c.mean - 2.0).abs() < 1e-15);
    }

    #[test]
    fn uniformity() {
        let h = Hypergraph::disjoint_edges(3, 2);
        let csp = coloring_csp(&h, 4).unwrap();
        let sp = ProjectionScheme::uniform(6, make_coloring_projection(4, 1).unwrap());
        let r = local_uniformity_check(&csp, &sp, 1.0, UniformityMode::Chebyshev).unwrap();
        assert!(r.all_pass);
        assert!(r.marginals.iter().all(|&m| (m - 0.25).abs() < 1e-15));
        let free = Csp::new(vec![4; 2], vec![]).unwrap();
        let sp2 = ProjectionScheme::uniform(2, make_coloring_projection(4, 1).unwrap());
        let r = local_uniformity_check(&free, &sp2, 0.5, UniformityMode::Chebyshev).unwrap();
        assert!((r.marginals[0] - 0.5 / 3.5).abs() < 1e-15 && r.all_pass);
        let lists = vec![vec![0, 1, 2, 3]; 6];
        assert!(list_coloring_uniformity(&h, &lists, 4.0).unwrap().pass);
    }

    #[test]
    fn chebyshev_small() {
        let k = 6;
        let q = 1000u64;
        let p = crate::exact::single_edge_closed_form(k, q as u32)
            .unwrap()
            .pow(10);
        let r = chebyshev_verify(&p, 60, k as u64, q, q, &one(), &[0.1, 0.2, 0.5]).unwrap();
        assert!(r.condition_pass, "{:?}", r.warnings);
        assert!(r.pass);
        assert!(r.tails.iter().all(|t| t.vacuous));
    }

    #[test]
    fn influence() {
        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let csp = coloring_csp(&h, 3).unwrap();
        let sp = ProjectionScheme::uniform(3, make_coloring_projection(3, 1).unwrap());
        let r = total_influence_exact(&csp, &sp, 1.0, 0, 1).unwrap();
        // P(σ_u = 0) = 8/24; with σ_0 = 1 it is 3/8
        assert!((r.per_var[1] - (3.0 / 8.0 - 1.0 / 3.0)).abs() < 1e-15);
        assert!((r.influence - 2.0 * (3.0 / 8.0 - 1.0 / 3.0)).abs() < 1e-15);
        let apart = Hypergraph::disjoint_edges(3, 2);
        let csp = coloring_csp(&apart, 3).unwrap();
        let sp = ProjectionScheme::uniform(6, make_coloring_projection(3, 1).unwrap());
        let r = total_influence_exact(&csp, &sp, 1.0, 0, 0).unwrap();
        assert!(r.per_var[3..].iter().all(|&x| x < 1e-16));
        let _ = coloring_to_atomic_csp(&apart, 3).unwrap();
    }

    #[test]
    fn marking() {
        let p = CnfParams::new(300, 2, 0.171562, 0.257342, 1.0).unwrap();
        let empty = CnfFormula::new(50, 300, vec![]).unwrap();
        let r = moser_tardos_marking(&empty, &p, 0, 1e-6).unwrap();
        assert!(r.success && verify_marking(&empty, &p, &r.marked));
        let clauses = (0..4)
            .map(|i| Clause {
                vars: (i * 300..(i + 1) * 300).collect(),
                neg: vec![false; 300],
            })
            .collect();
        let f = CnfFormula::new(1200, 300, clauses).unwrap();
        let a = moser_tardos_marking(&f, &p, 3, 1e-6).unwrap();
        let b = moser_tardos_marking(&f, &p, 3, 1e-6).unwrap();
        assert_eq!(a.marked, b.marked);
        assert!(a
            .per_clause
            .iter()
            .all(|&(m, u)| m as u64 >= p.k_mk && u as u64 >= p.k_umk));
        let tiny = CnfParams::new(10, 2, 0.171562, 0.257342, 1.0).unwrap();
        let g = CnfFormula::new(
            10,
            10,
            vec![Clause {
                vars: (0..10).collect(),
                neg: vec![false; 10],
            }],
        )
        .unwrap();
        assert!(matches!(
            moser_tardos_marking(&g, &tiny, 0, 1e-6),
            Err(Error::Precondition(_))
        ));
    }
}
