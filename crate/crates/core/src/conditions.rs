//! Numeric condition checkers, b-decomposition schemes and the N̂/M̂
//! quantities of the induction inequality.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{projected_counts, projected_counts_coloring, ProjectedCounts, DEFAULT_BUDGET};
use crate::interval::{decide, Interval, Verdict};
use crate::model::{
    coloring_csp, make_coloring_projection, Constraint, Csp, Hypergraph, ProjectionScheme,
};
use crate::poly::f64_to_rational;

fn int(p: u32, n: u64) -> Interval {
    Interval::int(p, n as i64)
}

fn ln_int(p: u32, n: u64) -> Result<Interval> {
    int(p, n).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionItem {
    pub name: String,
    pub verdict: Verdict,
    /// Decimal value of the left side (logs where the item says so).
    pub value: String,
    pub bound: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub pass: bool,
    pub verdict: Verdict,
    pub items: Vec<ConditionItem>,
    pub quantities: BTreeMap<String, String>,
    /// Side booleans that are not part of the verdict.
    pub flags: BTreeMap<String, bool>,
    pub precision_bits: u32,
}

impl ConditionReport {
    pub fn item(&self, name_prefix: &str) -> Option<&ConditionItem> {
        self.items.iter().find(|i| i.name.starts_with(name_prefix))
    }
}

#[derive(Default)]
struct Draft {
    items: Vec<ConditionItem>,
    quantities: BTreeMap<String, String>,
    flags: BTreeMap<String, bool>,
}

impl Draft {
    /// Strict `value < bound`; equality fails.
    fn lt(&mut self, name: &str, value: &Interval, bound: &Interval) {
        self.items.push(ConditionItem {
            name: name.into(),
            verdict: value.lt(bound),
            value: value.to_decimal(),
            bound: bound.to_decimal(),
        });
    }

    fn exact(&mut self, name: &str, ok: bool, value: String, bound: String) {
        self.items.push(ConditionItem {
            name: name.into(),
            verdict: Verdict::from_bool(ok),
            value,
            bound,
        });
    }

    fn q(&mut self, name: &str, x: &Interval) {
        self.quantities.insert(name.into(), x.to_decimal());
    }

    fn verdict(&self) -> Verdict {
        self.items
            .iter()
            .fold(Verdict::Pass, |v, i| v.and(i.verdict))
    }
}

fn run(condition: &str, f: impl Fn(u32) -> Result<Draft>) -> Result<ConditionReport> {
    let (verdict, d, prec) = decide(|p| {
        let d = f(p)?;
        Ok((d.verdict(), d))
    })?;
    Ok(ConditionReport {
        condition: condition.into(),
        pass: verdict == Verdict::Pass,
        verdict,
        items: d.items,
        quantities: d.quantities,
        flags: d.flags,
        precision_bits: prec,
    })
}

/// |λ − λ_c| < γ exactly; `None` when no λ is given.
fn in_disk(lam: Option<Complex64>, lambda_c: f64, gamma: &BigRational) -> Option<bool> {
    lam.map(|l| {
        let dr = f64_to_rational(l.re) - f64_to_rational(lambda_c);
        let di = f64_to_rational(l.im);
        &dr * &dr + &di * &di < gamma * gamma
    })
}

// ---- coloring ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoringParams {
    pub k: u64,
    pub delta: u64,
    pub q: u64,
    pub b: u64,
    pub s: u64,
    pub lambda_c: f64,
    #[serde(default)]
    pub lambda: Option<Complex64>,
}

impl ColoringParams {
    pub fn new(k: u64, delta: u64, q: u64, b: u64, lambda_c: f64) -> Result<Self> {
        if k < 2 || delta == 0 || b == 0 || q <= b {
            return Err(Error::param(format!(
                "need k >= 2, delta >= 1, 1 <= B < q; got k={k}, delta={delta}, q={q}, B={b}"
            )));
        }
        Ok(Self {
            k,
            delta,
            q,
            b,
            s: (q - 1) / b,
            lambda_c,
            lambda: None,
        })
    }

    pub fn with_lambda(mut self, lam: Complex64) -> Self {
        self.lambda = Some(lam);
        self
    }

    /// γ = 1/(16Δ²k⁵).
    pub fn gamma(&self) -> BigRational {
        crate::zerofree::coloring_gamma(self.k, self.delta)
    }

    /// ϱ = 608qΔ²k⁵.
    pub fn rho(&self) -> BigInt {
        BigInt::from(608u32)
            * self.q
            * BigInt::from(self.delta).pow(2)
            * BigInt::from(self.k).pow(5)
    }
}

pub fn check_coloring_condition(p: &ColoringParams) -> Result<ConditionReport> {
    let gamma = p.gamma();
    run("coloring", |pr| {
        let mut d = Draft::default();
        let e = Interval::e(pr);
        let (k, dl, q, s) = (p.k, p.delta, p.q, p.s);
        // ln(608e q²Δ³k⁵) < k ln s
        let lhs = ln_int(pr, 608)?
            .add(&e.ln()?)
            .add(&ln_int(pr, q)?.scale(2))
            .add(&ln_int(pr, dl)?.scale(3))
            .add(&ln_int(pr, k)?.scale(5));
        let rhs = ln_int(pr, s)?.scale(k as i64);
        d.lt("1: ln(608e q^2 D^3 k^5) < k ln s", &lhs, &rhs);
        // ln(16e²Δ²k⁴ q (4s/q)^k) < 0
        let ratio = int(pr, 4 * s).div(&int(pr, q))?;
        let lhs = ln_int(pr, 16)?
            .add(&int(pr, 2))
            .add(&ln_int(pr, dl)?.scale(2))
            .add(&ln_int(pr, k)?.scale(4))
            .add(&ln_int(pr, q)?)
            .add(&ratio.ln()?.scale(k as i64));
        d.lt("2: ln(16e^2 D^2 k^4 q (4s/q)^k) < 0", &lhs, &int(pr, 0));
        let in_range = (0.0..=1.0).contains(&p.lambda_c);
        let disk = in_disk(p.lambda, p.lambda_c, &gamma);
        d.exact(
            "3: lambda_c in [0,1] and |lambda - lambda_c| < gamma",
            in_range && disk.unwrap_or(true),
            format!("lambda_c={}, lambda={:?}", p.lambda_c, p.lambda),
            format!("gamma={gamma}"),
        );
        d.q("gamma", &Interval::rational(pr, &gamma));
        d.q("rho", &Interval::big(pr, &p.rho()));
        d.q("s", &int(pr, s));
        Ok(d)
    })
}

fn ceil_root_ok(q: &BigInt, exp: u32, target: &BigInt) -> bool {
    q.pow(exp) >= *target
}

/// Parameters of the large-k coloring regime: the least q with
/// q^{k−10} ≥ 700^{k−10}Δ⁵, B = ⌊q^{2/5}⌋, s = ⌊(q−1)/B⌋, λ_c = 1.
pub fn derive_coloring_params(k: u64, delta: u64) -> Result<ColoringParams> {
    if k < 50 {
        return Err(Error::param(format!(
            "the derivation needs k >= 50, got {k}"
        )));
    }
    if delta == 0 {
        return Err(Error::param("delta must be positive"));
    }
    let e = (k - 10) as u32;
    let target = BigInt::from(700u32).pow(e) * BigInt::from(delta).pow(5);
    let guess = (700.0 * (delta as f64).powf(5.0 / (k - 10) as f64)).ceil() as u64;
    let mut q = BigInt::from(guess.saturating_sub(2).max(2));
    while !ceil_root_ok(&q, e, &target) {
        q += 1;
    }
    while q > BigInt::from(2) && ceil_root_ok(&(&q - 1), e, &target) {
        q -= 1;
    }
    let q = q.to_u64().expect("q fits in u64");
    let q2 = BigInt::from(q).pow(2);
    let mut b = (q as f64).powf(0.4).floor() as u64 + 1;
    while BigInt::from(b).pow(5) > q2 {
        b -= 1;
    }
    ColoringParams::new(k, delta, q, b, 1.0)
}

// ---- CNF ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CnfParams {
    pub k: u64,
    pub delta: u64,
    /// Fractions used in the exponent of item 2a.
    pub alpha: f64,
    pub beta: f64,
    pub k_mk: u64,
    pub k_umk: u64,
    pub lambda_c: f64,
    #[serde(default)]
    pub lambda: Option<Complex64>,
}

impl CnfParams {
    /// k_mk = ⌈αk⌉, k_umk = ⌈βk⌉.
    pub fn new(k: u64, delta: u64, alpha: f64, beta: f64, lambda_c: f64) -> Result<Self> {
        let k_mk = (f64_to_rational(alpha) * BigRational::from_integer(k.into()))
            .ceil()
            .to_integer()
            .to_u64();
        let k_umk = (f64_to_rational(beta) * BigRational::from_integer(k.into()))
            .ceil()
            .to_integer()
            .to_u64();
        match (k_mk, k_umk) {
            (Some(a), Some(b)) => Self::with_counts(k, delta, alpha, beta, a, b, lambda_c),
            _ => Err(Error::param("alpha and beta must be nonnegative")),
        }
    }

    pub fn with_counts(
        k: u64,
        delta: u64,
        alpha: f64,
        beta: f64,
        k_mk: u64,
        k_umk: u64,
        lambda_c: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha + beta < 1.0) {
            return Err(Error::param(format!(
                "need alpha, beta > 0 and alpha + beta < 1; got {alpha}, {beta}"
            )));
        }
        if k_mk + k_umk > k {
            return Err(Error::param(format!(
                "k_mk + k_umk = {} exceeds k = {k}",
                k_mk + k_umk
            )));
        }
        if delta == 0 || k == 0 || lambda_c < 0.0 {
            return Err(Error::param("need k, delta >= 1 and lambda_c >= 0"));
        }
        Ok(Self {
            k,
            delta,
            alpha,
            beta,
            k_mk,
            k_umk,
            lambda_c,
            lambda: None,
        })
    }

    pub fn with_lambda(mut self, lam: Complex64) -> Self {
        self.lambda = Some(lam);
        self
    }

    /// s = 2000Δ²k⁵.
    pub fn s(&self) -> BigInt {
        BigInt::from(2000u32) * BigInt::from(self.delta).pow(2) * BigInt::from(self.k).pow(5)
    }

    pub fn gamma(&self) -> BigRational {
        BigRational::new(BigInt::one(), self.s())
    }
}

fn cnf_ratio(p: &CnfParams, pr: u32) -> Result<Interval> {
    let g = Interval::rational(pr, &p.gamma());
    let lc = Interval::f64(pr, p.lambda_c);
    let one = int(pr, 1);
    one.max(&lc.add(&g)).div(&one.add(&lc).sub(&g))
}

pub fn check_cnf_condition(p: &CnfParams) -> Result<ConditionReport> {
    let gamma = p.gamma();
    run("cnf", |pr| {
        let mut d = Draft::default();
        let e = Interval::e(pr);
        let (k, dl) = (p.k, p.delta);
        let ln2 = ln_int(pr, 2)?;
        let a = Interval::f64(pr, p.alpha);
        let b = Interval::f64(pr, p.beta);
        let one = int(pr, 1);
        // 2^k ≥ (4eΔk)^{6 ln2 (1+α−β)/(1−α−β)²}
        let num = ln2.scale(6).mul(&one.add(&a).sub(&b));
        let den = one.sub(&a).sub(&b);
        let expo = num.div(&den.mul(&den))?;
        let lhs = expo.mul(&ln_int(pr, 4 * dl * k)?.add(&e.ln()?));
        d.lt(
            "2a: (6 ln2 (1+a-b)/(1-a-b)^2) ln(4e D k) < k ln 2",
            &lhs,
            &ln2.scale(k as i64),
        );
        // k_mk ln ratio < −ln(16e³Δ²k⁴)
        let ratio = cnf_ratio(p, pr)?;
        let lhs = ratio.ln()?.scale(p.k_mk as i64);
        let rhs = ln_int(pr, 16)?
            .add(&int(pr, 3))
            .add(&ln_int(pr, dl)?.scale(2))
            .add(&ln_int(pr, k)?.scale(4))
            .neg();
        d.lt(
            "2b: k_mk ln(max{1,lc+g}/(1+lc-g)) < -ln(16e^3 D^2 k^4)",
            &lhs,
            &rhs,
        );
        // 2^{k_umk} ≥ 4000eΔ³k⁵
        let lhs = ln_int(pr, 4000)?
            .add(&int(pr, 1))
            .add(&ln_int(pr, dl)?.scale(3))
            .add(&ln_int(pr, k)?.scale(5));
        d.lt(
            "2c: ln(4000e D^3 k^5) < k_umk ln 2",
            &lhs,
            &ln2.scale(p.k_umk as i64),
        );
        let disk = in_disk(p.lambda, p.lambda_c, &gamma);
        d.exact(
            "3: lambda_c >= 0 and |lambda - lambda_c| < gamma",
            p.lambda_c >= 0.0 && disk.unwrap_or(true),
            format!("lambda_c={}, lambda={:?}", p.lambda_c, p.lambda),
            format!("gamma={gamma}"),
        );
        // k ≥ 12 log₂Δ + 24 log₂k + 57
        let rhs = ln_int(pr, dl)?
            .scale(12)
            .add(&ln_int(pr, k)?.scale(24))
            .div(&ln2)?
            .add(&int(pr, 57));
        let closed = rhs.hi <= k;
        d.flags
            .insert("k >= 12 log2 D + 24 log2 k + 57".into(), closed);
        d.q("closed_form_rhs", &rhs);
        d.q("exponent", &expo);
        d.q("ratio", &ratio);
        d.q("gamma", &Interval::rational(pr, &gamma));
        Ok(d)
    })
}

// ---- ζ and the limit-theorem conditions ----

fn zeta_interval(r: &Interval) -> Result<Interval> {
    let p = r.lo.prec();
    let two_minus = int(p, 2).sub(r);
    let l = two_minus.ln()?;
    let den = int(p, 1).div(r)?.ln()?.sub(&l);
    l.scale(2).div(&den)
}

/// ζ = 2 ln(2 − r)/(ln(1/r) − ln(2 − r)) for r ∈ (0, 1).
pub fn zeta(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::param(format!("zeta needs r in (0,1), got {r}")));
    }
    Ok(zeta_interval(&Interval::f64(128, r))?.mid_f64())
}

fn positive_lambda(lam: f64) -> Result<()> {
    if lam > 0.0 && lam.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("lambda must be positive, got {lam}")))
    }
}

pub fn check_chebyshev_condition(k: u64, delta: u64, q: u64, lam: f64) -> Result<ConditionReport> {
    positive_lambda(lam)?;
    if q < 2 || k < 1 || delta == 0 {
        return Err(Error::param("need q >= 2, k >= 1, delta >= 1"));
    }
    run("chebyshev", |pr| {
        let mut d = Draft::default();
        let l = Interval::f64(pr, lam);
        let one = int(pr, 1);
        let r = one.max(&l).div(&int(pr, q - 1).add(&l))?;
        let z = zeta_interval(&r)?;
        let lhs = int(pr, 8)
            .mul(&Interval::e(pr))
            .ln()?
            .scale(3)
            .add(&one.max(&one.div(&l)?).ln()?)
            .add(&r.ln()?.scale(k as i64 - 1))
            .add(&int(pr, 2).add(&z).mul(&ln_int(pr, delta * k + 1)?));
        d.lt(
            "ln((8e)^3 max{1,1/l} r^(k-1) (Dk+1)^(2+zeta)) < 0",
            &lhs,
            &int(pr, 0),
        );
        d.q("r_max", &r);
        d.q("zeta", &z);
        Ok(d)
    })
}

fn q_star_check(q: u64, q_star: u64) -> Result<()> {
    if q_star == 0 || q_star >= q {
        return Err(Error::param(format!(
            "need 0 < q* < q, got q*={q_star}, q={q}"
        )));
    }
    Ok(())
}

pub fn check_clt_condition(
    k: u64,
    delta: u64,
    q: u64,
    q_star: u64,
    lam: f64,
) -> Result<ConditionReport> {
    positive_lambda(lam)?;
    q_star_check(q, q_star)?;
    run("clt", |pr| {
        let mut d = Draft::default();
        let l = Interval::f64(pr, lam);
        let one = int(pr, 1);
        let dd = int(pr, q - q_star).add(&int(pr, q_star).mul(&l));
        let r = one.max(&l).div(&dd)?;
        let z = zeta_interval(&r)?;
        let lhs = ln_int(pr, 16)?
            .add(&int(pr, 2))
            .add(&dd.ln()?.scale(2))
            .sub(&l.mul(&int(pr, q - q_star)).ln()?)
            .add(&r.ln()?.scale(2 * (k as i64 - 1)).div(&int(pr, 2).add(&z))?)
            .add(&ln_int(pr, delta * k + 1)?.scale(4));
        d.lt(
            "ln(16e^2 D'^2/(l(q-q*)) r^(2(k-1)/(2+zeta)) (Dk+1)^4) < 0",
            &lhs,
            &int(pr, 0),
        );
        d.q("r_max", &r);
        d.q("zeta", &z);
        Ok(d)
    })
}

/// B₁ = ⌊q^{3/4}⌋ and B₂ = ⌊q^{1/2}⌋, exactly.
pub fn lclt_buckets(q: u64) -> (u64, u64) {
    let q3 = BigInt::from(q).pow(3);
    let mut b1 = (q as f64).powf(0.75) as u64 + 1;
    while BigInt::from(b1).pow(4) > q3 {
        b1 -= 1;
    }
    let mut b2 = (q as f64).sqrt() as u64 + 1;
    while b2 * b2 > q {
        b2 -= 1;
    }
    (b1, b2)
}

#[allow(clippy::too_many_arguments)]
pub fn check_lclt_condition(
    k: u64,
    delta: u64,
    q: u64,
    q_star: u64,
    lam: f64,
    b1: u64,
    b2: u64,
) -> Result<ConditionReport> {
    positive_lambda(lam)?;
    q_star_check(q, q_star)?;
    if b1 < b2 || b2 == 0 || b1 > q {
        return Err(Error::param(format!(
            "need 1 <= B2 <= B1 <= q, got B1={b1}, B2={b2}, q={q}"
        )));
    }
    run("lclt", |pr| {
        let mut d = Draft::default();
        let e = Interval::e(pr);
        let ke = k as i64;
        // p_proj ≤ ((⌈B1/B2⌉+1)⌈(q−1)/B1⌉/q)^k
        let pp = int(pr, (b1.div_ceil(b2) + 1) * (q - 1).div_ceil(b1))
            .div(&int(pr, q))?
            .ln()?
            .scale(ke);
        let lhs = ln_int(pr, 2)?
            .add(&int(pr, 2))
            .add(&pp)
            .add(&ln_int(pr, delta * k)?.scale(2));
        d.lt("1: ln(2e^2 p_proj (Dk)^2) < 0", &lhs, &int(pr, 0));
        d.q("ln_p_proj", &pp);
        // p_cond ≤ (1/((⌊B1/B2⌋−1)⌊(q−1)/B1⌋))^k
        let m = (b1 / b2).saturating_sub(1) * ((q - 1) / b1);
        if m == 0 {
            d.exact(
                "2: ln(2e p_cond q D k) < 0",
                false,
                "p_cond bound is vacuous".into(),
                "0".into(),
            );
        } else {
            let pc = ln_int(pr, m)?.scale(-ke);
            let lhs = ln_int(pr, 2)?
                .add(&e.ln()?)
                .add(&pc)
                .add(&ln_int(pr, q * delta * k)?);
            d.lt("2: ln(2e p_cond q D k) < 0", &lhs, &int(pr, 0));
            d.q("ln_p_cond", &pc);
        }
        let l = Interval::f64(pr, lam);
        let one = int(pr, 1);
        let dd = int(pr, q - q_star).add(&int(pr, q_star).mul(&l));
        let r = one.max(&l).div(&dd)?;
        let z = zeta_interval(&r)?;
        let lhs = int(pr, 8)
            .mul(&e)
            .ln()?
            .scale(3)
            .add(&dd.ln()?)
            .sub(&int(pr, q - q_star).min(&int(pr, q_star).mul(&l)).ln()?)
            .add(&r.ln()?.scale(ke - 1))
            .add(&int(pr, 2).add(&z).mul(&ln_int(pr, delta * k + 1)?));
        d.lt(
            "3: ln((8e)^3 D'/min{q-q*,q* l} r^(k-1) (Dk+1)^(2+zeta)) < 0",
            &lhs,
            &int(pr, 0),
        );
        d.q("r_max", &r);
        d.q("zeta", &z);
        Ok(d)
    })
}

// ---- decomposition schemes ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeTag {
    Coloring,
    Cnf,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarDecomposition {
    /// Indexed by bucket.
    pub b: Vec<Complex64>,
    pub bottom: Complex64,
}

impl VarDecomposition {
    pub fn total(&self) -> Complex64 {
        self.b.iter().sum::<Complex64>() + self.bottom
    }
    pub fn abs_mass(&self) -> f64 {
        self.b.iter().map(|x| x.norm()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionScheme {
    pub tag: SchemeTag,
    pub vars: Vec<VarDecomposition>,
    /// λ outside the declared disk and similar out-of-regime notes.
    pub warnings: Vec<String>,
}

impl DecompositionScheme {
    pub fn max_normalization_error(&self) -> f64 {
        self.vars
            .iter()
            .map(|v| (v.total() - 1.0).norm())
            .fold(0.0, f64::max)
    }

    pub fn check_projection(&self, proj: &ProjectionScheme) -> Result<()> {
        if self.vars.len() != proj.n()
            || self
                .vars
                .iter()
                .zip(proj.vars())
                .any(|(d, p)| d.b.len() != p.buckets as usize)
        {
            return Err(Error::invalid(
                "decomposition scheme does not match the projection",
            ));
        }
        Ok(())
    }
}

fn disk_warning(lam: Complex64, lambda_c: f64, gamma: &BigRational) -> Vec<String> {
    if in_disk(Some(lam), lambda_c, gamma) == Some(true) {
        Vec::new()
    } else {
        vec![format!(
            "lambda {lam} is not strictly inside the disk of radius {gamma} around {lambda_c}"
        )]
    }
}

/// b(1▲) = 0, b(x) = |f⁻¹(x)|(1 − 1/ϱ)/(q−1+λ), b(⊥) = λ/(q−1+λ) + (q−1)/(ϱ(q−1+λ)).
pub fn build_coloring_decomposition(
    p: &ColoringParams,
    n: usize,
    lam: Complex64,
) -> Result<DecompositionScheme> {
    let proj = make_coloring_projection(p.q as u32, p.b as u32)?;
    let den = lam + (p.q - 1) as f64;
    if f64_to_rational(den.re).is_zero() && f64_to_rational(lam.im).is_zero() {
        return Err(Error::param("q - 1 + lambda = 0"));
    }
    let rho = p.rho().to_f64().unwrap();
    let sizes = proj.preimage_sizes();
    let b: Vec<Complex64> = sizes
        .iter()
        .enumerate()
        .map(|(x, &sz)| {
            if x == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                sz as f64 * (1.0 - 1.0 / rho) / den
            }
        })
        .collect();
    let bottom = lam / den + (p.q - 1) as f64 / (rho * den);
    Ok(DecompositionScheme {
        tag: SchemeTag::Coloring,
        vars: vec![VarDecomposition { b, bottom }; n],
        warnings: disk_warning(lam, p.lambda_c, &p.gamma()),
    })
}

/// The same scheme at rational λ: bucket values then b(⊥).
pub fn coloring_decomposition_rational(
    p: &ColoringParams,
    lam: &BigRational,
) -> Result<Vec<BigRational>> {
    let proj = make_coloring_projection(p.q as u32, p.b as u32)?;
    let den = lam + BigRational::from_integer((p.q - 1).into());
    if den.is_zero() {
        return Err(Error::param("q - 1 + lambda = 0"));
    }
    let rho = BigRational::from_integer(p.rho());
    let keep = BigRational::one() - rho.recip();
    let mut out: Vec<BigRational> = proj
        .preimage_sizes()
        .iter()
        .enumerate()
        .map(|(x, &sz)| {
            if x == 0 {
                BigRational::zero()
            } else {
                BigRational::from_integer(sz.into()) * &keep / &den
            }
        })
        .collect();
    out.push(lam / &den + BigRational::from_integer((p.q - 1).into()) / (rho * &den));
    Ok(out)
}

/// Marked variables (two buckets): with E = e^{1/s}, D = 1 + E(λ−1)/2,
/// b(0▲) = (1 − E/2)/D, b(1▲) = λ(1 − E/2)/D, b(⊥) = λ(E − 1)/D.
/// Unmarked variables: b(▲) = 1, b(⊥) = 0.
pub fn build_cnf_decomposition(
    p: &CnfParams,
    proj: &ProjectionScheme,
    lam: Complex64,
) -> Result<DecompositionScheme> {
    let s = p.s().to_f64().unwrap();
    let e = (1.0 / s).exp();
    let em1 = (1.0 / s).exp_m1();
    let dd = 1.0 + 0.5 * e * (lam - 1.0);
    if dd.norm() == 0.0 {
        return Err(Error::param("1 + e^{1/s}(lambda - 1)/2 = 0"));
    }
    let keep = 1.0 - 0.5 * e;
    let vars = proj
        .vars()
        .iter()
        .map(|v| match v.buckets {
            1 => Ok(VarDecomposition { b: vec![Complex64::new(1.0, 0.0)], bottom: Complex64::new(0.0, 0.0) }),
            2 if v.one == Some(1) => Ok(VarDecomposition { b: vec![keep / dd, lam * keep / dd], bottom: lam * em1 / dd }),
            _ => Err(Error::invalid("CNF scheme needs marked variables with buckets {0, 1} and unmarked with one bucket")),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecompositionScheme {
        tag: SchemeTag::Cnf,
        vars,
        warnings: disk_warning(lam, p.lambda_c, &p.gamma()),
    })
}

// ---- N̂ / M̂ ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsMode {
    ExactOnInstance,
    ClosedFormBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InductionBounds {
    pub mode: BoundsMode,
    pub k: u64,
    pub delta: u64,
    pub n_hat: f64,
    pub ln_n_hat: f64,
    pub m_hat: f64,
    /// ln(4eΔ²k⁴·N̂·M̂^{4Δ²k⁵}).
    pub ln_product: f64,
    /// Whether the product is strictly below 1/4.
    pub product_ok: bool,
}

fn ln_product_f64(k: u64, delta: u64, ln_n: f64, m_hat: f64) -> f64 {
    let (k, d) = (k as f64, delta as f64);
    (4.0 * d * d * k.powi(4)).ln() + 1.0 + ln_n + 4.0 * d * d * k.powi(5) * (m_hat - 1.0).ln_1p()
}

/// Exact N̂, M̂ from the projected counts of Φ' = Φ ∖ {c*}. `constraints`
/// is the full current set C_i, c* included.
pub fn nhat_mhat_from_counts(
    counts: &ProjectedCounts,
    constraints: &[Constraint],
    lam: Complex64,
    scheme: &DecompositionScheme,
    k: u64,
    delta: u64,
) -> Result<InductionBounds> {
    let proj = counts.projection();
    scheme.check_projection(proj)?;
    let n = proj.n();
    let radix = &counts.radix;
    let mut a = vec![0.0f64; n];
    for (u, (du, au)) in scheme.vars.iter().zip(a.iter_mut()).enumerate() {
        if du.bottom.norm() == 0.0 {
            continue;
        }
        let stride = radix.stride(u);
        let d = radix.dims()[u] as u64;
        let mut best = 0.0f64;
        for state in 0..radix.total() {
            if !(state / stride).is_multiple_of(d) {
                continue;
            }
            if let Some(psi) = counts.conditional(u, state, lam)? {
                let gap: f64 = psi.iter().zip(&du.b).map(|(x, b)| (x - b).norm()).sum();
                best = best.max(gap);
            }
        }
        *au = best;
    }
    let m_hat = (0..n)
        .map(|u| scheme.vars[u].abs_mass() + a[u])
        .fold(0.0, f64::max);
    let mut n_hat = 0.0f64;
    for c in constraints {
        let total: f64 = c
            .forbidden
            .iter()
            .map(|sigma| {
                c.vars
                    .iter()
                    .zip(sigma)
                    .map(|(&u, &x)| scheme.vars[u].b[proj.bucket_of(u, x) as usize].norm() + a[u])
                    .product::<f64>()
            })
            .sum();
        n_hat = n_hat.max(total);
    }
    let ln_n_hat = n_hat.ln();
    let ln_product = ln_product_f64(k, delta, ln_n_hat, m_hat);
    Ok(InductionBounds {
        mode: BoundsMode::ExactOnInstance,
        k,
        delta,
        n_hat,
        ln_n_hat,
        m_hat,
        ln_product,
        product_ok: ln_product < 0.25f64.ln(),
    })
}

/// c* is the last constraint; k and Δ are the arity and degree of `csp`.
pub fn compute_nhat_mhat_exact(
    csp: &Csp,
    proj: &ProjectionScheme,
    lam: Complex64,
    scheme: &DecompositionScheme,
) -> Result<InductionBounds> {
    let base = if csp.constraints().is_empty() {
        csp.clone()
    } else {
        csp.without(csp.constraints().len() - 1)
    };
    let counts = projected_counts(&base, proj, DEFAULT_BUDGET)?;
    if counts.polynomial().vanishes_at(lam) {
        return Err(Error::ZeroPartition("Z(Φ') vanishes".into()));
    }
    nhat_mhat_from_counts(
        &counts,
        csp.constraints(),
        lam,
        scheme,
        csp.arity() as u64,
        csp.max_degree() as u64,
    )
}

/// Coloring instances counted by inclusion–exclusion, so q may be large.
pub fn compute_nhat_mhat_coloring(
    h: &Hypergraph,
    q: u32,
    proj: &ProjectionScheme,
    lam: Complex64,
    scheme: &DecompositionScheme,
) -> Result<InductionBounds> {
    let base = if h.edges().is_empty() {
        h.clone()
    } else {
        h.without_last_edge()
    };
    let counts = projected_counts_coloring(&base, proj, DEFAULT_BUDGET)?;
    if counts.polynomial().vanishes_at(lam) {
        return Err(Error::ZeroPartition("Z(Φ') vanishes".into()));
    }
    let csp = coloring_csp(h, q)?;
    nhat_mhat_from_counts(
        &counts,
        csp.constraints(),
        lam,
        scheme,
        h.k() as u64,
        h.delta() as u64,
    )
}

fn decided_product(
    k: u64,
    delta: u64,
    ln_n: impl Fn(u32) -> Result<Interval>,
) -> Result<(Verdict, Interval)> {
    let (v, iv, _) = decide(|pr| {
        let m_minus = int(pr, 1).div(&int(pr, 4 * delta * delta * k.pow(5)))?;
        let lp = ln_int(pr, 4)?
            .add(&int(pr, 1))
            .add(&ln_int(pr, delta)?.scale(2))
            .add(&ln_int(pr, k)?.scale(4))
            .add(&ln_n(pr)?)
            .add(
                &int(pr, 1)
                    .add(&m_minus)
                    .ln()?
                    .scale(4 * (delta * delta) as i64 * k.pow(5) as i64),
            );
        let quarter = int(pr, 1).div(&int(pr, 4))?.ln()?;
        Ok((lp.lt(&quarter), lp))
    })?;
    Ok((v, iv))
}

/// N̂ ≤ e·q(4s/q)^k and M̂ ≤ 1 + 1/(4Δ²k⁵).
pub fn closed_form_bounds_coloring(p: &ColoringParams) -> Result<InductionBounds> {
    let rep = check_coloring_condition(p)?;
    if !rep.pass {
        return Err(Error::Precondition(
            "coloring condition does not pass".into(),
        ));
    }
    let ln_n = |pr: u32| -> Result<Interval> {
        Ok(int(pr, 1)
            .add(&ln_int(pr, p.q)?)
            .add(&int(pr, 4 * p.s).div(&int(pr, p.q))?.ln()?.scale(p.k as i64)))
    };
    let (v, lp) = decided_product(p.k, p.delta, ln_n)?;
    let ln_n_hat = ln_n(128)?.mid_f64();
    Ok(InductionBounds {
        mode: BoundsMode::ClosedFormBound,
        k: p.k,
        delta: p.delta,
        n_hat: ln_n_hat.exp(),
        ln_n_hat,
        m_hat: 1.0 + 1.0 / (4.0 * (p.delta * p.delta) as f64 * (p.k as f64).powi(5)),
        ln_product: lp.mid_f64(),
        product_ok: v == Verdict::Pass,
    })
}

/// N̂ ≤ e·(max{1,λ_c+γ}/(1+λ_c−γ))^{k_mk} and M̂ ≤ 1 + 1/(4Δ²k⁵).
pub fn closed_form_bounds_cnf(p: &CnfParams) -> Result<InductionBounds> {
    let rep = check_cnf_condition(p)?;
    if !rep.pass {
        return Err(Error::Precondition("CNF condition does not pass".into()));
    }
    let ln_n = |pr: u32| -> Result<Interval> {
        Ok(int(pr, 1).add(&cnf_ratio(p, pr)?.ln()?.scale(p.k_mk as i64)))
    };
    let (v, lp) = decided_product(p.k, p.delta, ln_n)?;
    let ln_n_hat = ln_n(128)?.mid_f64();
    Ok(InductionBounds {
        mode: BoundsMode::ClosedFormBound,
        k: p.k,
        delta: p.delta,
        n_hat: ln_n_hat.exp(),
        ln_n_hat,
        m_hat: 1.0 + 1.0 / (4.0 * (p.delta * p.delta) as f64 * (p.k as f64).powi(5)),
        ln_product: lp.mid_f64(),
        product_ok: v == Verdict::Pass,
    })
}

/// Items 1 and 3 of the coloring condition: the part that tiny instances
/// can satisfy. Item 2 needs k in the hundreds of bits of slack.
pub fn coloring_condition_scaled(p: &ColoringParams) -> Result<bool> {
    let rep = check_coloring_condition(p)?;
    Ok(rep
        .items
        .iter()
        .filter(|i| !i.name.starts_with("2:"))
        .all(|i| i.verdict == Verdict::Pass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_cnf_projection, Clause, CnfFormula};

    #[test]
    fn coloring_k50() {
        let p = ColoringParams::new(50, 1, 700, 13, 1.0).unwrap();
        assert_eq!(p.s, 53);
        let r = check_coloring_condition(&p).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.precision_bits, 128);
    }

    #[test]
    fn coloring_small_fails_item1() {
        let p = ColoringParams::new(3, 2, 5, 2, 1.0).unwrap();
        let r = check_coloring_condition(&p).unwrap();
        assert!(!r.pass);
        assert_eq!(r.item("1:").unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn coloring_lambda_c_out_of_range() {
        let p = ColoringParams::new(50, 1, 700, 13, 2.0).unwrap();
        let r = check_coloring_condition(&p).unwrap();
        assert_eq!(r.item("3:").unwrap().verdict, Verdict::Fail);
        let p = ColoringParams::new(50, 1, 700, 13, 1.0)
            .unwrap()
            .with_lambda(Complex64::new(1.0, 1e-9));
        assert_eq!(
            check_coloring_condition(&p)
                .unwrap()
                .item("3:")
                .unwrap()
                .verdict,
            Verdict::Fail
        );
        let p = p.with_lambda(Complex64::new(1.0, 1e-11));
        assert!(check_coloring_condition(&p).unwrap().pass);
    }

    #[test]
    fn derive_params() {
        let p = derive_coloring_params(50, 1).unwrap();
        assert_eq!((p.q, p.b, p.s), (700, 13, 53));
        let p = derive_coloring_params(50, 2).unwrap();
        assert_eq!(p.q, 764);
        assert!(check_coloring_condition(&p).unwrap().pass);
        assert!(derive_coloring_params(49, 1).is_err());
    }

    #[test]
    fn closed_form_k50() {
        let p = derive_coloring_params(50, 1).unwrap();
        let b = closed_form_bounds_coloring(&p).unwrap();
        assert!(b.product_ok);
        assert!(b.ln_product < 0.25f64.ln());
        let bad = ColoringParams::new(3, 2, 5, 2, 1.0).unwrap();
        assert!(matches!(
            closed_form_bounds_coloring(&bad),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn cnf_k300() {
        let p = CnfParams::new(300, 2, 0.171562, 0.257342, 1.0).unwrap();
        assert_eq!((p.k_mk, p.k_umk), (52, 78));
        let r = check_cnf_condition(&p).unwrap();
        assert_eq!(r.item("2a").unwrap().verdict, Verdict::Pass);
        assert!(r.pass, "{r:?}");
        assert!(r.flags["k >= 12 log2 D + 24 log2 k + 57"]);
        let b = closed_form_bounds_cnf(&p).unwrap();
        assert!(b.product_ok);
    }

    #[test]
    fn cnf_closed_form_flag() {
        let p = CnfParams::new(100, 2, 0.171562, 0.257342, 1.0).unwrap();
        let r = check_cnf_condition(&p).unwrap();
        assert!(!r.flags["k >= 12 log2 D + 24 log2 k + 57"]);
        assert!(CnfParams::with_counts(10, 1, 0.2, 0.3, 6, 5, 1.0).is_err());
    }

    #[test]
    fn zeta_values() {
        assert!((zeta(1.0 / 700.0).unwrap() - 0.23638).abs() < 5e-5);
        assert!(zeta(1.0 / 700.0).unwrap() <= 0.23638);
        assert!((zeta(1.0 / 1000.0).unwrap() - 0.2229).abs() < 1e-3);
        assert!(zeta(0.0).is_err() && zeta(1.0).is_err());
        let mut prev = 0.0;
        for i in 1..100 {
            let z = zeta(i as f64 / 100.0).unwrap();
            assert!(z > prev);
            prev = z;
        }
    }

    #[test]
    fn chebyshev_examples() {
        assert!(check_chebyshev_condition(6, 1000, 1000, 1.0).unwrap().pass);
        assert!(!check_chebyshev_condition(3, 460, 460, 1.0).unwrap().pass);
        assert!(check_chebyshev_condition(3, 460, 460, 0.0).is_err());
    }

    #[test]
    fn clt_examples() {
        assert!(check_clt_condition(50, 700, 700, 1, 1.0).unwrap().pass);
        assert!(!check_clt_condition(3, 2, 3, 1, 1.0).unwrap().pass);
        assert!(check_clt_condition(3, 2, 3, 3, 1.0).is_err());
    }

    #[test]
    fn lclt_examples() {
        assert_eq!(lclt_buckets(700), (136, 26));
        assert_eq!(lclt_buckets(16), (8, 4));
        assert!(
            check_lclt_condition(50, 1, 700, 1, 1.0, 136, 26)
                .unwrap()
                .pass
        );
        let r = check_lclt_condition(8, 2, 16, 1, 1.0, 8, 4).unwrap();
        assert_eq!(r.item("1:").unwrap().verdict, Verdict::Fail);
        assert!(check_lclt_condition(8, 2, 16, 1, 1.0, 3, 4).is_err());
    }

    #[test]
    fn coloring_scheme_normalized() {
        let p = ColoringParams::new(3, 2, 6, 2, 1.0).unwrap();
        let s = build_coloring_decomposition(&p, 4, Complex64::new(1.0, 0.0)).unwrap();
        assert!(s.max_normalization_error() < 1e-15);
        assert_eq!(s.vars[0].b[0], Complex64::new(0.0, 0.0));
        let rho = p.rho().to_f64().unwrap();
        assert!((s.vars[0].bottom.re - (1.0 / 6.0 + 5.0 / (rho * 6.0))).abs() < 1e-15);
        let r = coloring_decomposition_rational(&p, &BigRational::new(3.into(), 7.into())).unwrap();
        assert_eq!(r.iter().sum::<BigRational>(), BigRational::one());
        let s = build_coloring_decomposition(&p, 4, Complex64::new(0.3, 0.7)).unwrap();
        assert!(s.max_normalization_error() < 1e-15);
        assert!(!s.warnings.is_empty());
        assert!(build_coloring_decomposition(&p, 4, Complex64::new(-5.0, 0.0)).is_err());
    }

    #[test]
    fn cnf_scheme() {
        let f = CnfFormula::new(
            3,
            3,
            vec![Clause {
                vars: vec![0, 1, 2],
                neg: vec![false, true, false],
            }],
        )
        .unwrap();
        let proj = make_cnf_projection(&f, &[0]).unwrap();
        let p = CnfParams::new(3, 1, 0.3, 0.3, 1.0).unwrap();
        let s = build_cnf_decomposition(&p, &proj, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(s.vars[1].b, vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(s.vars[1].bottom, Complex64::new(0.0, 0.0));
        let e = (1.0 / p.s().to_f64().unwrap()).exp();
        assert!((s.vars[0].b[0].re - (1.0 - 0.5 * e)).abs() < 1e-15);
        assert!((s.vars[0].bottom.re - (e - 1.0)).abs() < 1e-15);
        let s = build_cnf_decomposition(&p, &proj, Complex64::new(0.5, 0.2)).unwrap();
        assert!(s.max_normalization_error() < 1e-15);
    }

    #[test]
    fn nhat_mhat_two_edge() {
        let h = Hypergraph::new(4, 3, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        let p = ColoringParams::new(3, 2, 6, 2, 1.0).unwrap();
        let proj = ProjectionScheme::uniform(4, make_coloring_projection(6, 2).unwrap());
        let lam = Complex64::new(1.0, 0.0);
        let scheme = build_coloring_decomposition(&p, 4, lam).unwrap();
        let csp = coloring_csp(&h, 6).unwrap();
        let a = compute_nhat_mhat_exact(&csp, &proj, lam, &scheme).unwrap();
        let b = compute_nhat_mhat_coloring(&h, 6, &proj, lam, &scheme).unwrap();
        assert!((a.n_hat - b.n_hat).abs() < 1e-12 && (a.m_hat - b.m_hat).abs() < 1e-12);
        let bound = std::f64::consts::E * 6.0 * (4.0 * 2.0 / 6.0f64).powi(3);
        assert!(a.n_hat <= bound);
        assert!(a.m_hat >= 1.0);
    }

    #[test]
    fn nhat_empty() {
        let csp = Csp::new(vec![6; 2], vec![]).unwrap();
        let proj = ProjectionScheme::uniform(2, make_coloring_projection(6, 2).unwrap());
        let p = ColoringParams::new(3, 1, 6, 2, 1.0).unwrap();
        let lam = Complex64::new(1.0, 0.0);
        let scheme = build_coloring_decomposition(&p, 2, lam).unwrap();
        let r = compute_nhat_mhat_exact(&csp, &proj, lam, &scheme).unwrap();
        assert_eq!(r.n_hat, 0.0);
        assert!(r.product_ok);
        assert!((r.m_hat - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nhat_undefined_marginal() {
        // a free variable with λ = −(q−1) has Σ_x N λ^{[x special]} = 0
        let csp = Csp::new(
            vec![3, 3],
            vec![Constraint {
                vars: vec![0, 1],
                forbidden: vec![vec![1, 1]],
            }],
        )
        .unwrap();
        let proj = ProjectionScheme::identity(&[3, 3], Some(0));
        let lam = Complex64::new(-2.0, 0.0);
        let scheme = DecompositionScheme {
            tag: SchemeTag::Custom,
            vars: vec![
                VarDecomposition {
                    b: vec![Complex64::new(0.0, 0.0); 3],
                    bottom: Complex64::new(1.0, 0.0)
                };
                2
            ],
            warnings: vec![],
        };
        let counts = projected_counts(
            &Csp::new(vec![3, 3], vec![]).unwrap(),
            &proj,
            DEFAULT_BUDGET,
        )
        .unwrap();
        let e = nhat_mhat_from_counts(&counts, csp.constraints(), lam, &scheme, 2, 1).unwrap_err();
        assert!(matches!(e, Error::Undefined(_)));
    }
}
