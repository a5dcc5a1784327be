//! Central Rankin–Selberg values and the constants of the interpolation
//! formula.  Complex-side values are compared only through ratios across
//! characters, so periods and global normalizations drop out.

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::{Complex, Float};
use serde::Serialize;

use crate::arith::{factor, gcd, ord};
use crate::error::{Error, Result};
use crate::heckechar::{check_conductor_case, gauss_sum, local_component_pbar, HeckeCharacter};
use crate::numerics::{abs, cpow_i, root_of_unity, to_strings, two_pi_i};
use crate::qexp::{Eigenform, QExpansion, RootChoice};
use crate::quadfield::{phi_m, primes_above, split_prime, ImagQuadField, KElem, Splitting};

/// Disjoint sets of primes attached to (M, N₀, conductor of φ, p).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PrimeSets {
    pub a: Vec<u64>,
    pub c1: Vec<u64>,
    pub ci: Vec<u64>,
    pub cr: Vec<u64>,
    pub csp: Vec<u64>,
    /// ν(l) = ord_l(N₀).
    pub nu: BTreeMap<u64, u32>,
    pub p_ramified: bool,
}

impl PrimeSets {
    pub fn nu(&self, l: u64) -> u32 {
        self.nu.get(&l).copied().unwrap_or(0)
    }

    /// C = C₁ ⊔ C_i ⊔ C_r ⊔ C_sp.
    pub fn c(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self.c1.iter().chain(&self.ci).chain(&self.cr).chain(&self.csp).copied().collect();
        out.sort_unstable();
        out
    }
}

/// Partition the primes of d₀(M)·N₀·cond(φ).  `phi_conductor` is the integer
/// N_ns p^s (or N_ns in the p-unramified case s = 0).
pub fn partition_primes(field: &ImagQuadField, n0: u64, phi_conductor: u64, p: u64, s: u32) -> Result<PrimeSets> {
    check_conductor_case(p, s, n0)?;
    let mut primes: Vec<u64> = factor(field.d0 as u64 * n0 * phi_conductor).into_iter().map(|(l, _)| l).collect();
    primes.sort_unstable();
    primes.dedup();
    let mut sets = PrimeSets { p_ramified: s >= 1, ..Default::default() };
    for &l in &primes {
        let v = ord(n0 as i128, l as i128);
        if v > 0 {
            sets.nu.insert(l, v);
        }
    }
    let ord2 = ord(field.d_m as i128, 2);
    for l in primes {
        if l == p && s >= 1 {
            sets.a.push(l);
        } else if field.d0 as u64 % l == 0 {
            sets.c1.push(l);
        } else if l == 2 && ord2 == 2 && sets.nu(2) > 2 {
            sets.cr.push(l);
        } else {
            match field.splitting(l) {
                Splitting::Inert => sets.ci.push(l),
                Splitting::Split => sets.csp.push(l),
                Splitting::Ramified => {
                    return Err(Error::Unsupported(format!("ramified prime {l} outside d0(M) and C_r")));
                }
            }
        }
    }
    Ok(sets)
}

/// Satake parameters (α_l, β_l) as complex numbers.
pub fn satake_table(f: &Eigenform, primes: &[u64], choice: RootChoice, prec: u32) -> Result<BTreeMap<u64, (Complex, Complex)>> {
    let mut out = BTreeMap::new();
    for &l in primes {
        let (a, b) = f.satake(l, choice)?;
        out.insert(l, (a.to_complex(prec), b.to_complex(prec)));
    }
    Ok(out)
}

fn sqrt_int(l: u64, prec: u32) -> Float {
    Float::with_val(prec, l).sqrt()
}

fn inverse_factor(x: Complex, l: u64) -> Result<Complex> {
    if x.is_zero() {
        return Err(Error::DivisionByZero(l));
    }
    let prec = x.prec().0;
    Ok(Complex::with_val(prec, 1) / x)
}

fn ramified_primes(field: &ImagQuadField) -> Vec<u64> {
    factor(field.d_m.unsigned_abs()).into_iter().map(|(l, _)| l).collect()
}

/// E(1/2): split primes of C_sp contribute one factor per prime above l,
/// primes dividing d(M) contribute both Satake factors.
pub fn euler_e_half(
    chi_minus: &HeckeCharacter,
    satake: &BTreeMap<u64, (Complex, Complex)>,
    sets: &PrimeSets,
    prec: u32,
) -> Result<Complex> {
    let field = chi_minus.field;
    let one = Complex::with_val(prec, 1);
    let mut acc = one.clone();
    let get = |l: u64| satake.get(&l).ok_or_else(|| Error::Unsupported(format!("no Satake data at {l}")));
    for &l in &sets.csp {
        let (al, _) = get(l)?;
        if al.is_zero() {
            return Err(Error::VanishingSplitCoefficient(l));
        }
        for q in primes_above(&field, l) {
            let x = chi_minus.eval(&q, prec)?;
            let term = Complex::with_val(prec, &x * al) / sqrt_int(l, prec);
            acc *= inverse_factor(Complex::with_val(prec, &one - term), l)?;
        }
    }
    for l in ramified_primes(&field) {
        let (al, bl) = get(l)?;
        let q = primes_above(&field, l)[0];
        let x = chi_minus.eval(&q, prec)?;
        for root in [al, bl] {
            let term = Complex::with_val(prec, &x * root) / sqrt_int(l, prec);
            acc *= inverse_factor(Complex::with_val(prec, &one - term), l)?;
        }
    }
    Ok(acc)
}

/// E′(m), with c(ψ) the conductor of the nebentypus.
pub fn euler_e_prime(
    chi_minus: &HeckeCharacter,
    satake: &BTreeMap<u64, (Complex, Complex)>,
    sets: &PrimeSets,
    m: u32,
    k: u32,
    c_psi: u64,
    prec: u32,
) -> Result<Complex> {
    let field = chi_minus.field;
    let one = Complex::with_val(prec, 1);
    let mut num = one.clone();
    let mut den = one.clone();
    for &l in &sets.csp {
        let (al, _) = satake.get(&l).ok_or_else(|| Error::Unsupported(format!("no Satake data at {l}")))?;
        if al.is_zero() {
            return Err(Error::VanishingSplitCoefficient(l));
        }
        let nu = sets.nu(l);
        let (lbar, lp) = split_prime(&field, l)?;
        let sl = sqrt_int(l, prec);
        let chi_bar = chi_minus.eval(&lbar, prec)?;
        let chi_l = chi_minus.eval(&lp, prec)?;
        let o = ord(c_psi as i128, l as i128);
        if o > 0 {
            let e = nu as i64 - o as i64;
            let lf = Float::with_val(prec, l);
            let pw = Float::with_val(prec, (&lf).pow(Float::with_val(prec, e) * (Float::with_val(prec, m) + (k as f64 - 1.0) / 2.0)));
            num *= cpow_i(al, e) / pw;
        } else {
            let t = Complex::with_val(prec, al * &sl) * &chi_bar;
            let f = Complex::with_val(prec, &one - inverse_factor(t, l)?);
            num *= cpow_i(al, nu as i64) * Float::with_val(prec, (&sl).pow(nu)) * cpow_i(&chi_bar, nu as i64) * f;
        }
        let t = Complex::with_val(prec, al * &sl) * &chi_l;
        let f = Complex::with_val(prec, &one - inverse_factor(t, l)?);
        den *= cpow_i(al, nu as i64) * Float::with_val(prec, (&sl).pow(nu)) * cpow_i(&chi_l, nu as i64) * f;
    }
    Ok(num / inverse_check(den)?)
}

fn inverse_check(x: Complex) -> Result<Complex> {
    if x.is_zero() {
        return Err(Error::DivisionByZero(0));
    }
    Ok(x)
}

/// c₂ from the 2-adic shape of d(M) and ν(2).
pub fn constant_c2(field: &ImagQuadField, nu2: u32) -> u64 {
    let o = ord(field.d_m as i128, 2);
    match (o, nu2) {
        (0, _) => 1,
        (_, n) if n >= 2 => 1,
        (2, 0) => 6,
        (3, 0) => 4,
        (_, 1) => 2,
        _ => 1,
    }
}

/// c₁ = [e^{−2πi/p^s}]*·√d(M)·(2i)^{−k−2m}·N^{k+2m}, √d(M) = i√|d(M)|.
pub fn constant_c1(field: &ImagQuadField, sets: &PrimeSets, p: u64, s: u32, k: u32, m: u32, n: u64, prec: u32) -> Complex {
    let w = (k + 2 * m) as i64;
    let mut c = Complex::with_val(prec, (0, sqrt_int(field.d_m.unsigned_abs(), prec)));
    if sets.p_ramified {
        c *= root_of_unity(p.pow(s), -1, prec);
    }
    let two_i = Complex::with_val(prec, (0, 2));
    c *= cpow_i(&two_i, -w);
    c * Float::with_val(prec, Float::with_val(prec, n).pow(w as i32))
}

/// v = ∏_{C_sp} l^ν / (c₂·[p^s(1 − 1/p)³]*·∏_{C_i} l^{2ν}(1 + 1/l)²(1 − 1/l)·∏_{C_r ∪ C₁, ν > 0}(1 − 1/l)).
pub fn constant_v(field: &ImagQuadField, sets: &PrimeSets, p: u64, s: u32, prec: u32) -> Float {
    let f = |x: u64| Float::with_val(prec, x);
    let mut num = f(1);
    for &l in &sets.csp {
        num *= f(l.pow(sets.nu(l)));
    }
    let mut den = f(constant_c2(field, sets.nu(2)));
    if sets.p_ramified {
        let one_minus = f(1) - f(1) / f(p);
        den *= f(p.pow(s)) * Float::with_val(prec, one_minus.pow(3));
    }
    for &l in &sets.ci {
        let nu = sets.nu(l);
        let a = f(1) + f(1) / f(l);
        den *= f(l.pow(2 * nu)) * Float::with_val(prec, (&a).pow(2)) * (f(1) - f(1) / f(l));
    }
    for &l in sets.cr.iter().chain(&sets.c1) {
        if sets.nu(l) > 0 {
            den *= f(1) - f(1) / f(l);
        }
    }
    num / den
}

/// χ⁻ on the rational idele l^ν at l.  Ring class parts are trivial on Q_l^×,
/// so only the infinity-type part evaluated on the ideal (l^ν) remains.
pub fn chi_at_rational(chi: &HeckeCharacter, l: u64, nu: u32, prec: u32) -> Result<Complex> {
    if chi.ray.is_some() {
        return Err(Error::Unsupported("local values of ray class parts".into()));
    }
    let bare = HeckeCharacter { ring: None, ring_inverted: false, ..chi.clone() };
    let ideal = chi.field.maximal_order().unit_ideal().scale(&KElem::int((l as i128).pow(nu)));
    bare.eval(&ideal, prec)
}

/// G = [χ⁻_p(p^s)⁻¹ G(χ⁻_𝔭̄)]*·∏_{l ∈ C} χ⁻_l(l^ν)⁻¹ (trivial nebentypus).
pub fn constant_g(chi_minus: &HeckeCharacter, sets: &PrimeSets, p: u64, s: u32, c_psi: u64, prec: u32) -> Result<Complex> {
    if c_psi != 1 {
        return Err(Error::Unsupported("G with a ramified nebentypus".into()));
    }
    let mut g = Complex::with_val(prec, 1);
    if sets.p_ramified {
        let local = local_component_pbar(chi_minus, p, s)?;
        let gs = gauss_sum(&local)?.to_complex(prec);
        let at_p = chi_at_rational(chi_minus, p, s, prec)?;
        g *= gs / at_p;
    }
    for l in sets.c() {
        let v = chi_at_rational(chi_minus, l, sets.nu(l), prec)?;
        g /= inverse_check(v)?;
    }
    Ok(g)
}

/// Ẽ(p) = 1 − a(p)x + ψ(p)p^{k−1}x² at x = χ_m(𝔭̄).
pub fn e_tilde_p(a_p: &Complex, psi_p: &Complex, k: u32, p: u64, x: &Complex) -> Complex {
    let prec = x.prec().0;
    let pk = Float::with_val(prec, Float::with_val(prec, p).pow(k as i32 - 1));
    let x2 = Complex::with_val(prec, x * x);
    Complex::with_val(prec, 1) - Complex::with_val(prec, a_p * x) + Complex::with_val(prec, psi_p * x2) * pk
}

/// C̃ = G(φ̃_p)·j^{k+2m}·|det|^m·(φ_Q(n)/(2φ_M(n)))⁻¹ with n = N_ns p^s.
pub fn c_tilde(gauss: &Complex, j_factor: &Complex, det_factor: &Float, k: u32, m: u32, field: &ImagQuadField, n: u64) -> Complex {
    let prec = gauss.prec().0;
    let w = (k + 2 * m) as i64;
    let pre = Float::with_val(prec, 2 * phi_m(field, n)) / Float::with_val(prec, crate::arith::euler_phi(n));
    let det = Float::with_val(prec, det_factor.pow(m));
    Complex::with_val(prec, gauss * cpow_i(j_factor, w)) * det * pre
}

/// Γ(k+m)Γ(m+1)/(2πi)^{k+2m+1}.
pub fn gamma_factor(k: u32, m: u32, prec: u32) -> Complex {
    let g1 = Float::with_val(prec, Float::factorial(k + m - 1));
    let g2 = Float::with_val(prec, Float::factorial(m));
    cpow_i(&two_pi_i(prec), -((k + 2 * m + 1) as i64)) * g1 * g2
}

/// b(n) of Σ a_f(n) a_θ(n) n^{−(k₁+k₂−2)/2} n^{−s} · L^{(Nd)}(2s, ψ).
pub fn rs_coefficients(f: &QExpansion, theta: &QExpansion, psi: &[Complex], nd: u64, prec: u32) -> Vec<Complex> {
    let d = f.truncation().min(theta.truncation());
    let shift = f64::from(f.weight + theta.weight - 2) / 2.0;
    let af = f.complex_coeffs(prec);
    let at = theta.complex_coeffs(prec);
    let mut c = vec![Complex::new(prec); d + 1];
    for n in 1..=d {
        let nf = Float::with_val(prec, n);
        let norm = Float::with_val(prec, nf.pow(shift));
        c[n] = Complex::with_val(prec, &af[n] * &at[n]) / norm;
    }
    let modulus = psi.len();
    let mut b = vec![Complex::new(prec); d + 1];
    for m in 1..=d {
        if m * m > d {
            break;
        }
        if gcd(m as i128, nd as i128) != 1 {
            continue;
        }
        let w = &psi[m % modulus];
        if w.is_zero() {
            continue;
        }
        let mut n = m * m;
        let mut j = 1;
        while n <= d {
            let t = Complex::with_val(prec, w * &c[j]);
            b[n] += t;
            j += 1;
            n += m * m;
        }
    }
    b
}

/// Plain truncation Σ_{n ≤ D} b(n) n^{−1/2}: reported, never trusted.
#[derive(Clone, Debug, Serialize)]
pub struct PlainTruncation {
    pub value: [String; 2],
    pub terms: usize,
    pub last_term: f64,
    pub flag: &'static str,
}

pub fn plain_truncation(b: &[Complex], truncation: usize, tol: f64) -> Result<PlainTruncation> {
    let prec = b[0].prec().0;
    let d = truncation.min(b.len() - 1);
    let mut acc = Complex::new(prec);
    let mut last = 0.0;
    for (n, bn) in b.iter().enumerate().take(d + 1).skip(1) {
        let t = Complex::with_val(prec, bn / Float::with_val(prec, n).sqrt());
        if !t.is_zero() {
            last = abs(&t).to_f64();
        }
        acc += t;
    }
    if last > tol {
        return Err(Error::SlowConvergence(last));
    }
    Ok(PlainTruncation { value: to_strings(&acc, 20), terms: d, last_term: last, flag: "NOT-RIGOROUS" })
}

/// Plain truncation of L^{(Nd)}(1/2) for f ⊗ θ, with the zeta correction
/// L^{(Nd)}(2s, ψ_f·χ_M) built from ψ_f and the Kronecker symbol of d(M).
pub fn rankin_selberg_central(
    f: &QExpansion,
    theta: &QExpansion,
    field: &ImagQuadField,
    nd: u64,
    truncation: usize,
    tol: f64,
    prec: u32,
) -> Result<PlainTruncation> {
    let psi = zeta_correction_character(f, field, prec);
    let b = rs_coefficients(&f.truncate(truncation), &theta.truncate(truncation), &psi, nd, prec);
    plain_truncation(&b, truncation, tol)
}

/// Values of ψ_f·χ_M on Z/(N·|d(M)|).
pub fn zeta_correction_character(f: &QExpansion, field: &ImagQuadField, prec: u32) -> Vec<Complex> {
    let modulus = f.nebentypus.modulus * field.d_m.unsigned_abs();
    (0..modulus)
        .map(|r| {
            let k = crate::arith::kronecker(field.d_m as i128, r);
            if k == 0 {
                return Complex::new(prec);
            }
            f.nebentypus.value(r as i128).to_complex(prec) * Float::with_val(prec, k)
        })
        .collect()
}

/// V(y) = (1/2πi)∫ Γ(u+a)Γ(u+b)/(Γ(a)Γ(b)) (4π²y)^{−u} du/u, computed as
/// 2^{2−a−b}/(Γ(a)Γ(b)) ∫_R^∞ r^{a+b−1} K_{b−a}(r) dr with R = 4π√y.
pub fn afe_kernel(a: u32, b: u32, y: f64) -> f64 {
    let r = 4.0 * std::f64::consts::PI * y.sqrt();
    let nu = f64::from(b - a);
    let n = (a + b - 1) as i32;
    let gamma = |x: u32| (1..x).map(f64::from).product::<f64>();
    let fact: Vec<f64> = (0..=n).map(|j| gamma(j as u32 + 1)).collect();
    // ∫_0^∞ cosh(νt) ∫_R^∞ r^n e^{−r cosh t} dr dt, inner integral in closed form
    let inner = |t: f64| {
        let c = t.cosh();
        let mut s = 0.0;
        for j in 0..=n {
            s += fact[n as usize] / fact[j as usize] * r.powi(j) / c.powi(n - j + 1);
        }
        (nu * t).cosh() * (-r * c).exp() * s
    };
    let h = 0.02;
    let tmax = if r > 0.0 { (800.0 / r).max(1.0).acosh() + 1.0 } else { 40.0 };
    let mut total = 0.5 * inner(0.0);
    let mut t = h;
    while t < tmax {
        total += inner(t);
        t += h;
    }
    let scale = 2f64.powi(2 - (a + b) as i32) / (gamma(a) * gamma(b));
    scale * total * h
}

/// Central value by the approximate functional equation with the root number
/// solved from two cutoffs.
#[derive(Clone, Debug, Serialize)]
pub struct AfeValue {
    pub value: [String; 2],
    pub root_number: [String; 2],
    pub consistency: f64,
    pub conductor: u64,
    pub terms: usize,
    pub flag: &'static str,
}

pub struct AfeResult {
    pub value: Complex,
    pub root_number: Complex,
    pub report: AfeValue,
}

pub fn rankin_selberg_afe(b: &[Complex], conductor: u64, a: u32, bb: u32, prec: u32) -> Result<AfeResult> {
    let sq = (conductor as f64).sqrt();
    let d = b.len() - 1;
    let part = |t: f64, dual: bool| {
        let mut acc = Complex::new(prec);
        for (n, bn) in b.iter().enumerate().skip(1) {
            if bn.is_zero() {
                continue;
            }
            let y = if dual { n as f64 * t / sq } else { n as f64 / (t * sq) };
            let v = afe_kernel(a, bb, y);
            if v < 1e-40 {
                break;
            }
            let c = if dual { Complex::with_val(prec, bn.conj_ref()) } else { bn.clone() };
            acc += c * Float::with_val(prec, v / (n as f64).sqrt());
        }
        acc
    };
    let last_y = d as f64 / (1.3 * sq);
    if afe_kernel(a, bb, last_y) > 1e-12 {
        return Err(Error::SlowConvergence(afe_kernel(a, bb, last_y)));
    }
    let (t1, t2, t3) = (1.0, 1.15, 1.3);
    let (a1, b1) = (part(t1, false), part(t1, true));
    let (a2, b2) = (part(t2, false), part(t2, true));
    let (a3, b3) = (part(t3, false), part(t3, true));
    let denom = Complex::with_val(prec, &b2 - &b1);
    if denom.is_zero() {
        return Err(Error::DivisionByZero(0));
    }
    let eps = Complex::with_val(prec, &a1 - &a2) / denom;
    let v1 = Complex::with_val(prec, &a1 + Complex::with_val(prec, &eps * &b1));
    let v3 = Complex::with_val(prec, &a3 + Complex::with_val(prec, &eps * &b3));
    let consistency = crate::numerics::rel_err(&v1, &v3);
    Ok(AfeResult {
        report: AfeValue {
            value: to_strings(&v1, 15),
            root_number: to_strings(&eps, 15),
            consistency,
            conductor,
            terms: d,
            flag: "NOT-RIGOROUS",
        },
        value: v1,
        root_number: eps,
    })
}

/// Conductor of L(π_f ⊗ χ) for squarefree N₀ prime to d(M), trivial ψ and a
/// character whose conductor is c·R with c = ∏ l^{e_l}.
pub fn rs_conductor(field: &ImagQuadField, n0: u64, c: u64) -> Result<u64> {
    let d = field.d_m.unsigned_abs();
    if gcd(n0 as i128, d as i128) != 1 || !crate::arith::is_squarefree(n0) {
        return Err(Error::Unsupported("conductor formula needs squarefree N0 prime to d(M)".into()));
    }
    let mut q: u64 = d * d;
    let mut primes: Vec<u64> = factor(n0 * c).into_iter().map(|(l, _)| l).collect();
    primes.dedup();
    for l in primes {
        let e = ord(c as i128, l as i128);
        let steinberg = n0 % l == 0;
        // exponent per prime of M above l, times the number of such primes
        let (count, norm_exp) = match field.splitting(l) {
            Splitting::Split => (2u32, 1u32),
            Splitting::Inert => (1, 2),
            Splitting::Ramified => return Err(Error::Unsupported(format!("ramified {l} in the level"))),
        };
        let a = if e == 0 { u32::from(steinberg) } else { 2 * e };
        q *= l.pow(count * norm_exp * a);
    }
    Ok(q)
}

/// Euler factor at l of the Rankin–Selberg L-function at s = 1/2, for primes
/// where a_θ(l^r) = t^r (one prime of M above l) or a_θ(l^r) = 0.
pub fn local_factor_half(f: &QExpansion, theta: &QExpansion, l: u64, prec: u32) -> Result<Complex> {
    let t = theta.coeff(l as usize).to_complex(prec);
    let one = Complex::with_val(prec, 1);
    if t.is_zero() {
        return Ok(one);
    }
    let shift = f64::from(f.weight + theta.weight - 2) / 2.0 + 0.5;
    let x = t / Float::with_val(prec, Float::with_val(prec, l).pow(shift));
    let al = f.coeff(l as usize).to_complex(prec);
    let psi = f.nebentypus.value(l as i128).to_complex(prec);
    let lk = Float::with_val(prec, Float::with_val(prec, l).pow(f.weight as i32 - 1));
    let x2 = Complex::with_val(prec, &x * &x);
    let den = one - al * &x + psi * lk * x2;
    inverse_factor(den, l)
}

/// Everything entering one ratio lhs²/rhs.
#[derive(Clone, Debug, Serialize)]
pub struct InterpolationReport {
    pub character: usize,
    pub period_sum: [String; 2],
    pub e_tilde: [String; 2],
    pub c_tilde: [String; 2],
    pub c1: [String; 2],
    pub v: String,
    pub g: [String; 2],
    pub e_half: [String; 2],
    pub e_prime: [String; 2],
    pub gamma: [String; 2],
    pub l_value: AfeValue,
    pub l_imprimitive: [String; 2],
    pub plain_truncation: PlainTruncation,
    pub lhs_squared: [String; 2],
    pub rhs: [String; 2],
    pub ratio: [String; 2],
    pub ratio_abs: f64,
}

/// The numbers feeding a ratio, kept at full precision.
pub struct RatioParts {
    pub ratio: Complex,
    pub report: InterpolationReport,
}

/// Assemble lhs = C̃·Ẽ·𝓛 and rhs = C̃²Ẽ²·c·Γ·E(1/2)E′(m)·L^{(Nd)} for one character.
#[allow(clippy::too_many_arguments)]
pub fn main_interpolation_report(
    index: usize,
    period_sum: &Complex,
    e_tilde: &Complex,
    c_tilde: &Complex,
    c: (&Complex, &Float, &Complex),
    e_half: &Complex,
    e_prime: &Complex,
    gamma: &Complex,
    afe: &AfeResult,
    l_imprimitive: &Complex,
    plain: PlainTruncation,
) -> RatioParts {
    let prec = period_sum.prec().0;
    let (c1, v, g) = c;
    let lhs = Complex::with_val(prec, c_tilde * e_tilde) * period_sum;
    let lhs2 = Complex::with_val(prec, &lhs * &lhs);
    let cc = Complex::with_val(prec, c1 * g) * v;
    let rhs = Complex::with_val(prec, c_tilde * c_tilde)
        * Complex::with_val(prec, e_tilde * e_tilde)
        * cc
        * gamma
        * e_half
        * e_prime
        * l_imprimitive;
    let ratio = Complex::with_val(prec, &lhs2 / &rhs);
    let s = |z: &Complex| to_strings(z, 15);
    let report = InterpolationReport {
        character: index,
        period_sum: s(period_sum),
        e_tilde: s(e_tilde),
        c_tilde: s(c_tilde),
        c1: s(c1),
        v: v.to_string_radix(10, Some(15)),
        g: s(g),
        e_half: s(e_half),
        e_prime: s(e_prime),
        gamma: s(gamma),
        l_value: afe.report.clone(),
        l_imprimitive: s(l_imprimitive),
        plain_truncation: plain,
        lhs_squared: s(&lhs2),
        rhs: s(&rhs),
        ratio: s(&ratio),
        ratio_abs: abs(&ratio).to_f64(),
    };
    RatioParts { ratio, report }
}

/// Inputs of a ratio run over the primitive ring class characters of
/// conductor N_ns p^s.
#[derive(Clone, Debug, Serialize)]
pub struct InterpolationConfig {
    pub p: u64,
    pub s: u32,
    pub m: u32,
    pub digits: u32,
    pub trunc: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct InterpolationRun {
    pub conductor: u64,
    pub prime_sets: PrimeSets,
    pub reports: Vec<InterpolationReport>,
    /// Characters left out, with the reason.
    pub excluded: Vec<(usize, String)>,
    /// max |r_i/r_j − 1| over included characters.
    pub spread: f64,
    /// Same, on |r_i|.
    pub spread_abs: f64,
    /// Same, on r_i·G_i/|G_i|: the ratio with the phase of the local
    /// constant G removed.
    pub spread_phase_corrected: f64,
}

/// Split and non-split parts of N₀ away from p.
fn level_parts(field: &ImagQuadField, n0: u64, p: u64) -> (u64, u64) {
    let (mut split, mut other) = (1, 1);
    for (l, e) in factor(n0) {
        if l == p {
            continue;
        }
        match field.splitting(l) {
            Splitting::Split => split *= l.pow(e),
            _ => other *= l.pow(e),
        }
    }
    (split, other)
}

fn max_pair_spread(values: &[Complex]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in values {
        for b in values {
            worst = worst.max(crate::numerics::rel_err(a, b));
        }
    }
    worst
}

/// Full ratio pipeline: period sums on the CM points, constants, and the
/// central value through the approximate functional equation.
pub fn interpolate(f: &Eigenform, field: ImagQuadField, cfg: &InterpolationConfig) -> Result<InterpolationRun> {
    use crate::heckechar::{characters_of, class_character_conductor, unitary_projection};
    use crate::nearly_holo::{e_tilde_from_convention, heegner_divisor, period_sum, LevelStructure, NearlyHoloExpansion, VP_CONVENTION};
    use crate::qexp::theta_series;
    use crate::quadfield::{enumerate_class_group, prime_to, DEFAULT_ENUM_BOUND};
    use std::sync::Arc;

    let (p, s, m) = (cfg.p, cfg.s, cfg.m);
    let prec = crate::numerics::prec_bits(cfg.digits);
    let n0 = f.newform_level;
    let k = f.base.weight;
    if s == 0 {
        return Err(Error::Unsupported("ratio runs need ring class characters of conductor p^s, s >= 1".into()));
    }
    if f.base.nebentypus.conductor() != 1 {
        return Err(Error::Unsupported("complex side needs trivial nebentypus".into()));
    }
    check_conductor_case(p, s, n0)?;
    split_prime(&field, p)?;
    let (n_split, n_ns) = level_parts(&field, n0, p);
    let c = n_ns * p.pow(s);
    let sets = partition_primes(&field, n0, c, p, s)?;
    let group = Arc::new(enumerate_class_group(&field.order(c), DEFAULT_ENUM_BOUND)?);
    let chars = characters_of(&group, 4096)?;
    let reps: Vec<_> = (0..group.size()).map(|i| prime_to(&field, &group.forms[i], p * c * n0)).collect();
    let structure = LevelStructure { divisor: heegner_divisor(&field, n_split)?, ring_index: c };
    let n = structure.level();
    let expansion = NearlyHoloExpansion::new(&f.base, prec).iterate(m);

    let mut sat_primes = sets.csp.clone();
    sat_primes.extend(ramified_primes(&field));
    let satake = satake_table(f, &sat_primes, RootChoice::UpperHalf, prec)?;
    let d_abs = field.d_m.unsigned_abs();
    let nd = n * d_abs;
    let psi = zeta_correction_character(&f.base, &field, prec);
    let conductor = rs_conductor(&field, n0, c)?;
    let base = f.base.truncate(cfg.trunc);
    let gamma = gamma_factor(k, m, prec);
    let one = Complex::with_val(prec, 1);

    let mut ratios = Vec::new();
    let mut corrected = Vec::new();
    let mut reports = Vec::new();
    let mut excluded = Vec::new();
    for (index, phi) in chars.iter().enumerate() {
        if class_character_conductor(&group, phi)? != c {
            continue;
        }
        let chi = HeckeCharacter::new(field, ((k + 2 * m) as i64, 0), Some((group.clone(), phi.clone())))?;
        let sum = period_sum(&expansion, &chi, &reps, &structure)?;
        let scale = sum.summands.iter().map(|z| abs(z).to_f64()).fold(0.0, f64::max);
        if abs(&sum.total).to_f64() <= 1e-20 * scale {
            excluded.push((index, "vanishing period sum".to_string()));
            continue;
        }
        let e_tilde = e_tilde_from_convention(&f.base, m, &chi, p, VP_CONVENTION, prec)?;
        let local = local_component_pbar(&chi, p, s)?;
        let gauss = gauss_sum(&local)?.to_complex(prec);
        let ct = c_tilde(&gauss, &one, &Float::with_val(prec, 1), k, m, &field, c);
        let chi_minus = unitary_projection(&chi)?;
        let e_half = euler_e_half(&chi_minus, &satake, &sets, prec)?;
        let e_prime = euler_e_prime(&chi_minus, &satake, &sets, m, k, 1, prec)?;
        let c1 = constant_c1(&field, &sets, p, s, k, m, n, prec);
        let v = constant_v(&field, &sets, p, s, prec);
        let g = constant_g(&chi_minus, &sets, p, s, 1, prec)?;
        let theta = theta_series(&chi, cfg.trunc)?;
        let b = rs_coefficients(&base, &theta, &psi, nd, prec);
        let afe = rankin_selberg_afe(&b, conductor, m + 1, k + m, prec)?;
        let mut removed = one.clone();
        for (l, _) in factor(nd) {
            removed *= local_factor_half(&base, &theta, l, prec)?;
        }
        let l_imp = Complex::with_val(prec, &afe.value / &removed);
        let plain = plain_truncation(&b, cfg.trunc, f64::INFINITY)?;
        let parts = main_interpolation_report(index, &sum.total, &e_tilde, &ct, (&c1, &v, &g), &e_half, &e_prime, &gamma, &afe, &l_imp, plain);
        let unit = Complex::with_val(prec, &g / abs(&g));
        corrected.push(Complex::with_val(prec, &parts.ratio * unit));
        ratios.push(parts.ratio);
        reports.push(parts.report);
    }
    let spread = max_pair_spread(&ratios);
    let abs_vals: Vec<Complex> = ratios.iter().map(|r| Complex::with_val(prec, abs(r))).collect();
    let spread_abs = max_pair_spread(&abs_vals);
    let spread_phase_corrected = max_pair_spread(&corrected);
    Ok(InterpolationRun { conductor: c, prime_sets: sets, reports, excluded, spread, spread_abs, spread_phase_corrected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{prec_bits, rel_err};

    #[test]
    fn partition_examples() {
        let k = ImagQuadField::new(-7).unwrap();
        let s = partition_primes(&k, 1, 1, 11, 0).unwrap();
        assert_eq!(s.c1, vec![7]);
        assert!(s.a.is_empty() && s.csp.is_empty() && s.ci.is_empty());
        let s = partition_primes(&k, 11, 11, 11, 1).unwrap();
        assert_eq!(s.a, vec![11]);
        let s = partition_primes(&k, 11, 1, 11, 0).unwrap();
        assert_eq!(s.csp, vec![11]);
        let s = partition_primes(&k, 3 * 11, 1, 11, 0).unwrap();
        assert_eq!(s.ci, vec![3]);
        assert!(matches!(partition_primes(&k, 121, 11, 11, 1), Err(Error::ConductorGap { .. })));
    }

    #[test]
    fn c2_table() {
        let odd = ImagQuadField::new(-7).unwrap();
        assert_eq!(constant_c2(&odd, 0), 1);
        let four = ImagQuadField::new(-4).unwrap();
        assert_eq!(constant_c2(&four, 0), 6);
        let eight = ImagQuadField::new(-8).unwrap();
        assert_eq!(constant_c2(&eight, 0), 4);
        assert_eq!(constant_c2(&eight, 1), 2);
        assert_eq!(constant_c2(&eight, 2), 1);
    }

    #[test]
    fn empty_products() {
        let prec = prec_bits(30);
        let k = ImagQuadField::new(-4).unwrap();
        let chi = HeckeCharacter::new(k, (0, 0), None).unwrap();
        let sets = PrimeSets::default();
        let sat = BTreeMap::from([(2u64, (Complex::with_val(prec, 0), Complex::with_val(prec, 0)))]);
        let e = euler_e_half(&chi, &sat, &sets, prec).unwrap();
        assert!(rel_err(&e, &Complex::with_val(prec, 1)) < 1e-30);
        let e = euler_e_prime(&chi, &sat, &sets, 0, 2, 1, prec).unwrap();
        assert!(rel_err(&e, &Complex::with_val(prec, 1)) < 1e-30);
        let v = constant_v(&k, &sets, 5, 0, prec);
        assert_eq!(v, Float::with_val(prec, 1) / 6u32);
    }

    #[test]
    fn e_tilde_satake_factorization() {
        let prec = prec_bits(30);
        // a_p = 2 cos-like integer with p = 5, ψ trivial
        let (ap, p, k) = (Complex::with_val(prec, -1), 5u64, 2u32);
        let x = Complex::with_val(prec, (0.3, -0.4));
        let e = e_tilde_p(&ap, &Complex::with_val(prec, 1), k, p, &x);
        // roots of Y² − a_p Y + p
        let disc = Complex::with_val(prec, &ap * &ap) - 4u32 * p as u32;
        let sq = disc.sqrt();
        let r1 = Complex::with_val(prec, &ap + &sq) / 2u32;
        let r2 = Complex::with_val(prec, &ap - &sq) / 2u32;
        let one = Complex::with_val(prec, 1);
        let prod = (one.clone() - r1 * &x) * (one - r2 * &x);
        assert!(rel_err(&e, &prod) < 1e-30);
        let zero = e_tilde_p(&Complex::with_val(prec, 0), &Complex::with_val(prec, 1), k, p, &Complex::with_val(prec, 1));
        assert!(rel_err(&zero, &Complex::with_val(prec, 1 + 5)) < 1e-30);
    }

    #[test]
    fn kernel_limits() {
        // V(0) = 1 and V decays
        assert!((afe_kernel(1, 2, 1e-12) - 1.0).abs() < 1e-9);
        assert!(afe_kernel(1, 2, 20.0) < 1e-15);
        // (1/2)R²K₂(R) at R = 1: K₂(1) = 1.624838898635177
        let y = (1.0 / (4.0 * std::f64::consts::PI)).powi(2);
        assert!((afe_kernel(1, 2, y) - 0.5 * 1.624838898635177).abs() < 1e-12);
    }

    #[test]
    fn rs_trivial_cases() {
        let prec = prec_bits(30);
        let f = QExpansion::from_ints(2, 1, &[1, 0, 0, 0]);
        let th = QExpansion::from_ints(3, 1, &[0, 0, 0, 0]);
        let psi = vec![Complex::with_val(prec, 1)];
        let b = rs_coefficients(&f, &th, &psi, 1, prec);
        assert!(b.iter().all(|x| x.is_zero()));
        let th = QExpansion::from_ints(3, 1, &[1, 5, 7, 2]);
        let b = rs_coefficients(&f, &th, &psi, 1, prec);
        let r = plain_truncation(&b, 4, 1.0).unwrap();
        assert_eq!(r.terms, 4);
        assert!(rel_err(&b[1], &Complex::with_val(prec, 1)) < 1e-30);
        assert!(rel_err(&b[4], &Complex::with_val(prec, 1)) < 1e-30);
    }

    #[test]
    fn central_value_examples() {
        let prec = prec_bits(30);
        let field = ImagQuadField::new(-7).unwrap();
        let f = QExpansion::from_ints(2, 11, &[1, 0, 0, 0, 0, 0]);
        let zero = QExpansion::from_ints(3, 49, &[0, 0, 0, 0, 0, 0]);
        let r = rankin_selberg_central(&f, &zero, &field, 77, 6, 1.0, prec).unwrap();
        assert_eq!(r.value[0].parse::<f64>().unwrap(), 0.0);
        let th = QExpansion::from_ints(3, 49, &[3, 0, 0, 0, 0, 0]);
        // below n = 4 the zeta correction contributes nothing
        let r = rankin_selberg_central(&f, &th, &field, 77, 3, 10.0, prec).unwrap();
        assert!((r.value[0].parse::<f64>().unwrap() - 3.0).abs() < 1e-15);
        // b(4) = χ_M(2)·b(1) = 3, last term 3/2
        assert!(matches!(
            rankin_selberg_central(&f, &th, &field, 77, 6, 1.0, prec),
            Err(Error::SlowConvergence(t)) if (t - 1.5).abs() < 1e-12
        ));
    }
}
