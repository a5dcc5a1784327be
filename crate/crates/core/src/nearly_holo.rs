//! Maass–Shimura derivatives of q-series, their values at CM lattices with a
//! Γ₀(N) level structure, and toric period sums over ring class groups.
//!
//! A nearly holomorphic form of depth m is stored as Σ_r (z − z̄)^{−r} g_r(q)
//! with g_r(q) = (2πi)^{−r} Σ_n P_r(n) a(n) qⁿ for integer polynomials P_r.
//! One application of δ_w maps P_r to n·P_r + (w − r + 1)·P_{r−1}.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Complex, Float};
use serde::Serialize;

use crate::arith::{egcd, gcd, is_prime};
use crate::error::{Error, Result};
use crate::heckechar::HeckeCharacter;
use crate::numerics::{abs, cpow_i, pi, prec_bits, rel_err, two_pi_i};
use crate::qexp::{p_deplete, QExpansion};
use crate::quadfield::{
    enumerate_class_group, restrict_to_order, split_prime, ImagQuadField, KElem, Lattice, ProperIdeal, Splitting,
    DEFAULT_ENUM_BOUND,
};

/// Default decimal working precision for complex evaluations.
pub const DEFAULT_DIGITS: u32 = 40;

/// Extra bits carried through series summation.
const GUARD_BITS: u32 = 64;

#[derive(Clone, Debug)]
pub struct NearlyHoloExpansion {
    pub base_weight: u32,
    pub depth: u32,
    pub level: u64,
    pub prec: u32,
    /// P_r as coefficient lists in n, r = 0..=depth.
    pub polys: Vec<Vec<i128>>,
    /// a(n) as complex numbers, n = 0..=D.
    pub coeffs: Vec<Complex>,
    /// g_r coefficients, r = 0..=depth.
    pub components: Vec<Vec<Complex>>,
}

fn poly_eval(p: &[i128], n: u64) -> i128 {
    p.iter().rev().fold(0i128, |acc, c| acc * n as i128 + c)
}

fn poly_eval_f64(p: &[i128], n: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * n + (c as f64).abs())
}

impl NearlyHoloExpansion {
    /// Depth-zero expansion of a holomorphic q-series.
    pub fn new(f: &QExpansion, prec: u32) -> NearlyHoloExpansion {
        let coeffs: Vec<Complex> = f.complex_coeffs(prec);
        NearlyHoloExpansion {
            base_weight: f.weight,
            depth: 0,
            level: f.level,
            prec,
            polys: vec![vec![1]],
            components: vec![coeffs.clone()],
            coeffs,
        }
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Weight of the nearly holomorphic form: k + 2·depth.
    pub fn weight(&self) -> u32 {
        self.base_weight + 2 * self.depth
    }

    /// One application of δ_w with w the current weight.
    pub fn maass_shimura(&self) -> NearlyHoloExpansion {
        let w = self.weight() as i128;
        let depth = self.depth as usize + 1;
        let mut polys = Vec::with_capacity(depth + 1);
        for r in 0..=depth {
            let mut p = vec![0i128; depth + 1];
            if r < self.polys.len() {
                for (j, c) in self.polys[r].iter().enumerate() {
                    p[j + 1] += c;
                }
            }
            if r >= 1 {
                let f = w - r as i128 + 1;
                for (j, c) in self.polys[r - 1].iter().enumerate() {
                    p[j] += f * c;
                }
            }
            while p.len() > 1 && *p.last().unwrap() == 0 {
                p.pop();
            }
            polys.push(p);
        }
        let prec = self.prec;
        let inv = Complex::with_val(prec, 1) / two_pi_i(prec);
        let components = (0..=depth)
            .map(|r| {
                let scale = cpow_i(&inv, r as i64);
                self.coeffs
                    .iter()
                    .enumerate()
                    .map(|(n, a)| {
                        let pn = poly_eval(&polys[r], n as u64);
                        Complex::with_val(prec, a * &scale) * pn
                    })
                    .collect()
            })
            .collect();
        NearlyHoloExpansion {
            depth: depth as u32,
            polys,
            components,
            coeffs: self.coeffs.clone(),
            ..*self
        }
    }

    /// δ^m applied to the expansion.
    pub fn iterate(&self, m: u32) -> NearlyHoloExpansion {
        (0..m).fold(self.clone(), |e, _| e.maass_shimura())
    }

    /// Heuristic bound on |Σ_{n ≥ start} g(n) qⁿ| at height y from
    /// |a(n)| ≤ σ₀(n) n^{(k−1)/2} ≤ 2√n·n^{(k−1)/2}.
    pub fn tail_bound(&self, y: f64, start: usize) -> f64 {
        let k = self.base_weight as f64;
        let y4 = 4.0 * std::f64::consts::PI * y;
        let log_q = -2.0 * std::f64::consts::PI * y;
        let mut total = 0.0;
        let mut n = start.max(1);
        loop {
            let nf = n as f64;
            let poly: f64 = self.polys.iter().enumerate().map(|(r, p)| poly_eval_f64(p, nf) / y4.powi(r as i32)).sum();
            let log_term = (2.0 * nf.sqrt()).ln() + 0.5 * (k - 1.0) * nf.ln() + poly.max(1e-300).ln() + log_q * nf;
            let term = log_term.exp();
            total += term;
            if term < total * 1e-20 || log_term < -745.0 {
                break;
            }
            n += 1;
            if n > start + 10_000_000 {
                return f64::INFINITY;
            }
        }
        total
    }

    /// Terms needed at height y so that the heuristic tail is below 10^{-digits}.
    pub fn terms_needed(&self, y: f64, digits: u32) -> usize {
        let target = 10f64.powi(-(digits as i32) - 5);
        let (mut lo, mut hi) = (1usize, 64usize);
        while self.tail_bound(y, hi) > target {
            lo = hi;
            hi *= 2;
            if hi > 1 << 26 {
                return hi;
            }
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.tail_bound(y, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// δ^m f(z) summed over n ≤ n_max, with the truncation tail bound.
    pub fn evaluate_with(&self, z: &Complex, n_max: usize) -> (Complex, f64) {
        let prec = self.prec + GUARD_BITS;
        let z = Complex::with_val(prec, z);
        let q = Complex::with_val(prec, (two_pi_i(prec) * &z).exp_ref());
        let y = z.imag().to_f64();
        let nmax = n_max.min(self.truncation());
        let mut sums: Vec<Complex> = vec![Complex::new(prec); self.components.len()];
        let mut qn = Complex::with_val(prec, 1);
        for n in 0..=nmax {
            for (r, g) in self.components.iter().enumerate() {
                if !g[n].is_zero() {
                    sums[r] += Complex::with_val(prec, &g[n] * &qn);
                }
            }
            qn *= &q;
        }
        // z - z̄ = 2i·Im z
        let two_iy = Complex::with_val(prec, (0, Float::with_val(prec, z.imag()) * 2u32));
        let mut total = Complex::new(prec);
        for (r, s) in sums.iter().enumerate() {
            total += Complex::with_val(prec, s * cpow_i(&two_iy, -(r as i64)));
        }
        let tail = self.tail_bound(y, nmax + 1);
        (Complex::with_val(self.prec, total), tail)
    }

    /// δ^m f(z) with the truncation fixed by the working precision.
    pub fn evaluate(&self, z: &Complex) -> (Complex, f64) {
        let digits = (f64::from(self.prec) / std::f64::consts::LOG2_10) as u32;
        let n = self.terms_needed(z.imag().to_f64(), digits);
        self.evaluate_with(z, n)
    }
}

/// Independent check: central difference of f = Σ a(n) qⁿ plus the δ_k definition.
pub fn finite_difference_delta(f: &QExpansion, k: u32, z: &Complex, h: &Float, prec: u32) -> Complex {
    let e = NearlyHoloExpansion::new(f, prec);
    let ev = |w: &Complex| e.evaluate(w).0;
    let hz = Complex::with_val(prec, (h, 0));
    let zp = Complex::with_val(prec, z + &hz);
    let zm = Complex::with_val(prec, z - &hz);
    let deriv = (ev(&zp) - ev(&zm)) / (hz * 2u32);
    let two_iy = Complex::with_val(prec, (0, Float::with_val(prec, z.imag()) * 2u32));
    let fz = ev(z);
    let inner = deriv + fz * k / two_iy;
    inner / two_pi_i(prec)
}

/// A cyclic overlattice L′ ⊃ 𝔞 of order N(𝔡)·e, where 𝔡 is an integral ideal
/// of the maximal order with cyclic quotient and e divides the conductor:
/// L′ = 𝔡^{-1}·𝔞R_{c/e}.
#[derive(Clone, Debug, Serialize)]
pub struct LevelStructure {
    pub divisor: Option<ProperIdeal>,
    pub ring_index: u64,
}

impl LevelStructure {
    pub fn trivial() -> Self {
        LevelStructure { divisor: None, ring_index: 1 }
    }

    /// Product of primes above the prime powers of n: split primes use the
    /// second ideal of [`split_prime`], ramified primes their unique prime.
    pub fn heegner(field: &ImagQuadField, n: u64) -> Result<Self> {
        Ok(LevelStructure { divisor: heegner_divisor(field, n)?, ring_index: 1 })
    }

    /// Structure of level lcm(n₀, ring_index): the ring index carries its own
    /// primes, the rest of n₀ must split or ramify once and becomes the
    /// Heegner divisor.
    pub fn for_level(field: &ImagQuadField, n0: u64, ring_index: u64) -> Result<Self> {
        let mut rest = n0;
        for (l, _) in crate::arith::factor(ring_index) {
            while rest % l == 0 {
                rest /= l;
            }
        }
        Ok(LevelStructure { divisor: heegner_divisor(field, rest)?, ring_index })
    }

    pub fn level(&self) -> u64 {
        let d = self.divisor.as_ref().map(|d| d.norm().0 as u64).unwrap_or(1);
        d * self.ring_index
    }

    /// Multiply the divisor by an ideal of the maximal order.
    pub fn times(&self, extra: &ProperIdeal) -> Self {
        let divisor = Some(match &self.divisor {
            None => *extra,
            Some(d) => d.mul(extra),
        });
        LevelStructure { divisor, ring_index: self.ring_index }
    }

    pub fn overlattice(&self, a: &ProperIdeal) -> Result<Lattice> {
        let field = a.field;
        let e = self.ring_index;
        if a.conductor % e != 0 {
            return Err(Error::ConductorMismatch(format!(
                "ring index {e} does not divide conductor {}",
                a.conductor
            )));
        }
        let c = a.conductor / e;
        let base = if e > 1 { a.lattice.mul(&field, &field.order(c).lattice()) } else { a.lattice };
        let Some(d) = &self.divisor else { return Ok(base) };
        let (nd, den) = d.norm();
        if den != 1 || gcd(nd, a.conductor as i128) != 1 {
            return Err(Error::ConductorMismatch(format!("level divisor of norm {nd}/{den} meets conductor")));
        }
        let dbar = d.conj();
        let dbar_c = if c > 1 { restrict_to_order(&dbar, c) } else { dbar };
        let prod = dbar_c.lattice.mul(&field, &base);
        Ok(prod.scale(&field, &field.inv(&KElem::int(nd))))
    }
}

pub fn heegner_divisor(field: &ImagQuadField, n: u64) -> Result<Option<ProperIdeal>> {
    let mut out: Option<ProperIdeal> = None;
    for (l, e) in crate::arith::factor(n) {
        let prime = match field.splitting(l) {
            Splitting::Split => split_prime(field, l)?.1,
            Splitting::Ramified if e == 1 => crate::quadfield::primes_above(field, l)[0],
            _ => return Err(Error::NonSplitPrime(l)),
        };
        for _ in 0..e {
            out = Some(match out {
                None => prime,
                Some(d) => d.mul(&prime),
            });
        }
    }
    Ok(out)
}

/// Oriented basis (ω₁, ω₂) of `l` with l + Zω₂/N = `lp`, N = [lp : l].
pub fn adapted_basis(field: &ImagQuadField, l: &Lattice, lp: &Lattice, n: u64) -> Result<Lattice> {
    if !lp.contains_lattice(l) {
        return Err(Error::ConductorMismatch("overlattice does not contain the lattice".into()));
    }
    if n == 1 {
        return Ok(Lattice::oriented(field, l.w1, l.w2));
    }
    let (e1, e2) = (lp.w1, lp.w2);
    let vec = |x: i128, y: i128| e1.scale_int(x).add(&e2.scale_int(y));
    let ni = n as i128;
    let primes: Vec<i128> = crate::arith::prime_divisors(n).into_iter().map(|q| q as i128).collect();
    let mut found = None;
    'search: for radius in 0..=ni {
        for x in -radius..=radius {
            for y in [-radius, radius].into_iter().chain((-radius + 1)..radius) {
                if x.abs() != radius && y.abs() != radius {
                    continue;
                }
                if gcd(x, y) != 1 {
                    continue;
                }
                let v = vec(x, y);
                if !l.contains(&v.scale_int(ni)) {
                    continue;
                }
                if primes.iter().any(|q| l.contains(&v.scale_int(ni / q))) {
                    continue;
                }
                found = Some((x, y));
                break 'search;
            }
        }
    }
    let (x, y) = found.ok_or_else(|| Error::ConductorMismatch(format!("quotient is not cyclic of order {n}")))?;
    let (_, s, t) = egcd(x, y);
    // (x, y) and (-t, s) form a basis of lp.
    let v = vec(x, y);
    let comp = vec(-t, s);
    let shift = (0..ni)
        .find(|&j| l.contains(&comp.add(&v.scale_int(j))))
        .ok_or_else(|| Error::ConductorMismatch("no complement in the lattice".into()))?;
    let w1 = comp.add(&v.scale_int(shift));
    let w2 = v.scale_int(ni);
    let out = Lattice::oriented(field, w1, w2);
    if !out.same_as(l) {
        return Err(Error::InternalMismatch("adapted basis does not span the lattice".into()));
    }
    Ok(out)
}

/// Move an adapted basis within its Γ₀(N)-orbit to maximize Im τ.
pub fn gamma0_reduce(field: &ImagQuadField, basis: &Lattice, n: u64) -> Lattice {
    let mut lat = *basis;
    let ni = n as i128;
    loop {
        let t = field.to_complex(&lat.tau(field), 64);
        let (x, y) = (t.real().to_f64(), t.imag().to_f64());
        let shift = -(x + 0.5).floor() as i128;
        if shift != 0 {
            lat = lat.act([[1, shift], [0, 1]]);
        }
        let x = x + shift as f64;
        let jmax = (1.0 / (ni as f64 * y)).floor() as i128;
        let mut best: Option<(f64, i128, i128)> = None;
        for j in 1..=jmax {
            let c = ni * j;
            let d0 = (-(c as f64) * x).round() as i128;
            for d in (d0 - 2)..=(d0 + 2) {
                if gcd(c, d) != 1 {
                    continue;
                }
                let re = c as f64 * x + d as f64;
                let im = c as f64 * y;
                let m2 = re * re + im * im;
                if m2 < 1.0 - 1e-9 && best.is_none_or(|(b, _, _)| m2 < b) {
                    best = Some((m2, c, d));
                }
            }
        }
        let Some((_, c, d)) = best else { break };
        let (_, a, b) = egcd(d, c);
        // a·d + b·c = 1, so [[a, -b], [c, d]] has determinant one.
        lat = lat.act([[a, -b], [c, d]]);
    }
    lat
}

/// A lattice value together with the evaluation data.
#[derive(Clone, Debug)]
pub struct CmEvaluation {
    pub ideal: ProperIdeal,
    pub basis: Lattice,
    pub tau: Complex,
    pub omega2: Complex,
    pub value: Complex,
    pub tail_bound: f64,
}

/// δ^m f(τ)·ω₂^{−(k+2m)} for the adapted, Γ₀(N)-reduced basis of 𝔞.
pub fn lattice_value(expansion: &NearlyHoloExpansion, a: &ProperIdeal, structure: &LevelStructure) -> Result<CmEvaluation> {
    let n = structure.level();
    if n % expansion.level != 0 {
        return Err(Error::ConductorMismatch(format!(
            "form of level {} on a level {n} structure",
            expansion.level
        )));
    }
    let lp = structure.overlattice(a)?;
    let basis = adapted_basis(&a.field, &a.lattice, &lp, n)?;
    let basis = gamma0_reduce(&a.field, &basis, n);
    evaluate_basis(expansion, a, &basis)
}

/// Evaluate at an explicit adapted basis (no reduction).
pub fn evaluate_basis(expansion: &NearlyHoloExpansion, a: &ProperIdeal, basis: &Lattice) -> Result<CmEvaluation> {
    let prec = expansion.prec + GUARD_BITS;
    let field = a.field;
    let w1 = field.to_complex(&basis.w1, prec);
    let w2 = field.to_complex(&basis.w2, prec);
    let tau = Complex::with_val(prec, &w1 / &w2);
    let (v, tail) = expansion.evaluate(&tau);
    let value = Complex::with_val(expansion.prec, v * cpow_i(&w2, -(expansion.weight() as i64)));
    let scale = abs(&cpow_i(&w2, -(expansion.weight() as i64))).to_f64();
    let tail_bound = tail * scale;
    let mag = abs(&value).to_f64();
    if tail_bound > 1e-5 * mag {
        return Err(Error::PrecisionLoss { tail: tail_bound, value: mag });
    }
    Ok(CmEvaluation { ideal: *a, basis: *basis, tau, omega2: w2, value, tail_bound })
}

/// A period sum with its individual summands χ̃(𝔞_j)·lattice_value(𝔞_j).
#[derive(Clone, Debug)]
pub struct PeriodSum {
    pub summands: Vec<Complex>,
    pub evaluations: Vec<CmEvaluation>,
    pub total: Complex,
}

/// Check that `reps` are proper R_c ideals covering Cl(R_c) exactly once.
pub fn check_representatives(reps: &[ProperIdeal]) -> Result<()> {
    let Some(first) = reps.first() else {
        return Err(Error::IncompleteRepresentatives("empty list".into()));
    };
    let order = first.order();
    let group = enumerate_class_group(&order, DEFAULT_ENUM_BOUND)?;
    let mut seen = vec![false; group.size()];
    for a in reps {
        if a.conductor != order.conductor {
            return Err(Error::IncompleteRepresentatives(format!(
                "mixed conductors {} and {}",
                a.conductor, order.conductor
            )));
        }
        let i = group.class_of(a)?;
        if seen[i] {
            return Err(Error::IncompleteRepresentatives(format!("class {i} appears twice")));
        }
        seen[i] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::IncompleteRepresentatives(format!(
            "{} of {} classes covered",
            reps.len(),
            group.size()
        )));
    }
    Ok(())
}

/// Σ_j χ̃(𝔞_j)·lattice_value(f, m, 𝔞_j), with χ̃ of infinity type (k + 2m, 0)
/// so that every summand depends only on the class of 𝔞_j.
pub fn period_sum(
    expansion: &NearlyHoloExpansion,
    chi: &HeckeCharacter,
    reps: &[ProperIdeal],
    structure: &LevelStructure,
) -> Result<PeriodSum> {
    check_representatives(reps)?;
    let w = expansion.weight() as i64;
    if chi.kappa != (w, 0) {
        return Err(Error::TypeMismatch(format!(
            "character of type {:?} against weight {w}",
            chi.kappa
        )));
    }
    let prec = expansion.prec;
    let parts: Vec<Result<(Complex, CmEvaluation)>> = reps
        .par_iter()
        .map(|a| {
            let ev = lattice_value(expansion, a, structure)?;
            let c = chi.eval(a, prec)?;
            Ok((Complex::with_val(prec, &c * &ev.value), ev))
        })
        .collect();
    let mut summands = Vec::with_capacity(reps.len());
    let mut evaluations = Vec::with_capacity(reps.len());
    let mut total = Complex::new(prec);
    for p in parts {
        let (s, ev) = p?;
        total += &s;
        summands.push(s);
        evaluations.push(ev);
    }
    Ok(PeriodSum { summands, evaluations, total })
}

/// φ_Q(n) / (2 φ_M(n)), the normalizing prefactor of the adelic period sum.
pub fn period_prefactor(field: &ImagQuadField, n: u64) -> (u64, u64) {
    let num = crate::arith::euler_phi(n);
    let den = 2 * crate::quadfield::phi_m(field, n);
    let g = gcd(num as i128, den as i128) as u64;
    (num / g, den / g)
}

/// Which prime carries the lattice shift and which extra p-power accompanies
/// the character value: X = p^{m + c0} / χ̃(𝔮).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VpConvention {
    pub c0: i32,
    /// true: 𝔮 = 𝔭̄ (the first ideal of [`split_prime`]); false: 𝔮 = 𝔭.
    pub bar: bool,
}

/// The convention fixed once by calibration on the m = 0 identity.
pub const VP_CONVENTION: VpConvention = VpConvention { c0: 0, bar: true };

#[derive(Clone, Debug)]
pub struct EulerCheck {
    pub lhs: Complex,
    pub rhs: Complex,
    pub e_tilde: Complex,
    pub rel_err: f64,
}

/// Ẽ(p) = 1 − a(p)X + ψ(p)p^{k−1}X² with X from the convention.
pub fn e_tilde_from_convention(
    f: &QExpansion,
    m: u32,
    chi: &HeckeCharacter,
    p: u64,
    conv: VpConvention,
    prec: u32,
) -> Result<Complex> {
    let (pbar, pp) = split_prime(&chi.field, p)?;
    let q = if conv.bar { pbar } else { pp };
    let cq = chi.eval(&q, prec)?;
    if cq.is_zero() {
        // p divides the conductor of χ: x = 0
        return Ok(Complex::with_val(prec, 1));
    }
    let pf = Float::with_val(prec, p);
    let ppow = Float::with_val(prec, (&pf).pow(m as i32 + conv.c0));
    let x = Complex::with_val(prec, ppow / cq);
    let ap = f.coeff(p as usize).to_complex(prec);
    let psi = f.nebentypus.value(p as i128).to_complex(prec);
    let pk = Float::with_val(prec, (&pf).pow(f.weight as i32 - 1));
    let one = Complex::with_val(prec, 1);
    let x2 = Complex::with_val(prec, &x * &x);
    Ok(one - ap * &x + psi * pk * x2)
}

/// The depletion identity Σ χ̃ LV(f^{(p)}) = Ẽ(p) Σ χ̃ LV(f), with f^{(p)}
/// evaluated on the structure enlarged by 𝔭² (𝔭 the second ideal of
/// [`split_prime`]).
pub fn euler_depletion_check(
    f: &QExpansion,
    m: u32,
    chi: &HeckeCharacter,
    reps: &[ProperIdeal],
    structure: &LevelStructure,
    p: u64,
    conv: VpConvention,
    prec: u32,
) -> Result<EulerCheck> {
    let (lhs, base) = depletion_sums(f, m, chi, reps, structure, p, prec)?;
    let e_tilde = e_tilde_from_convention(f, m, chi, p, conv, prec)?;
    let rhs = Complex::with_val(prec, &e_tilde * &base);
    let rel = rel_err(&lhs, &rhs);
    Ok(EulerCheck { lhs, rhs, e_tilde, rel_err: rel })
}

/// Period sums of f^{(p)} and f.
pub fn depletion_sums(
    f: &QExpansion,
    m: u32,
    chi: &HeckeCharacter,
    reps: &[ProperIdeal],
    structure: &LevelStructure,
    p: u64,
    prec: u32,
) -> Result<(Complex, Complex)> {
    if !is_prime(p) || f.level % p == 0 {
        return Err(Error::Unsupported(format!("depletion check needs a prime p = {p} prime to the level")));
    }
    let field = chi.field;
    let (_, pp) = split_prime(&field, p)?;
    let deep = structure.times(&pp.mul(&pp));
    let fp = p_deplete(f, p)?;
    let e = NearlyHoloExpansion::new(f, prec).iterate(m);
    let ep = NearlyHoloExpansion::new(&fp, prec).iterate(m);
    let lhs = period_sum(&ep, chi, reps, &deep)?.total;
    let base = period_sum(&e, chi, reps, structure)?.total;
    Ok((lhs, base))
}

/// All ten candidate conventions ranked by the m = 0 relative error.
pub fn calibrate_vp(
    f: &QExpansion,
    chi: &HeckeCharacter,
    reps: &[ProperIdeal],
    structure: &LevelStructure,
    p: u64,
    prec: u32,
) -> Result<Vec<(VpConvention, f64)>> {
    let (lhs, base) = depletion_sums(f, 0, chi, reps, structure, p, prec)?;
    let mut out = Vec::new();
    for bar in [true, false] {
        for c0 in -2..=2 {
            let conv = VpConvention { c0, bar };
            let e = e_tilde_from_convention(f, 0, chi, p, conv, prec)?;
            let rhs = Complex::with_val(prec, &e * &base);
            out.push((conv, rel_err(&lhs, &rhs)));
        }
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(out)
}

/// e^{−2π}(1 − k/(4π)): δ_k q at z = i.
pub fn delta_q_at_i(k: u32, prec: u32) -> Complex {
    let p = pi(prec);
    let e = Float::with_val(prec, (-Float::with_val(prec, &p * 2u32)).exp_ref());
    let f = Float::with_val(prec, 1) - Float::with_val(prec, k) / (p * 4u32);
    Complex::with_val(prec, (e * f, 0))
}

/// Working precision in bits for a decimal digit count.
pub fn bits(digits: u32) -> u32 {
    prec_bits(digits)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::heckechar::characters_of;
    use crate::quadfield::{coset_representatives, prime_to};
    use std::sync::Arc;

    /// q ∏ (1 − qⁿ)²(1 − q¹¹ⁿ)² up to q^d.
    pub fn level11(d: usize) -> QExpansion {
        let mut c = vec![0i64; d + 1];
        c[1] = 1;
        for n in 1..=d {
            for step in [n, n, 11 * n, 11 * n] {
                if step > d {
                    continue;
                }
                for j in (step..=d).rev() {
                    c[j] -= c[j - step];
                }
            }
        }
        QExpansion::from_ints(2, 11, &c[1..])
    }

    #[test]
    fn single_term_at_i() {
        let prec = prec_bits(40);
        let f = QExpansion::from_ints(5, 1, &[1]);
        let e = NearlyHoloExpansion::new(&f, prec).maass_shimura();
        let z = Complex::with_val(prec, (0, 1));
        let (v, _) = e.evaluate(&z);
        assert!(rel_err(&v, &delta_q_at_i(5, prec)) < 1e-35);
    }

    #[test]
    fn recurrence_polynomials() {
        let f = QExpansion::from_ints(2, 1, &[1]);
        let e = NearlyHoloExpansion::new(&f, 64).iterate(2);
        // δ_4 δ_2 q: P_0 = n², P_1 = 2n + 4n, P_2 = 3·2
        assert_eq!(e.polys[0], vec![0, 0, 1]);
        assert_eq!(e.polys[1], vec![0, 6]);
        assert_eq!(e.polys[2], vec![2 * 3]);
    }

    #[test]
    fn finite_difference_agrees() {
        let prec = prec_bits(40);
        let f = level11(400);
        let e = NearlyHoloExpansion::new(&f, prec).maass_shimura();
        let h = Float::with_val(prec, 1e-10);
        for (x, y) in [(0.1, 0.6), (-0.3, 0.9), (0.45, 1.3)] {
            let z = Complex::with_val(prec, (x, y));
            let a = e.evaluate(&z).0;
            let b = finite_difference_delta(&f, 2, &z, &h, prec);
            assert!(rel_err(&a, &b) < 1e-8, "{}", rel_err(&a, &b));
        }
    }

    fn setup(d: i64) -> (ImagQuadField, LevelStructure) {
        let field = ImagQuadField::new(d).unwrap();
        let s = LevelStructure::heegner(&field, 11).unwrap();
        (field, s)
    }

    #[test]
    fn homogeneity_and_basis_change() {
        let prec = prec_bits(40);
        let (field, s) = setup(-7);
        let f = level11(600);
        let e = NearlyHoloExpansion::new(&f, prec).iterate(1);
        let a = field.maximal_order().unit_ideal();
        let v = lattice_value(&e, &a, &s).unwrap();
        let two = a.scale(&KElem::int(2));
        let v2 = lattice_value(&e, &two, &s).unwrap();
        let expect = Complex::with_val(prec, &v.value / 16u32);
        assert!(rel_err(&v2.value, &expect) < 1e-30);
        // unreduced adapted basis
        let lp = s.overlattice(&a).unwrap();
        let raw = adapted_basis(&field, &a.lattice, &lp, 11).unwrap();
        let red = gamma0_reduce(&field, &raw, 11);
        let x = field.to_complex(&red.tau(&field), 64).real().to_f64();
        let d = (-11.0 * x).round() as i128 + 1;
        let (_, u, w) = egcd(d, 11);
        let moved = red.act([[u, -w], [11, d]]);
        let alt = evaluate_basis(&e, &a, &moved).unwrap();
        assert!(rel_err(&alt.value, &v.value) < 1e-25, "{}", rel_err(&alt.value, &v.value));
    }

    #[test]
    fn summands_are_class_functions() {
        let prec = prec_bits(40);
        let (field, s) = setup(-8);
        let f = level11(800);
        let order = field.order(5);
        let group = Arc::new(enumerate_class_group(&order, DEFAULT_ENUM_BOUND).unwrap());
        let xi = characters_of(&group, 16).unwrap()[1].clone();
        let chi = HeckeCharacter::new(field, (4, 0), Some((group.clone(), xi))).unwrap();
        let reps = coset_representatives(&field, 5, 3, DEFAULT_ENUM_BOUND).unwrap();
        let e = NearlyHoloExpansion::new(&f, prec).iterate(1);
        let ps = period_sum(&e, &chi, &reps, &s).unwrap();
        let beta = KElem::new(1, 1, 1);
        let moved: Vec<ProperIdeal> = reps.iter().map(|a| a.scale(&beta)).collect();
        let ps2 = period_sum(&e, &chi, &moved, &s).unwrap();
        for (x, y) in ps.summands.iter().zip(&ps2.summands) {
            assert!(rel_err(x, y) < 1e-25);
        }
        let short = &reps[1..];
        assert!(matches!(period_sum(&e, &chi, short, &s), Err(Error::IncompleteRepresentatives(_))));
        let _ = prime_to;
    }

    #[test]
    fn depletion_identity() {
        let prec = prec_bits(40);
        let (field, s) = setup(-8);
        let f = level11(2500);
        let chi = HeckeCharacter::new(field, (2, 0), None).unwrap();
        let reps = vec![field.maximal_order().unit_ideal()];
        let ranked = calibrate_vp(&f, &chi, &reps, &s, 3, prec).unwrap();
        assert_eq!(ranked[0].0, VP_CONVENTION, "{ranked:?}");
        assert!(ranked[0].1 < 1e-15);
        assert!(ranked[1].1 > 1e-3);
    }

    #[test]
    fn depletion_configurations() {
        const XI: usize = 2;
        let prec = prec_bits(40);
        let f = level11(4000);
        for (d, c, p) in [(-8i64, 1u64, 3u64), (-19, 1, 5), (-8, 5, 3)] {
            let (field, s) = setup(d);
            let reps = coset_representatives(&field, c, p * 11, DEFAULT_ENUM_BOUND).unwrap_or_else(|_| {
                let g = enumerate_class_group(&field.order(c), DEFAULT_ENUM_BOUND).unwrap();
                (0..g.size()).map(|i| prime_to(&field, &g.forms[i], p * c * 11)).collect()
            });
            for m in 0..=1u32 {
                let ring = (c > 1).then(|| {
                    let group = Arc::new(enumerate_class_group(&field.order(c), DEFAULT_ENUM_BOUND).unwrap());
                    let xi = characters_of(&group, 16).unwrap()[XI].clone();
                    (group, xi)
                });
                let chi = HeckeCharacter::new(field, (2 + 2 * m as i64, 0), ring).unwrap();
                let r = euler_depletion_check(&f, m, &chi, &reps, &s, p, VP_CONVENTION, prec).unwrap();
                assert!(abs(&r.rhs).to_f64() > 1e-8);
                assert!(r.rel_err < 1e-12);
            }
        }
    }
}
