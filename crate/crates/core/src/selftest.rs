//! Randomized property suites for the Mahler calculus, shared by the CLI
//! `measure-selftest` command and the test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::padic::{PElem, PRing};
use crate::padic_measure::{
    act, ball_measure, dirichlet_characters, frobenius_substitute, moment, shift_table, act_with, twisted_moment_with,
    verschiebung_root_evaluate, LocallyConstantFn, MeasureSeries,
};

/// Longest random series in the Mahler suites.
const SERIES_LEN: usize = 50;
/// Longest random series fed to the Frobenius substitution.
const FROBENIUS_LEN: usize = 12;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult { name, cases: 0, failures: 0, first_failure: None }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfTestReport {
    pub p: u64,
    pub prec: u32,
    pub samples: usize,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

pub fn random_elem(ring: &PRing, rng: &mut impl Rng) -> PElem {
    PElem((0..ring.dim()).map(|_| rng.gen_range(0..ring.modulus)).collect())
}

/// A random polynomial measure with at most `max_len` coefficients.  Short
/// truncated series cannot carry a level-p² action at useful precision, so
/// the suites use exact polynomials.
pub fn random_series(ring: &PRing, rng: &mut impl Rng, max_len: usize) -> MeasureSeries {
    let len = rng.gen_range(1..=max_len);
    let coeffs = (0..len).map(|_| random_elem(ring, rng)).collect();
    MeasureSeries::new(ring, coeffs, true)
}

/// Test functions of level ≤ 2: all characters and all ball indicators.
fn test_functions(ring: &PRing) -> Result<Vec<LocallyConstantFn>> {
    let mut out = Vec::new();
    for n in 0..=2 {
        out.extend(dirichlet_characters(ring, n)?);
        for b in 0..ring.p.pow(n) as i64 {
            out.push(LocallyConstantFn::indicator(ring, n, b));
        }
    }
    Ok(out)
}

/// Mahler calculus suites: twisted moments against moments of the action,
/// ball additivity, multiplicativity of the action, and the Frobenius /
/// root-evaluation laws.
pub fn measure_selftest(p: u64, prec: u32, samples: usize, seed: u64) -> Result<SelfTestReport> {
    let ring = PRing::new(p, prec, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let funcs = test_functions(&ring)?;
    let chars2 = dirichlet_characters(&ring, 2)?;
    let mut twisted = SuiteResult::new("twisted_moment = moment o act");
    let mut balls = SuiteResult::new("ball additivity");
    let mut mult = SuiteResult::new("act(phi phi') = act(phi) o act(phi')");
    let mut frob = SuiteResult::new("Phi(t^(p^n)) at t = zeta^u equals Phi(1)");
    let mut compat = SuiteResult::new("act on Phi(t^(p^n)) is multiplication by phi(0)");
    for sample in 0..samples {
        let mu = random_series(&ring, &mut rng, SERIES_LEN);
        let tables = (0..=2).map(|n| shift_table(&mu, n)).collect::<Result<Vec<_>>>()?;
        let table = &tables[2];
        let m = rng.gen_range(0..4);
        for (i, phi) in funcs.iter().enumerate() {
            let lhs = twisted_moment_with(&tables[phi.level as usize], &mu, phi, m)?;
            let rhs = moment(&act_with(table, &phi.at_level(&ring, 2), &mu)?, m)?;
            twisted.record(lhs.agrees(&ring, &rhs), || format!("sample {sample}, function {i}, m = {m}"));
        }
        let total = moment(&mu, 0)?;
        for n in 0..=2u32 {
            let mut acc = ring.zero();
            let mut prec = total.prec;
            for b in 0..p.pow(n) as i64 {
                let ball = ball_measure(&mu, n, b)?;
                prec = prec.min(ball.prec);
                ring.add_assign(&mut acc, &ball.value);
            }
            let ok = ring.eq_mod(&acc, &total.value, prec);
            balls.record(ok, || format!("sample {sample}, level {n}"));
        }
        let i = rng.gen_range(0..chars2.len());
        let j = rng.gen_range(0..funcs.len());
        let (phi, psi) = (&chars2[i], &funcs[j]);
        let lhs = act_with(table, &phi.mul(&ring, psi).at_level(&ring, 2), &mu)?;
        let rhs = act(phi, &act_with(table, &psi.at_level(&ring, 2), &mu)?)?;
        mult.record(lhs.congruent(&rhs), || format!("sample {sample}, characters {i}, {j}"));
        // substitution multiplies the degree by p^n, so these laws use a
        // shorter series
        let nu = random_series(&ring, &mut rng, FROBENIUS_LEN);
        for n in 1..=2u32 {
            let sub = frobenius_substitute(&nu, n);
            let one = &nu.coeffs[0];
            let u = loop {
                let u = rng.gen_range(1..p.pow(n) as i64);
                if u % p as i64 != 0 {
                    break u;
                }
            };
            let z = verschiebung_root_evaluate(&sub, u, n)?;
            frob.record(ring.eq_mod(&z.value, one, z.prec), || format!("sample {sample}, n = {n}, u = {u}"));
            let k = rng.gen_range(0..funcs.len());
            let phi = &funcs[k];
            if phi.level <= n {
                let lhs = act(phi, &sub)?;
                let rhs = sub.scale(&phi.eval(&ring, 0));
                compat.record(lhs.congruent(&rhs), || format!("sample {sample}, n = {n}, function {k}"));
            }
        }
    }
    let suites = vec![twisted, balls, mult, frob, compat];
    let passed = suites.iter().all(|s| s.failures == 0);
    Ok(SelfTestReport { p, prec, samples, seed, suites, passed })
}
