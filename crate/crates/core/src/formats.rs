//! Input formats: eigenform coefficient files (JSON) and character
//! specifications (`chi = {field: -7, type: [2,0], finite: [...], modulus: {...}}`).

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::arith::{gcd, is_prime};
use crate::cyclo::{turn, Cyclo};
use crate::error::{Error, Result};
use crate::heckechar::{DirichletChar, FiniteClassCharacter, HeckeCharacter};
use crate::qexp::{Eigenform, QExpansion};
use crate::quadfield::{enumerate_class_group, ImagQuadField, RingClassGroup, DEFAULT_ENUM_BOUND};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NebentypusFile {
    modulus: u64,
    values: Vec<[i64; 3]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffFieldFile {
    /// Power basis ζ_N^j, j < degree.
    cyclotomic: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EigenformFile {
    level: u64,
    weight: u32,
    nebentypus: NebentypusFile,
    coeff_field_degree: usize,
    #[serde(default)]
    coeff_field: Option<CoeffFieldFile>,
    #[serde(default)]
    atkin_lehner: Option<i64>,
    coefficients: Vec<Vec<i64>>,
}

/// Number of coprime pairs checked for multiplicativity.
pub const MULTIPLICATIVITY_PAIRS: usize = 20;

fn schema(msg: impl Into<String>) -> Error {
    Error::SchemaError(msg.into())
}

/// Largest accepted level, nebentypus modulus and turn denominator.
pub const MAX_MODULUS: u64 = 1 << 20;
/// Largest accepted weight.
pub const MAX_WEIGHT: u32 = 256;

fn checked_turn(num: i64, den: i64) -> Result<crate::cyclo::Turn> {
    if den <= 0 || den as u64 > MAX_MODULUS {
        return Err(schema(format!("turn denominator {den} must lie in 1..={MAX_MODULUS}")));
    }
    Ok(turn(num.rem_euclid(den), den))
}

/// Parse and validate an eigenform file.
pub fn parse_eigenform(text: &str) -> Result<Eigenform> {
    let file: EigenformFile = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    if file.level == 0 || file.level > MAX_MODULUS || file.weight == 0 || file.weight > MAX_WEIGHT {
        return Err(schema(format!("level must lie in 1..={MAX_MODULUS} and weight in 1..={MAX_WEIGHT}")));
    }
    let g = file.coeff_field_degree;
    if g == 0 {
        return Err(schema("coeff_field_degree must be positive"));
    }
    let zeta = match (&file.coeff_field, g) {
        (Some(f), _) if f.cyclotomic == 0 || f.cyclotomic > 1 << 12 => {
            return Err(schema("cyclotomic conductor must lie in 1..=4096"))
        }
        (Some(f), _) => f.cyclotomic as i64,
        (None, 1) => 1,
        (None, _) => return Err(schema("coeff_field is required when coeff_field_degree > 1")),
    };
    if file.nebentypus.modulus == 0 || file.level % file.nebentypus.modulus != 0 {
        return Err(schema("nebentypus modulus must divide the level"));
    }
    let gens = file
        .nebentypus
        .values
        .iter()
        .map(|&[r, n, d]| {
            if r < 0 {
                return Err(schema(format!("negative residue {r}")));
            }
            Ok((r as u64, checked_turn(n, d)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let psi = DirichletChar::from_generators(file.nebentypus.modulus, &gens)?;
    let basis: Vec<Cyclo> = (0..g).map(|j| Cyclo::root(turn(j as i64, zeta))).collect();
    let mut coeffs = vec![Cyclo::zero(); file.coefficients.len() + 1];
    for (i, row) in file.coefficients.iter().enumerate() {
        if row.len() != g + 1 {
            return Err(schema(format!("coefficient row {i} has {} entries, expected {}", row.len(), g + 1)));
        }
        if row[0] != i as i64 + 1 {
            return Err(schema(format!("coefficient rows must list n = 1, 2, ... in order; row {i} has n = {}", row[0])));
        }
        let mut c = Cyclo::zero();
        for (b, &x) in basis.iter().zip(&row[1..]) {
            if x != 0 {
                c = &c + &(&Cyclo::from_int(x) * b);
            }
        }
        coeffs[i + 1] = c;
    }
    if coeffs.len() < 2 || coeffs[1] != Cyclo::one() {
        return Err(schema("a(1) must be 1"));
    }
    let base = QExpansion::new(file.weight, file.level, psi, coeffs);
    validate(&base)?;
    let mut form = Eigenform::new(base);
    form.atkin_lehner = file.atkin_lehner;
    Ok(form)
}

pub fn ingest_eigenform(path: &Path) -> Result<Eigenform> {
    let text = std::fs::read_to_string(path).map_err(|e| schema(format!("{}: {e}", path.display())))?;
    parse_eigenform(&text)
}

/// The Hecke recursion at every good prime p with p² within the truncation,
/// then multiplicativity at the first coprime pairs ordered by product.
fn validate(f: &QExpansion) -> Result<()> {
    let d = f.truncation() as u64;
    for p in 2..=d {
        if p * p > d {
            break;
        }
        if !is_prime(p) || f.level % p == 0 {
            continue;
        }
        let pk = Cyclo::from_bigint(num_bigint::BigInt::from(p).pow(f.weight - 1));
        let psi_pk = &f.nebentypus.value(p as i128) * &pk;
        let ap = f.coeff(p as usize).clone();
        let (mut prev, mut cur, mut q, mut r) = (Cyclo::one(), ap.clone(), p, 1u32);
        while q.saturating_mul(p) <= d {
            let next = &(&ap * &cur) - &(&psi_pk * &prev);
            q *= p;
            if f.coeff(q as usize) != &next {
                return Err(Error::RecursionError(p, r + 1));
            }
            prev = cur;
            cur = next;
            r += 1;
        }
    }
    let mut checked = 0;
    'outer: for n in 6..=d {
        for a in 2..n {
            if a * a >= n {
                break;
            }
            let b = n / a;
            if a * b != n || gcd(a as i128, b as i128) != 1 {
                continue;
            }
            if f.coeff(n as usize) != &(f.coeff(a as usize) * f.coeff(b as usize)) {
                return Err(Error::MultiplicativityError(n, a, b));
            }
            checked += 1;
            if checked == MULTIPLICATIVITY_PAIRS {
                break 'outer;
            }
        }
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModulusSpec {
    c: u64,
    p: u64,
    s: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CharSpecFile {
    field: i64,
    #[serde(rename = "type")]
    kappa: [i64; 2],
    #[serde(default)]
    finite: Vec<[i64; 3]>,
    modulus: ModulusSpec,
}

/// A parsed character specification.
#[derive(Clone, Debug)]
pub struct CharacterSpec {
    pub field: ImagQuadField,
    pub kappa: (i64, i64),
    /// Conductor of the ring class group carrying the finite part, c·p^s.
    pub conductor: u64,
    pub c: u64,
    pub p: u64,
    pub s: u32,
    pub group: Arc<RingClassGroup>,
    pub finite: FiniteClassCharacter,
}

impl CharacterSpec {
    pub fn character(&self) -> Result<HeckeCharacter> {
        let ring = (self.conductor > 1).then(|| (self.group.clone(), self.finite.clone()));
        HeckeCharacter::new(self.field, self.kappa, ring)
    }
}

/// Parse `chi = {...}`; the `chi =` prefix is optional.
pub fn parse_character_spec(text: &str) -> Result<CharacterSpec> {
    let body = text.trim();
    let body = match body.strip_prefix("chi") {
        Some(rest) => rest.trim_start().strip_prefix('=').ok_or_else(|| schema("expected '=' after 'chi'"))?,
        None => body,
    };
    let spec: CharSpecFile = json5::from_str(body).map_err(|e| schema(e.to_string()))?;
    if spec.field.unsigned_abs() > MAX_MODULUS {
        return Err(schema(format!("|field| must be at most {MAX_MODULUS}")));
    }
    let field = ImagQuadField::new(spec.field)?;
    let ModulusSpec { c, p, s } = spec.modulus;
    if c == 0 {
        return Err(schema("modulus c must be positive"));
    }
    if s > 0 && !is_prime(p) {
        return Err(schema(format!("p = {p} is not prime")));
    }
    if s > 0 && gcd(c as i128, p as i128) != 1 {
        return Err(schema("c must be prime to p"));
    }
    let conductor = p
        .checked_pow(s)
        .and_then(|q| q.checked_mul(c))
        .filter(|&n| n < 1 << 20)
        .ok_or_else(|| schema("conductor too large"))?;
    let group = Arc::new(enumerate_class_group(&field.order(conductor), DEFAULT_ENUM_BOUND)?);
    let orders = group.structure.orders.clone();
    let mut exps = vec![0u64; orders.len()];
    for &[i, num, den] in &spec.finite {
        let t = checked_turn(num, den)?;
        let idx = usize::try_from(i).ok().filter(|&i| i < orders.len());
        let Some(idx) = idx else {
            return Err(schema(format!("generator index {i} out of range (group has {} generators)", orders.len())));
        };
        let d = orders[idx] as i128;
        let scaled = *t.numer() as i128 * d;
        let den = *t.denom() as i128;
        if scaled % den != 0 {
            return Err(schema(format!("value {num}/{den} on generator {i} has order not dividing {d}")));
        }
        exps[idx] = (scaled / den).rem_euclid(d) as u64;
    }
    let finite = FiniteClassCharacter { orders, exps };
    Ok(CharacterSpec { field, kappa: (spec.kappa[0], spec.kappa[1]), conductor, c, p, s, group, finite })
}

pub fn ingest_character_spec(path: &Path) -> Result<CharacterSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| schema(format!("{}: {e}", path.display())))?;
    parse_character_spec(&text)
}
