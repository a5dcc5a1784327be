use std::path::Path;

use anticyc::arith::{factor, lcm};
use anticyc::cyclo::Turn;
use anticyc::formats::{ingest_character_spec, ingest_eigenform, CharacterSpec};
use anticyc::heckechar::{
    characters_of, class_character_conductor, gauss_sum, local_component_pbar, unitary_projection, HeckeCharacter,
};
use anticyc::lvalues::{
    c_tilde, constant_c1, constant_c2, constant_g, constant_v, euler_e_half, euler_e_prime, gamma_factor, interpolate,
    partition_primes, satake_table, InterpolationConfig,
};
use anticyc::nearly_holo::{
    e_tilde_from_convention, euler_depletion_check, period_sum, LevelStructure, NearlyHoloExpansion, VP_CONVENTION,
};
use anticyc::numerics::{prec_bits, to_strings};
use anticyc::qexp::{p_deplete, Eigenform, RootChoice};
use anticyc::quadfield::{
    class_number_formula, coset_representatives, enumerate_class_group, prime_to, ImagQuadField, ProperIdeal,
    RingClassGroup, DEFAULT_ENUM_BOUND,
};
use anticyc::selftest::measure_selftest;
use anticyc::{Error, Result};
use rug::Complex;
use serde_json::{json, Value};

use crate::{check_field_prime, Command, Common};

/// Default truncation for the ratio run.
const INTERPOLATE_TRUNC: u64 = 12000;
/// Largest character group listed by `chars`.
const CHAR_LIST_BOUND: usize = 4096;

fn c(z: &Complex) -> [String; 2] {
    to_strings(z, 20)
}

fn turn_str(t: Turn) -> String {
    format!("{}/{}", t.numer(), t.denom())
}

fn load_form(path: &Path, common: &Common) -> Result<Eigenform> {
    let mut f = ingest_eigenform(path)?;
    if let Some(d) = common.trunc {
        f.base = f.base.truncate(d as usize);
    }
    Ok(f)
}

fn reps_for(field: &ImagQuadField, group: &RingClassGroup, avoid: u64) -> Vec<ProperIdeal> {
    (0..group.size()).map(|i| prime_to(field, &group.forms[i], avoid)).collect()
}

pub fn run(cmd: &Command, common: &Common, seed: u64) -> Result<Value> {
    match cmd {
        Command::Classgroup { field, c, p, n } => classgroup(*field, *c, *p, *n),
        Command::Chars { field, c, p, n, char_path } => match char_path {
            Some(path) => char_values(&ingest_character_spec(path)?),
            None => {
                let field = field.ok_or_else(|| Error::SchemaError("--field is required without --char".into()))?;
                char_list(field, *c, *p, *n)
            }
        },
        Command::Hecke { form, p } => hecke(&load_form(form, common)?, *p),
        Command::MeasureSelftest { p, prec, samples } => {
            let r = measure_selftest(*p, *prec, *samples, seed)?;
            Ok(serde_json::to_value(r).expect("report serializes"))
        }
        Command::PeriodSum { form, char_path, m } => {
            let f = load_form(form, common)?;
            let spec = ingest_character_spec(char_path)?;
            period(&f, &spec, *m, common.digits)
        }
        Command::EulerCheck { form, char_path, p, m } => {
            let f = load_form(form, common)?;
            let spec = ingest_character_spec(char_path)?;
            check_field_prime(Some(spec.field.d_m), Some(*p))?;
            euler(&f, &spec, *p, *m, common.digits)
        }
        Command::Constants { form, char_path, p, s, m } => {
            let f = load_form(form, common)?;
            let spec = ingest_character_spec(char_path)?;
            check_field_prime(Some(spec.field.d_m), Some(*p))?;
            constants(&f, &spec, *p, *s, *m, common.digits)
        }
        Command::Interpolate { field, p, s, m, form } => {
            check_field_prime(Some(*field), Some(*p))?;
            let f = ingest_eigenform(form)?;
            let trunc = common.trunc.unwrap_or(INTERPOLATE_TRUNC) as usize;
            let cfg = InterpolationConfig { p: *p, s: *s, m: *m, digits: common.digits, trunc };
            let run = interpolate(&f, ImagQuadField::new(*field)?, &cfg)?;
            Ok(serde_json::to_value(run).expect("report serializes"))
        }
    }
}

fn classgroup(d: i64, cc: u64, p: Option<u64>, n: u32) -> Result<Value> {
    check_field_prime(Some(d), p)?;
    let field = ImagQuadField::new(d)?;
    let conductor = match p {
        Some(p) => cc * p.pow(n),
        None if n == 0 => cc,
        None => return Err(Error::SchemaError("--n needs --p".into())),
    };
    let order = field.order(conductor);
    let group = enumerate_class_group(&order, DEFAULT_ENUM_BOUND)?;
    let formula = match p {
        Some(p) => Some(class_number_formula(&field, cc, p, n)?),
        None => None,
    };
    let forms: Vec<String> = group.forms.iter().map(|f| f.to_string()).collect();
    Ok(json!({
        "field": field,
        "conductor": conductor,
        "discriminant": order.discriminant().to_string(),
        "size": group.size(),
        "invariants": group.structure.orders,
        "class_number_formula": formula,
        "forms": forms,
    }))
}

fn char_list(d: i64, cc: u64, p: Option<u64>, n: u32) -> Result<Value> {
    check_field_prime(Some(d), p)?;
    let field = ImagQuadField::new(d)?;
    let conductor = cc * p.map(|p| p.pow(n)).unwrap_or(1);
    let group = enumerate_class_group(&field.order(conductor), DEFAULT_ENUM_BOUND)?;
    let chars = characters_of(&group, CHAR_LIST_BOUND)?;
    let list = chars
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            Ok(json!({
                "index": i,
                "exponents": xi.exps,
                "order": xi.order(),
                "conductor": class_character_conductor(&group, xi)?,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({ "conductor": conductor, "invariants": group.structure.orders, "characters": list }))
}

fn char_values(spec: &CharacterSpec) -> Result<Value> {
    let chi = spec.character()?;
    let values: Vec<Value> = (0..spec.group.size())
        .map(|i| json!({ "form": spec.group.forms[i].to_string(), "value": turn_str(spec.finite.eval(&spec.group, i)) }))
        .collect();
    Ok(json!({
        "field": spec.field,
        "type": chi.kappa,
        "conductor": spec.conductor,
        "invariants": spec.group.structure.orders,
        "exponents": spec.finite.exps,
        "order": spec.finite.order(),
        "primitive_conductor": class_character_conductor(&spec.group, &spec.finite)?,
        "class_values": values,
    }))
}

fn hecke(f: &Eigenform, p: Option<u64>) -> Result<Value> {
    let prec = prec_bits(30);
    let d = f.base.truncation();
    let head: Vec<String> = (1..=d.min(20)).map(|n| f.a(n).to_string()).collect();
    let primes: Vec<u64> = anticyc::arith::primes_up_to(50.min(d as u64));
    let satake = satake_table(f, &primes, RootChoice::UpperHalf, prec)?;
    let satake: Vec<Value> = satake
        .iter()
        .map(|(l, (a, b))| json!({ "l": l, "alpha": c(a), "beta": c(b) }))
        .collect();
    let mut report = json!({
        "level": f.newform_level,
        "weight": f.weight(),
        "truncation": d,
        "nebentypus_conductor": f.base.nebentypus.conductor(),
        "atkin_lehner": f.atkin_lehner,
        "coefficients": head,
        "satake": satake,
        "validated": true,
    });
    if let Some(p) = p {
        let dep = p_deplete(&f.base, p)?;
        let vanish = (0..=dep.truncation()).step_by(p as usize).all(|n| dep.coeff(n).is_zero());
        report["depletion"] = json!({ "p": p, "level": dep.level, "vanishes_on_multiples": vanish });
    }
    Ok(report)
}

fn period(f: &Eigenform, spec: &CharacterSpec, m: u32, digits: u32) -> Result<Value> {
    let prec = prec_bits(digits);
    let field = spec.field;
    let chi = spec.character()?;
    let reps = reps_for(&field, &spec.group, spec.conductor * f.newform_level * spec.p.max(1));
    let structure = LevelStructure::for_level(&field, f.newform_level, spec.conductor)?;
    let expansion = NearlyHoloExpansion::new(&f.base, prec).iterate(m);
    let sum = period_sum(&expansion, &chi, &reps, &structure)?;
    let evals: Vec<Value> = sum
        .evaluations
        .iter()
        .zip(&sum.summands)
        .map(|(e, s)| {
            json!({
                "ideal": e.ideal.form().to_string(),
                "tau": c(&e.tau),
                "value": c(&e.value),
                "summand": c(s),
                "tail_bound": e.tail_bound,
            })
        })
        .collect();
    Ok(json!({
        "type": chi.kappa,
        "m": m,
        "level": structure.level(),
        "total": c(&sum.total),
        "terms": evals,
        "flags": { "tail_bound": "HEURISTIC" },
    }))
}

fn euler(f: &Eigenform, spec: &CharacterSpec, p: u64, m: u32, digits: u32) -> Result<Value> {
    let prec = prec_bits(digits);
    let field = spec.field;
    let chi = spec.character()?;
    let n0 = f.newform_level;
    let reps = match coset_representatives(&field, spec.conductor, p * n0, DEFAULT_ENUM_BOUND) {
        Ok(r) => r,
        Err(_) => reps_for(&field, &spec.group, p * spec.conductor * n0),
    };
    let structure = LevelStructure::for_level(&field, n0, spec.conductor)?;
    let r = euler_depletion_check(&f.base, m, &chi, &reps, &structure, p, VP_CONVENTION, prec)?;
    Ok(json!({
        "p": p,
        "m": m,
        "convention": VP_CONVENTION,
        "lhs": c(&r.lhs),
        "rhs": c(&r.rhs),
        "e_tilde": c(&r.e_tilde),
        "rel_err": r.rel_err,
    }))
}

fn constants(f: &Eigenform, spec: &CharacterSpec, p: u64, s: u32, m: u32, digits: u32) -> Result<Value> {
    let prec = prec_bits(digits);
    let field = spec.field;
    let k = f.weight();
    let n0 = f.newform_level;
    let chi: HeckeCharacter = spec.character()?;
    let chi_minus = unitary_projection(&chi)?;
    let sets = partition_primes(&field, n0, spec.conductor, p, s)?;
    let mut sat_primes = sets.csp.clone();
    sat_primes.extend(factor(field.d_m.unsigned_abs()).into_iter().map(|(l, _)| l));
    let satake = satake_table(f, &sat_primes, RootChoice::UpperHalf, prec)?;
    let c_psi = f.base.nebentypus.conductor();
    let n = lcm(n0 as i128, p.pow(s) as i128) as u64;
    let e_half = euler_e_half(&chi_minus, &satake, &sets, prec)?;
    let e_prime = euler_e_prime(&chi_minus, &satake, &sets, m, k, c_psi, prec)?;
    let c1 = constant_c1(&field, &sets, p, s, k, m, n, prec);
    let v = constant_v(&field, &sets, p, s, prec);
    let g = constant_g(&chi_minus, &sets, p, s, c_psi, prec)?;
    let e_tilde = e_tilde_from_convention(&f.base, m, &chi, p, VP_CONVENTION, prec)?;
    let gauss = gauss_sum(&local_component_pbar(&chi, p, s)?)?.to_complex(prec);
    let one = Complex::with_val(prec, 1);
    let ct = c_tilde(&gauss, &one, &rug::Float::with_val(prec, 1), k, m, &field, spec.conductor.max(1));
    Ok(json!({
        "prime_sets": sets,
        "c1": c(&c1),
        "c2": constant_c2(&field, sets.nu(2)),
        "v": v.to_string_radix(10, Some(20)),
        "G": c(&g),
        "E_half": c(&e_half),
        "E_prime": c(&e_prime),
        "E_tilde": c(&e_tilde),
        "C_tilde": c(&ct),
        "gamma_factor": c(&gamma_factor(k, m, prec)),
        "conventions": { "j": "1", "abs_det": "1", "vp": VP_CONVENTION },
    }))
}
