//! Structure of a finite abelian group given by a multiplication oracle.
//!
//! Elements are indices `0..n`.  The result carries invariant factors,
//! generators, and a discrete-log table.

use crate::arith::egcd;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianStructure {
    /// Invariant factors `d_1 | d_2 | ...`, all greater than one.
    pub orders: Vec<u64>,
    /// Element index of each generator.
    pub generators: Vec<usize>,
    /// `dlog[x][j]` is the exponent of generator `j` in element `x`.
    pub dlog: Vec<Vec<u64>>,
}

impl AbelianStructure {
    pub fn size(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Element index with the given exponent vector.
    pub fn element(&self, exps: &[u64]) -> usize {
        self.dlog
            .iter()
            .position(|v| v.iter().zip(exps).zip(&self.orders).all(|((a, b), d)| a % d == b % d))
            .expect("exponent vector names an element")
    }
}

pub fn structure(
    n: usize,
    identity: usize,
    mul: impl Fn(usize, usize) -> usize,
) -> AbelianStructure {
    assert!(n > 0 && identity < n);
    let mut gens: Vec<usize> = Vec::new();
    let mut vecs: Vec<Option<Vec<i128>>> = vec![None; n];
    vecs[identity] = Some(Vec::new());
    let mut members = vec![identity];
    for cand in 0..n {
        if vecs[cand].is_some() {
            continue;
        }
        gens.push(cand);
        let r = gens.len();
        for m in &members {
            vecs[*m].as_mut().unwrap().resize(r, 0);
        }
        let mut head = 0;
        while head < members.len() {
            let x = members[head];
            head += 1;
            for (i, &g) in gens.iter().enumerate() {
                let y = mul(x, g);
                if vecs[y].is_none() {
                    let mut v = vecs[x].clone().unwrap();
                    v[i] += 1;
                    vecs[y] = Some(v);
                    members.push(y);
                }
            }
        }
    }
    let r = gens.len();
    if r == 0 {
        return AbelianStructure {
            orders: Vec::new(),
            generators: Vec::new(),
            dlog: vec![Vec::new(); n],
        };
    }
    let vecs: Vec<Vec<i128>> = vecs.into_iter().map(|v| v.unwrap()).collect();
    let modulus = n as i128;
    let mut basis: Vec<Option<Vec<i128>>> = (0..r)
        .map(|i| {
            let mut row = vec![0; r];
            row[i] = modulus;
            Some(row)
        })
        .collect();
    for x in 0..n {
        for (i, &g) in gens.iter().enumerate() {
            let y = mul(x, g);
            let rel: Vec<i128> = (0..r)
                .map(|c| vecs[x][c] + i128::from(c == i) - vecs[y][c])
                .collect();
            insert_relation(&mut basis, rel, modulus);
        }
    }
    let mut a: Vec<Vec<i128>> = basis.into_iter().map(|b| b.unwrap()).collect();
    let (diag, v, vinv) = smith(&mut a);
    let mut orders = Vec::new();
    let mut generators = Vec::new();
    let mut keep = Vec::new();
    for (j, &d) in diag.iter().enumerate() {
        if d > 1 {
            keep.push(j);
            orders.push(d as u64);
            let mut elt = identity;
            for i in 0..r {
                let e = vinv[j][i].rem_euclid(modulus) as u64;
                elt = mul(elt, pow(&mul, identity, gens[i], e));
            }
            generators.push(elt);
        }
    }
    let dlog = vecs
        .iter()
        .map(|x| {
            keep.iter()
                .map(|&j| {
                    let s: i128 = (0..r).map(|i| x[i] * v[i][j]).sum();
                    s.rem_euclid(diag[j]) as u64
                })
                .collect()
        })
        .collect();
    AbelianStructure { orders, generators, dlog }
}

fn pow(mul: &impl Fn(usize, usize) -> usize, identity: usize, g: usize, mut e: u64) -> usize {
    let mut result = identity;
    let mut base = g;
    while e > 0 {
        if e & 1 == 1 {
            result = mul(result, base);
        }
        base = mul(base, base);
        e >>= 1;
    }
    result
}

fn insert_relation(basis: &mut [Option<Vec<i128>>], mut v: Vec<i128>, modulus: i128) {
    let r = v.len();
    for c in 0..r {
        for e in v.iter_mut() {
            *e = e.rem_euclid(modulus);
        }
        if v[c] == 0 {
            continue;
        }
        match basis[c].take() {
            None => {
                basis[c] = Some(v);
                return;
            }
            Some(b) => {
                let (g, x, y) = egcd(b[c], v[c]);
                let (bc, vc) = (b[c] / g, v[c] / g);
                let mut pivot: Vec<i128> = (0..r).map(|k| x * b[k] + y * v[k]).collect();
                let rest: Vec<i128> = (0..r).map(|k| bc * v[k] - vc * b[k]).collect();
                for e in pivot.iter_mut().skip(c + 1) {
                    *e = e.rem_euclid(modulus);
                }
                basis[c] = Some(pivot);
                v = rest;
            }
        }
    }
}

/// Smith normal form of a square nonsingular matrix.  Returns the diagonal,
/// the column transform `V` and its inverse, with `U A V = diag`.
pub fn smith(a: &mut [Vec<i128>]) -> (Vec<i128>, Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let r = a.len();
    let mut v: Vec<Vec<i128>> = (0..r).map(|i| (0..r).map(|j| i128::from(i == j)).collect()).collect();
    let mut vinv = v.clone();
    for t in 0..r {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..r {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            a.swap(t, bi);
            swap_cols(a, t, bj);
            swap_cols(&mut v, t, bj);
            vinv.swap(t, bj);
            let mut clean = true;
            for i in t + 1..r {
                let q = a[i][t].div_euclid(a[t][t]);
                if q != 0 {
                    for k in t..r {
                        a[i][k] -= q * a[t][k];
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..r {
                let q = a[t][j].div_euclid(a[t][t]);
                if q != 0 {
                    col_sub(a, j, t, q);
                    col_sub(&mut v, j, t, q);
                    for k in 0..r {
                        vinv[t][k] += q * vinv[j][k];
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let p = a[t][t];
            let bad = (t + 1..r).find(|&i| (t + 1..r).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    for k in t..r {
                        a[t][k] += a[i][k];
                    }
                }
                None => break,
            }
        }
        if a[t][t] < 0 {
            for row in a.iter_mut() {
                row[t] = -row[t];
            }
            for row in v.iter_mut() {
                row[t] = -row[t];
            }
            for e in vinv[t].iter_mut() {
                *e = -*e;
            }
        }
    }
    ((0..r).map(|i| a[i][i]).collect(), v, vinv)
}

fn swap_cols(a: &mut [Vec<i128>], i: usize, j: usize) {
    if i != j {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
    }
}

fn col_sub(a: &mut [Vec<i128>], j: usize, t: usize, q: i128) {
    for row in a.iter_mut() {
        row[j] -= q * row[t];
    }
}
