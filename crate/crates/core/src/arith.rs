//! Small-integer number theory helpers.

pub fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: i128, b: i128) -> i128 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b) * b).abs()
}

/// Returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn modulo(a: i128, m: i128) -> i128 {
    a.rem_euclid(m)
}

pub fn mod_inv(a: i128, m: i128) -> Option<i128> {
    let (g, x, _) = egcd(modulo(a, m), m);
    (g == 1).then(|| modulo(x, m))
}

pub fn mod_pow(base: i128, mut e: u64, m: i128) -> i128 {
    if m == 1 {
        return 0;
    }
    let mut b = modulo(base, m);
    let mut r = 1i128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a as i128, d, n as i128);
        if x == 1 || x == n as i128 - 1 {
            continue;
        }
        for _ in 1..s {
            x = x * x % n as i128;
            if x == n as i128 - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division, primes in increasing order.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

pub fn ord(mut n: i128, p: i128) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn is_squarefree(n: u64) -> bool {
    factor(n).iter().all(|&(_, e)| e == 1)
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor(n) {
        let cur = ds.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            ds.extend(cur.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

pub fn sigma0(n: u64) -> u64 {
    factor(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Kronecker symbol (d / n) for n > 0.
pub fn kronecker(d: i128, n: u64) -> i32 {
    if n == 0 {
        return if d.abs() == 1 { 1 } else { 0 };
    }
    let mut n = n as i128;
    let mut result = 1i32;
    while n % 2 == 0 {
        n /= 2;
        match modulo(d, 8) {
            0 | 2 | 4 | 6 => return 0,
            3 | 5 => result = -result,
            _ => {}
        }
    }
    let mut a = modulo(d, n);
    let mut m = n;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(m % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            result = -result;
        }
        a %= m;
    }
    if m == 1 {
        result
    } else {
        0
    }
}

/// Smallest non-negative square root of `a` modulo the odd prime `p`.
pub fn sqrt_mod_prime(a: i128, p: u64) -> Option<u64> {
    let a = modulo(a, p as i128) as u64;
    if a == 0 {
        return Some(0);
    }
    if kronecker(a as i128, p) != 1 {
        return None;
    }
    let pi = p as i128;
    let r = if p % 4 == 3 {
        mod_pow(a as i128, (p + 1) / 4, pi) as u64
    } else {
        // Tonelli-Shanks
        let mut q = p - 1;
        let mut s = 0;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let mut z = 2u64;
        while kronecker(z as i128, p) != -1 {
            z += 1;
        }
        let mut m = s;
        let mut c = mod_pow(z as i128, q, pi);
        let mut t = mod_pow(a as i128, q, pi);
        let mut r = mod_pow(a as i128, (q + 1) / 2, pi);
        while t != 1 {
            let mut i = 0;
            let mut tt = t;
            while tt != 1 {
                tt = tt * tt % pi;
                i += 1;
            }
            let b = mod_pow(c, 1u64 << (m - i - 1), pi);
            m = i;
            c = b * b % pi;
            t = t * c % pi;
            r = r * b % pi;
        }
        r as u64
    };
    Some(r.min(p - r))
}

/// Smallest primitive root modulo the odd prime `p` (or 1 for p = 2).
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let qs = prime_divisors(p - 1);
    (2..p)
        .find(|&g| qs.iter().all(|&q| mod_pow(g as i128, (p - 1) / q, p as i128) != 1))
        .expect("primitive root exists")
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n as usize + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n as usize {
        if sieve[i] {
            let mut j = i * i;
            while j <= n as usize {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (2..=n).filter(|&k| sieve[k as usize]).collect()
}

/// Integer square root (floor).
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Stirling numbers of the second kind S(m, j) for j = 0..=m.
pub fn stirling2_row(m: usize) -> Vec<num_bigint::BigInt> {
    use num_bigint::BigInt;
    let mut row = vec![BigInt::from(1)];
    for i in 1..=m {
        let mut next = vec![BigInt::from(0); i + 1];
        for j in 1..=i {
            let carry = if j < i { &row[j] * j } else { BigInt::from(0) };
            next[j] = carry + &row[j - 1];
        }
        row = next;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_small() {
        assert_eq!(kronecker(-7, 11), 1);
        assert_eq!(kronecker(-1, 7), -1);
        assert_eq!(kronecker(-7, 2), 1);
        assert_eq!(kronecker(-4, 5), 1);
        assert_eq!(kronecker(-23, 3), 1);
    }

    #[test]
    fn square_roots() {
        assert_eq!(sqrt_mod_prime(-7, 11), Some(2));
        assert_eq!(sqrt_mod_prime(-1, 5), Some(2));
        assert_eq!(sqrt_mod_prime(-1, 7), None);
        for p in primes_up_to(200).into_iter().skip(1) {
            for a in 1..p {
                if let Some(r) = sqrt_mod_prime(a as i128, p) {
                    assert_eq!(r * r % p, a);
                }
            }
        }
    }

    #[test]
    fn stirling() {
        let r = stirling2_row(4);
        let v: Vec<i64> = r.iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(v, vec![0, 1, 7, 6, 1]);
    }

    #[test]
    fn phi_and_factor() {
        assert_eq!(euler_phi(121), 110);
        assert_eq!(factor(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert!(is_prime(1_000_003));
        assert!(!is_prime(561));
    }
}
