//! Rational-integer groundwork: primality, Jacobi/Kronecker symbols, modular
//! square roots, perfect-square tests and the e² + 4f² decomposition of a
//! prime p ≡ 1 (mod 4).

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A prime p ≡ 1 (mod 4), validated on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Prime1Mod4 {
    p: BigUint,
    residue8: u8,
}

impl Prime1Mod4 {
    pub fn new(p: BigUint) -> Result<Self> {
        if !is_prime(&p) {
            return Err(Error::NotPrime(p.to_string()));
        }
        let residue8 = (&p % 8u32).to_u8().unwrap();
        if residue8 % 4 != 1 {
            return Err(Error::NotOneMod4(p.to_string()));
        }
        Ok(Self { p, residue8 })
    }

    pub fn value(&self) -> &BigUint {
        &self.p
    }

    /// p mod 8, either 1 or 5.
    pub fn residue8(&self) -> u8 {
        self.residue8
    }
}

impl std::fmt::Display for Prime1Mod4 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.p)
    }
}

/// Miller–Rabin with the base set that is deterministic below 2^64; larger
/// inputs fall back to the same bases plus further witnesses, which is a
/// probabilistic answer (inputs here are desk-scale, so this path is cold).
pub fn is_prime(n: &BigUint) -> bool {
    if n < &BigUint::from(2u32) {
        return false;
    }
    for small in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let s = BigUint::from(small);
        if n == &s {
            return true;
        }
        if (n % &s).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let deterministic: &[u64] = &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    let extra: &[u64] = &[41, 43, 47, 53, 59, 61, 67, 71];
    let run = |a: &u64| -> bool {
        let a = *a;
        // true = passes (probably prime for this base)
        let a = BigUint::from(a) % n;
        if a.is_zero() {
            return true;
        }
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            return true;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                return true;
            }
        }
        false
    };
    if n.to_u64().is_some() {
        deterministic.iter().all(run)
    } else {
        deterministic.iter().chain(extra.iter()).all(run)
    }
}

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi(a: &BigInt, n: &BigInt) -> Result<i8> {
    if !n.is_positive() || n.is_even() {
        return Err(Error::BadJacobiModulus(n.to_string()));
    }
    let mut num = a.mod_floor(n);
    let mut den = n.clone();
    let mut acc = 1i8;
    loop {
        num = num.mod_floor(&den);
        if num.is_zero() {
            return Ok(if den.is_one() { 1 } else { 0 });
        }
        // pull out factors of two via the second supplement
        let tz = num.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            num >>= tz;
            if tz % 2 == 1 {
                let d8 = (&den % 8u32).to_u8().unwrap();
                if d8 == 3 || d8 == 5 {
                    acc = -acc;
                }
            }
        }
        if num.is_one() {
            return Ok(acc);
        }
        // both odd: quadratic reciprocity
        if (&num % 4u32).to_u8().unwrap() == 3 && (&den % 4u32).to_u8().unwrap() == 3 {
            acc = -acc;
        }
        std::mem::swap(&mut num, &mut den);
    }
}

/// Kronecker symbol (a/n), extending Jacobi to arbitrary n.
pub fn kronecker(a: &BigInt, n: &BigInt) -> i8 {
    if n.is_zero() {
        return if a.magnitude().is_one() { 1 } else { 0 };
    }
    let mut acc = 1i8;
    let mut n = n.clone();
    if n.is_negative() {
        n = -n;
        if a.is_negative() {
            acc = -acc;
        }
    }
    let tz = n.trailing_zeros().unwrap_or(0);
    if tz > 0 {
        if a.is_even() {
            return 0;
        }
        n >>= tz;
        if tz % 2 == 1 {
            let a8 = a.mod_floor(&BigInt::from(8)).to_u8().unwrap();
            if a8 == 3 || a8 == 5 {
                acc = -acc;
            }
        }
    }
    if n.is_one() {
        return acc;
    }
    acc * jacobi(a, &n).expect("n odd positive here")
}

/// Exact integer square root test.
pub fn is_square_nat(n: &BigUint) -> Option<BigUint> {
    let r = n.sqrt();
    if &(&r * &r) == n {
        Some(r)
    } else {
        None
    }
}

/// Square root of a mod p (odd prime) by Tonelli–Shanks, canonicalized to
/// 0 <= r <= (p-1)/2. Returns None for a quadratic non-residue.
pub fn sqrt_mod(a: &BigInt, p: &BigUint) -> Result<Option<BigUint>> {
    let p_int = BigInt::from(p.clone());
    if p.is_even() || !is_prime(p) {
        return Err(Error::BadSqrtModulus(p.to_string()));
    }
    let a = a.mod_floor(&p_int).to_biguint().unwrap();
    if a.is_zero() {
        return Ok(Some(BigUint::zero()));
    }
    if jacobi(&BigInt::from(a.clone()), &p_int)? != 1 {
        return Ok(None);
    }
    let one = BigUint::one();
    let p_minus_1 = p - &one;
    let r = if (p % 4u32).to_u8().unwrap() == 3 {
        a.modpow(&((p + &one) >> 2), p)
    } else {
        // full Tonelli–Shanks
        let s = p_minus_1.trailing_zeros().unwrap();
        let q = &p_minus_1 >> s;
        let mut z = BigUint::from(2u32);
        while jacobi(&BigInt::from(z.clone()), &p_int)? != -1 {
            z += 1u32;
        }
        let mut m = s;
        let mut c = z.modpow(&q, p);
        let mut t = a.modpow(&q, p);
        let mut r = a.modpow(&((&q + &one) >> 1), p);
        while !t.is_one() {
            let mut i = 0u64;
            let mut t2 = t.clone();
            while !t2.is_one() {
                t2 = (&t2 * &t2) % p;
                i += 1;
            }
            let b = c.modpow(&(BigUint::one() << (m - i - 1)), p);
            m = i;
            c = (&b * &b) % p;
            t = (&t * &c) % p;
            r = (&r * &b) % p;
        }
        r
    };
    let canonical = if r > (&p_minus_1 >> 1) { p - &r } else { r };
    Ok(Some(canonical))
}

/// Writes p = e² + (2f)² with e odd > 0, f > 0; unique under those
/// constraints. Runs Cornacchia's descent on a square root of -1 mod p.
pub fn cornacchia4(p: &Prime1Mod4) -> Result<(BigUint, BigUint)> {
    let pv = p.value();
    let root = sqrt_mod(&BigInt::from(-1), pv)?
        .ok_or_else(|| Error::Internal(format!("-1 must be a residue mod {pv}")))?;
    // half-gcd descent: remainder sequence of (p, root) down past sqrt(p)
    let limit = pv.sqrt();
    let mut a = pv.clone();
    let mut b = root;
    while b > limit {
        let r = &a % &b;
        a = b;
        b = r;
    }
    let x = b;
    let y2 = pv - &x * &x;
    let y = is_square_nat(&y2)
        .ok_or_else(|| Error::Internal(format!("Cornacchia residue {y2} not a square")))?;
    let (e, two_f) = if x.is_odd() { (x, y) } else { (y, x) };
    debug_assert!(e.is_odd() && two_f.is_even());
    let f: BigUint = two_f >> 1u32;
    if f.is_zero() {
        return Err(Error::Internal(format!("degenerate decomposition of {pv}")));
    }
    debug_assert_eq!(&(&e * &e) + &(&f * &f) * 4u32, pv.clone());
    Ok((e, f))
}

/// Squarefree test by trial division; inputs are desk-scale.
pub fn is_squarefree(n: &BigUint) -> bool {
    let mut n = n.clone();
    if n.is_zero() {
        return false;
    }
    let mut d = BigUint::from(2u32);
    while (&d * &d) <= n {
        if (&n % &d).is_zero() {
            n /= &d;
            if (&n % &d).is_zero() {
                return false;
            }
        }
        d += 1u32;
    }
    true
}

/// Distinct prime factors, by trial division; inputs are desk-scale.
pub fn factorize(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut d = BigUint::from(2u32);
    while (&d * &d) <= n {
        if (&n % &d).is_zero() {
            let mut e = 0;
            while (&n % &d).is_zero() {
                n /= &d;
                e += 1;
            }
            out.push((d.clone(), e));
        }
        d += 1u32;
    }
    if !n.is_one() {
        out.push((n, 1));
    }
    out
}
