//! Fundamental units of real quadratic fields Q(√d) by the continued-fraction
//! (PQa) expansion of √d, including the half-integer units of the maximal
//! order when d ≡ 5 (mod 8), and the divisor-pair extraction used by the
//! norm-(+1) case analyses.
//!
//! Units can be astronomically large; everything here is arbitrary-precision
//! and exact.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{factorize, is_square_nat, is_squarefree};
use crate::error::{Error, Result};

/// Fundamental unit (x + y√d)/denom of the maximal order of Q(√d), with
/// x² − d·y² = norm · denom². denom is 2 only for d ≡ 5 (mod 8) with x, y odd.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FundUnit {
    pub d: BigUint,
    pub x: BigUint,
    pub y: BigUint,
    pub denom: u8,
    pub norm: i8,
}

impl FundUnit {
    /// x² − d·y² == norm · denom², the defining identity.
    pub fn is_consistent(&self) -> bool {
        let x = BigInt::from(self.x.clone());
        let y = BigInt::from(self.y.clone());
        let d = BigInt::from(self.d.clone());
        &x * &x - d * &y * &y == BigInt::from(self.norm) * BigInt::from(self.denom).pow(2)
    }

    /// Rational coordinates (x/denom, y/denom) on the basis {1, √d}.
    pub fn coords(&self) -> (BigRational, BigRational) {
        let denom = BigInt::from(self.denom);
        (
            BigRational::new(BigInt::from(self.x.clone()), denom.clone()),
            BigRational::new(BigInt::from(self.y.clone()), denom),
        )
    }
}

impl std::fmt::Display for FundUnit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.denom == 1 {
            write!(f, "{} + {}*sqrt({})", self.x, self.y, self.d)
        } else {
            write!(f, "({} + {}*sqrt({}))/2", self.x, self.y, self.d)
        }
    }
}

/// Fundamental unit of the maximal order of Q(√d) for squarefree d > 1.
///
/// One continued-fraction expansion per discriminant class: the PQa
/// iteration runs on √d when d ≡ 2, 3 (mod 4) and on ω = (1+√d)/2 when
/// d ≡ 1 (mod 4), so half-integer units come straight out of the expansion.
/// In debug builds the d ≡ 1 (mod 4) answer is cross-checked against an
/// independent route (√d expansion plus exact cube-root recovery of the
/// half unit).
pub fn fund_unit(d: &BigUint) -> Result<FundUnit> {
    if d <= &BigUint::one() {
        return Err(Error::NotSquarefree(d.to_string()));
    }
    if !is_squarefree(d) {
        return Err(Error::NotSquarefree(d.to_string()));
    }
    #[allow(unused_mut)]
    let mut unit = if (d % 4u32) == BigUint::one() {
        let via_omega = cf_unit_half_mode(d);
        debug_assert_eq!(via_omega, cf_unit_integer_mode(d), "CF routes disagree on d = {d}");
        via_omega
    } else {
        cf_unit_integer_mode(d)
    };
    #[cfg(feature = "fault-inject-pell")]
    {
        unit.x += BigUint::one();
    }
    debug_assert!(cfg!(feature = "fault-inject-pell") || unit.is_consistent());
    Ok(unit)
}

/// PQa on √d: the convergent at the end of the first period is the minimal
/// solution of x² − d·y² = ±1. For d ≡ 1 (mod 4) the maximal order may hold
/// a smaller half-integer unit ε with ε³ equal to that solution; it is
/// recovered exactly from the trace equation X³ − 3·norm·X = 2x.
fn cf_unit_integer_mode(d: &BigUint) -> FundUnit {
    let a0 = d.sqrt();
    // state (P_i, Q_i) of the expansion of (P + sqrt(d))/Q, starting at sqrt(d)
    let mut p = BigUint::zero();
    let mut q = BigUint::one();
    // convergent window (h_{i-2}, h_{i-1}), (k_{i-2}, k_{i-1})
    let (mut h2, mut h1) = (BigUint::zero(), BigUint::one());
    let (mut k2, mut k1) = (BigUint::one(), BigUint::zero());
    let mut steps = 0u64;
    loop {
        let a = (&p + &a0) / &q;
        let h = &a * &h1 + &h2;
        let k = &a * &k1 + &k2;
        let p_next = &a * &q - &p;
        let q_next = (d - &p_next * &p_next) / &q;
        steps += 1;
        if q_next.is_one() {
            // Q returns to 1 exactly at the period, so h/k is h_{l-1}/k_{l-1}
            let norm = if steps % 2 == 1 { -1 } else { 1 };
            if (d % 4u32) == BigUint::one() {
                if let Some(half) = half_unit(d, &h, norm) {
                    return half;
                }
            }
            return FundUnit {
                d: d.clone(),
                x: h,
                y: k,
                denom: 1,
                norm,
            };
        }
        h2 = h1;
        h1 = h;
        k2 = k1;
        k1 = k;
        p = p_next;
        q = q_next;
    }
}

/// PQa on ω = (1+√d)/2 for d ≡ 1 (mod 4). With P₀ = 1, Q₀ = 2 the identity
/// (2hᵢ − kᵢ)² − d·kᵢ² = (−1)^{i+1}·2·Q_{i+1} turns the first return of Q
/// to 2 into the minimal solution of x² − d·y² = ±4, i.e. the fundamental
/// unit of the maximal order (coordinates both even exactly when the unit
/// lives in Z[√d]).
fn cf_unit_half_mode(d: &BigUint) -> FundUnit {
    debug_assert_eq!(d % 4u32, BigUint::one());
    let a0 = d.sqrt();
    let two = BigUint::from(2u32);
    let mut p = BigUint::one();
    let mut q = two.clone();
    let (mut h2, mut h1) = (BigUint::zero(), BigUint::one());
    let (mut k2, mut k1) = (BigUint::one(), BigUint::zero());
    let mut steps = 0u64;
    let mut first_state: Option<(BigUint, BigUint)> = None;
    loop {
        let a = (&p + &a0) / &q;
        let h = &a * &h1 + &h2;
        let k = &a * &k1 + &k2;
        let p_next = &a * &q - &p;
        let q_next = (d - &p_next * &p_next) / &q;
        steps += 1;
        // the expansion is purely periodic from the first step; a full cycle
        // without a return of Q to 2 would mean the principal cycle misses
        // the half-mode stop, so fall back to the sqrt(d) route
        match &first_state {
            None => first_state = Some((p_next.clone(), q_next.clone())),
            Some(s) if steps > 1 && *s == (p_next.clone(), q_next.clone()) => {
                debug_assert!(false, "no Q = 2 return in the principal cycle of {d}");
                return cf_unit_integer_mode(d);
            }
            _ => {}
        }
        if q_next == two {
            let norm = if steps % 2 == 1 { -1 } else { 1 };
            let x: BigUint = &h * 2u32 - &k; // 2h − k, with x² − d·k² = ±4
            let y = k;
            debug_assert_eq!(
                BigInt::from(x.clone()).pow(2) - BigInt::from(d.clone()) * BigInt::from(y.clone()).pow(2),
                BigInt::from(4 * norm as i64)
            );
            return if x.is_even() && y.is_even() {
                FundUnit {
                    d: d.clone(),
                    x: x >> 1u32,
                    y: y >> 1u32,
                    denom: 1,
                    norm,
                }
            } else {
                FundUnit {
                    d: d.clone(),
                    x,
                    y,
                    denom: 2,
                    norm,
                }
            };
        }
        h2 = h1;
        h1 = h;
        k2 = k1;
        k1 = k;
        p = p_next;
        q = q_next;
    }
}

/// Looks for ε = (X + Y√d)/2 with ε³ = x1 + y1√d, via X³ − 3·norm·X = 2·x1.
fn half_unit(d: &BigUint, x1: &BigUint, norm: i8) -> Option<FundUnit> {
    let target: BigInt = BigInt::from(x1.clone()) * 2;
    let c = target.to_biguint().unwrap().cbrt();
    let c = BigInt::from(c);
    for delta in -1i64..=2 {
        let cand = &c + BigInt::from(delta);
        if !cand.is_positive() || cand.is_even() {
            continue;
        }
        if &cand * &cand * &cand - BigInt::from(3 * norm) * &cand != target {
            continue;
        }
        let cand_u = cand.to_biguint().unwrap();
        // X² − d·Y² = 4·norm
        let rhs = BigInt::from(cand_u.clone()) * BigInt::from(cand_u.clone())
            - BigInt::from(4 * norm);
        let rhs = rhs.to_biguint()?;
        let (quot, rem) = rhs.div_rem(d);
        if !rem.is_zero() {
            continue;
        }
        let y = is_square_nat(&quot)?;
        if y.is_even() {
            continue;
        }
        return Some(FundUnit {
            d: d.clone(),
            x: cand_u,
            y,
            denom: 2,
            norm,
        });
    }
    None
}

/// For a norm-(+1) unit, the unique squarefree divisors (D₊, D₋) of 2d with
/// D₊·(x + denom) and D₋·(x − denom) perfect squares. Their product is d up
/// to squares, encoding which √(D·ε) lies in which multiquadratic extension.
pub fn pell_factor(eps: &FundUnit) -> Result<(BigUint, BigUint)> {
    if eps.norm != 1 {
        return Err(Error::HypothesisNotMet(format!(
            "pell_factor needs norm +1, unit of Q(sqrt({})) has norm {}",
            eps.d, eps.norm
        )));
    }
    let two_d = &eps.d * 2u32;
    let primes: Vec<BigUint> = factorize(&two_d).into_iter().map(|(p, _)| p).collect();
    let squarefree_divisors = |_: ()| -> Vec<BigUint> {
        let mut divs = vec![BigUint::one()];
        for p in &primes {
            let mut more: Vec<BigUint> = divs.iter().map(|d| d * p).collect();
            divs.append(&mut more);
        }
        divs
    };
    let denom = BigUint::from(eps.denom);
    let plus = &eps.x + &denom;
    let minus = &eps.x - &denom;
    let mut d_plus = None;
    let mut d_minus = None;
    for div in squarefree_divisors(()) {
        if is_square_nat(&(&div * &plus)).is_some() {
            debug_assert!(d_plus.is_none());
            d_plus = Some(div.clone());
        }
        if is_square_nat(&(&div * &minus)).is_some() {
            debug_assert!(d_minus.is_none());
            d_minus = Some(div);
        }
    }
    match (d_plus, d_minus) {
        (Some(p), Some(m)) => {
            // consistency: the product must be d up to squares
            let prod = &p * &m;
            let mut kernel = BigUint::one();
            for (q, e) in factorize(&prod) {
                if e % 2 == 1 {
                    kernel *= q;
                }
            }
            let mut d_kernel = BigUint::one();
            for (q, e) in factorize(&eps.d) {
                if e % 2 == 1 {
                    d_kernel *= q;
                }
            }
            if kernel != d_kernel {
                return Err(Error::Internal(format!(
                    "pell_factor divisors {p}, {m} do not multiply to d={} up to squares",
                    eps.d
                )));
            }
            Ok((p, m))
        }
        _ => Err(Error::NoPellFactor(eps.denom.to_string())),
    }
}

/// Is u + v√a a square in Q(√a)? Returns a root (c, e) with (c + e√a)² equal
/// to the input. Standalone quadratic-field test used by the unit-index rules
/// for radicands that need no ambient multiquadratic context.
pub fn sqrt_in_quad(u: &BigRational, v: &BigRational, a: &BigUint) -> Option<(BigRational, BigRational)> {
    let a_rat = BigRational::from(BigInt::from(a.clone()));
    if v.is_zero() {
        if let Some(c) = sqrt_rational(u) {
            return Some((c, BigRational::zero()));
        }
        if let Some(e) = sqrt_rational(&(u / &a_rat)) {
            return Some((BigRational::zero(), e));
        }
        return None;
    }
    let n = u * u - &a_rat * v * v;
    let s = sqrt_rational(&n)?;
    for sign in [1i32, -1] {
        let s_signed = &s * BigRational::from(BigInt::from(sign));
        let c2 = (u + &s_signed) / BigRational::from(BigInt::from(2));
        if let Some(c) = sqrt_rational(&c2) {
            if !c.is_zero() {
                let e = v / (&c * BigRational::from(BigInt::from(2)));
                debug_assert_eq!(&c * &c + &a_rat * &e * &e, u.clone());
                return Some((c, e));
            }
        }
    }
    None
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn sqrt_rational(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let num = is_square_nat(&q.numer().to_biguint().unwrap())?;
    let den = is_square_nat(&q.denom().to_biguint().unwrap())?;
    Some(BigRational::new(BigInt::from(num), BigInt::from(den)))
}
