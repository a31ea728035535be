//! Exact arithmetic in `Z[i]`: rounded division, gcd, exact square roots,
//! splitting of rational primes p ≡ 1 (mod 4), and the decompositions
//! x + i·denom = i^t · (ramified primes) · y₁² that drive the radical
//! identities of the capitulation proofs.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{cornacchia4, is_square_nat, Prime1Mod4};
use crate::error::{Error, Result};
use crate::pell::FundUnit;

/// A Gaussian integer a + bi.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussInt {
    pub fn new(re: impl Into<BigInt>, im: impl Into<BigInt>) -> Self {
        Self {
            re: re.into(),
            im: im.into(),
        }
    }

    pub fn zero() -> Self {
        Self::new(0, 0)
    }

    pub fn one() -> Self {
        Self::new(1, 0)
    }

    pub fn i() -> Self {
        Self::new(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm(&self) -> BigUint {
        (&self.re * &self.re + &self.im * &self.im)
            .to_biguint()
            .unwrap()
    }

    pub fn is_unit(&self) -> bool {
        self.norm().is_one()
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }

    pub fn mul_i(&self) -> Self {
        Self::new(-self.im.clone(), self.re.clone())
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.re.clone(), -self.im.clone())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Rounded division: q = round(self/rhs) componentwise, r = self - q·rhs,
    /// so that N(r) <= N(rhs)/2.
    pub fn div_rem_rounded(&self, rhs: &Self) -> (Self, Self) {
        assert!(!rhs.is_zero(), "division by zero Gaussian integer");
        let n = BigInt::from(rhs.norm());
        let num = self.mul(&rhs.conj());
        let round_div = |a: &BigInt| -> BigInt {
            // round to nearest, ties toward +infinity; any tie rule works
            let two_a: BigInt = a * 2;
            (two_a + &n).div_floor(&(&n * 2))
        };
        let q = Self::new(round_div(&num.re), round_div(&num.im));
        let r = self.sub(&q.mul(rhs));
        (q, r)
    }

    /// Exact quotient self/rhs when rhs divides self.
    pub fn exact_div(&self, rhs: &Self) -> Option<Self> {
        let (q, r) = self.div_rem_rounded(rhs);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    pub fn divides(&self, other: &Self) -> bool {
        other.exact_div(self).is_some()
    }

    /// Canonical associate: the unique unit multiple with re > 0, im >= 0
    /// (zero stays zero).
    pub fn first_quadrant(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut z = self.clone();
        for _ in 0..3 {
            if z.re.is_positive() && !z.im.is_negative() {
                return z;
            }
            z = z.mul_i();
        }
        z
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem_rounded(&b);
            a = b;
            b = r;
        }
        a.first_quadrant()
    }

    /// Exact square root in `Z[i]`, canonicalized to re > 0, or re == 0 with
    /// im > 0. None when the element is not a square.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        let root = if self.im.is_zero() {
            {
                let c = is_square_nat(&self.re.magnitude().clone())?;
                if self.re.is_positive() {
                    Self::new(BigInt::from(c), 0)
                } else {
                    Self::new(0, BigInt::from(c))
                }
            }
        } else {
            let s = BigInt::from(is_square_nat(&self.norm())?);
            let c2: BigInt = (&self.re + &s) / 2;
            if (&self.re + &s).is_odd() || c2.is_negative() {
                return None;
            }
            let c = BigInt::from(is_square_nat(&c2.to_biguint()?)?);
            if c.is_zero() {
                return None;
            }
            let two_c: BigInt = &c * 2;
            let (d, rem) = self.im.div_rem(&two_c);
            if !rem.is_zero() {
                return None;
            }
            Self::new(c, d)
        };
        let root = if root.re.is_negative() || (root.re.is_zero() && root.im.is_negative()) {
            root.neg()
        } else {
            root
        };
        if root.square() == *self {
            Some(root)
        } else {
            None
        }
    }
}

impl std::fmt::Display for GaussInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// The normalized Gaussian prime π = e + 2fi above a rational prime
/// p ≡ 1 (mod 4), with e odd > 0 and f > 0. Its conjugate e − 2fi is the
/// complementary factor: p = π·π̄.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussPrime {
    pub p: Prime1Mod4,
    pub e: BigUint,
    pub f: BigUint,
}

impl GaussPrime {
    pub fn pi(&self) -> GaussInt {
        GaussInt::new(
            BigInt::from(self.e.clone()),
            BigInt::from(self.f.clone()) * 2,
        )
    }

    pub fn pi_conj(&self) -> GaussInt {
        self.pi().conj()
    }
}

/// Splits p ≡ 1 (mod 4) as π·π̄ with π = e + 2fi normalized by cornacchia4.
pub fn split_prime(p: &Prime1Mod4) -> Result<GaussPrime> {
    let (e, f) = cornacchia4(p)?;
    let gp = GaussPrime {
        p: p.clone(),
        e,
        f,
    };
    debug_assert_eq!(gp.pi().mul(&gp.pi_conj()).re, BigInt::from(p.value().clone()));
    Ok(gp)
}

/// Unit twist realized by a decomposition: α = y₁²·(primes) for `Plain`
/// or α = i·y₁²·(primes) for `ITwisted`. Signs are absorbed into y₁.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Twist {
    Plain,
    ITwisted,
}

impl Twist {
    pub fn unit(&self) -> GaussInt {
        match self {
            Twist::Plain => GaussInt::one(),
            Twist::ITwisted => GaussInt::i(),
        }
    }
}

/// Which member of a conjugate prime pair divides the decomposed element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Pi,
    PiConj,
}

/// α = i^twist · (1+i)^{ramified2} · Π selected πⱼ^{±} · y₁², with
/// y₂ = conj(y₁) and y₁·y₂ = N(y₁) recovering the Pell y-coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub twist: Twist,
    pub chosen: Vec<Which>,
    pub y1: GaussInt,
    pub y2: GaussInt,
}

impl Decomposition {
    /// The selected prime factor for pair j.
    pub fn selected(&self, pairs: &[GaussPrime], j: usize) -> GaussInt {
        match self.chosen[j] {
            Which::Pi => pairs[j].pi(),
            Which::PiConj => pairs[j].pi_conj(),
        }
    }
}

/// Factors α as unit · (1+i)^{0 or 1} · (one prime from each pair) · y₁².
///
/// Each conjugate pair must divide α through exactly one member and each to
/// multiplicity one modulo squares; what remains must be a unit times a
/// square. This is exactly the shape of x ± i·denom when (x + y√d)/denom is
/// a norm-(−1) unit and d is the product of the pairs' primes (times 2 when
/// ramified2 is set).
pub fn decompose_unit_square(
    alpha: &GaussInt,
    ramified2: bool,
    pairs: &[GaussPrime],
) -> Result<Decomposition> {
    let mut rest = alpha.clone();
    if ramified2 {
        let one_plus_i = GaussInt::new(1, 1);
        rest = rest.exact_div(&one_plus_i).ok_or_else(|| {
            Error::DecompositionFailed(format!("(1+i) does not divide {alpha}"))
        })?;
    }
    let mut chosen = Vec::with_capacity(pairs.len());
    for pair in pairs {
        if let Some(q) = rest.exact_div(&pair.pi()) {
            rest = q;
            chosen.push(Which::Pi);
        } else if let Some(q) = rest.exact_div(&pair.pi_conj()) {
            rest = q;
            chosen.push(Which::PiConj);
        } else {
            return Err(Error::DecompositionFailed(format!(
                "neither factor of {} divides {alpha}",
                pair.p
            )));
        }
    }
    let (twist, y1) = if let Some(y1) = rest.sqrt() {
        (Twist::Plain, y1)
    } else if let Some(y1) = rest.mul(&GaussInt::i().conj()).sqrt() {
        // rest = i·y₁² tested as rest/i = rest·(-i)
        (Twist::ITwisted, y1)
    } else {
        return Err(Error::DecompositionFailed(format!(
            "residual {rest} of {alpha} is not a unit times a square"
        )));
    };
    let y2 = y1.conj();
    // exact reconstruction
    let mut recon = twist.unit().mul(&y1.square());
    if ramified2 {
        recon = recon.mul(&GaussInt::new(1, 1));
    }
    for (pair, which) in pairs.iter().zip(&chosen) {
        recon = recon.mul(&match which {
            Which::Pi => pair.pi(),
            Which::PiConj => pair.pi_conj(),
        });
    }
    if &recon != alpha {
        return Err(Error::DecompositionFailed(format!(
            "reconstruction {recon} differs from {alpha}"
        )));
    }
    Ok(Decomposition {
        twist,
        chosen,
        y1,
        y2,
    })
}

/// Decomposes x + i·denom for a norm-(−1) fundamental unit (x + y√p)/denom
/// of Q(√p) against the normalized prime π above p. The output satisfies
/// x + i·denom = i^twist · π^± · y₁² exactly, with y = y₁·conj(y₁).
pub fn pell_gauss_decompose(eps: &FundUnit, pi: &GaussPrime) -> Result<Decomposition> {
    if &eps.d != pi.p.value() {
        return Err(Error::HypothesisNotMet(format!(
            "unit of Q(sqrt({})) does not match the prime {}",
            eps.d, pi.p
        )));
    }
    if eps.norm != -1 {
        return Err(Error::HypothesisNotMet(format!(
            "decomposition needs norm -1, unit of Q(sqrt({})) has norm +1",
            eps.d
        )));
    }
    let alpha = GaussInt::new(BigInt::from(eps.x.clone()), BigInt::from(eps.denom));
    let dec = decompose_unit_square(&alpha, false, std::slice::from_ref(pi))?;
    // y recovers the Pell coordinate: N(y1) = y
    if dec.y1.norm() != eps.y {
        return Err(Error::Internal(format!(
            "N(y1) = {} differs from the Pell coordinate {}",
            dec.y1.norm(),
            eps.y
        )));
    }
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pell::fund_unit;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    fn g(re: i64, im: i64) -> GaussInt {
        GaussInt::new(re, im)
    }

    fn prime(p: u64) -> Prime1Mod4 {
        Prime1Mod4::new(BigUint::from(p)).unwrap()
    }

    #[test]
    fn split_prime_known_values() {
        let s5 = split_prime(&prime(5)).unwrap();
        assert_eq!(s5.pi(), g(1, 2));
        let s13 = split_prime(&prime(13)).unwrap();
        assert_eq!(s13.pi(), g(3, 2));
        let s17 = split_prime(&prime(17)).unwrap();
        assert_eq!(s17.pi(), g(1, 4));
    }

    #[test]
    fn split_times_conjugate_is_p() {
        for p in (5u64..2000).filter(|&p| p % 4 == 1 && crate::arith::is_prime(&BigUint::from(p))) {
            let s = split_prime(&prime(p)).unwrap();
            assert_eq!(s.pi().mul(&s.pi_conj()), g(p as i64, 0));
        }
    }

    #[test]
    fn sqrt_known_values() {
        assert_eq!(g(0, 2).sqrt(), Some(g(1, 1)));
        assert_eq!(g(-4, 0).sqrt(), Some(g(0, 2)));
        assert_eq!(g(9, 0).sqrt(), Some(g(3, 0)));
        assert_eq!(g(3, 4).sqrt(), Some(g(2, 1)));
        assert_eq!(g(1, 1).sqrt(), None);
        assert_eq!(g(2, 0).sqrt(), None);
    }

    #[test]
    fn pell_decompose_known_values() {
        // eps = (1+sqrt(5))/2, pi = 1+2i: x+2i = 1+2i = pi itself
        let e5 = fund_unit(&BigUint::from(5u32)).unwrap();
        let s5 = split_prime(&prime(5)).unwrap();
        let d = pell_gauss_decompose(&e5, &s5).unwrap();
        assert_eq!(d.twist, Twist::Plain);
        assert_eq!(d.chosen, vec![Which::Pi]);
        assert_eq!(d.y1, g(1, 0));

        // eps = (3+sqrt(13))/2, pi = 3+2i
        let e13 = fund_unit(&BigUint::from(13u32)).unwrap();
        let s13 = split_prime(&prime(13)).unwrap();
        let d = pell_gauss_decompose(&e13, &s13).unwrap();
        assert_eq!(d.twist, Twist::Plain);
        assert_eq!(d.y1, g(1, 0));
    }

    #[test]
    fn pell_decompose_rejects_wrong_field() {
        // unit of Q(sqrt(2)): 2 is not 1 mod 4, so no split prime matches
        let e2 = fund_unit(&BigUint::from(2u32)).unwrap();
        let s5 = split_prime(&prime(5)).unwrap();
        assert!(pell_gauss_decompose(&e2, &s5).is_err());
    }

    #[test]
    fn pell_decompose_sweep() {
        for p in [5u64, 13, 17, 29, 37, 41, 53, 61, 73, 89, 97, 101, 109, 113] {
            let eps = fund_unit(&BigUint::from(p)).unwrap();
            assert_eq!(eps.norm, -1, "norm of eps_{p}");
            let pi = split_prime(&prime(p)).unwrap();
            let dec = pell_gauss_decompose(&eps, &pi).unwrap();
            // identity: x + i*denom = u * y1^2 * (selected prime)
            let alpha = GaussInt::new(BigInt::from(eps.x.clone()), BigInt::from(eps.denom));
            let rhs = dec
                .twist
                .unit()
                .mul(&dec.y1.square())
                .mul(&dec.selected(std::slice::from_ref(&pi), 0));
            assert_eq!(alpha, rhs, "reconstruction for p = {p}");
            assert_eq!(dec.y1.norm(), eps.y);
        }
    }

    #[test]
    fn gcd_of_pell_plus_minus_divides_two() {
        // gcd(x+i, x-i) divides 2 whenever x^2 + 1 = p*y^2
        for p in [5u64, 13, 17, 29, 37] {
            let eps = fund_unit(&BigUint::from(p)).unwrap();
            if eps.denom != 1 {
                continue;
            }
            let a = GaussInt::new(BigInt::from(eps.x.clone()), BigInt::from(1));
            let gcd = a.gcd(&a.conj());
            assert!(
                gcd.divides(&g(2, 0)),
                "gcd {} does not divide 2 for p = {p}",
                gcd
            );
        }
    }

    proptest! {
        #[test]
        fn div_rem_is_euclidean(ar in -500i64..500, ai in -500i64..500,
                                br in -500i64..500, bi in -500i64..500) {
            prop_assume!(br != 0 || bi != 0);
            let a = g(ar, ai);
            let b = g(br, bi);
            let (q, r) = a.div_rem_rounded(&b);
            prop_assert_eq!(q.mul(&b).add(&r), a);
            // rounding to nearest keeps N(r) <= N(b)/2
            prop_assert!(r.norm() * 2u32 <= b.norm());
        }

        #[test]
        fn sqrt_roundtrip(re in -1000i64..1000, im in -1000i64..1000) {
            let z = g(re, im);
            let sq = z.square();
            let root = sq.sqrt().expect("square of an element must have a root");
            prop_assert_eq!(root.square(), sq);
        }

        #[test]
        fn gcd_divides_both(ar in -200i64..200, ai in -200i64..200,
                            br in -200i64..200, bi in -200i64..200) {
            prop_assume!((ar, ai) != (0, 0) || (br, bi) != (0, 0));
            let a = g(ar, ai);
            let b = g(br, bi);
            let d = a.gcd(&b);
            prop_assert!(d.divides(&a));
            prop_assert!(d.divides(&b));
        }
    }
}
