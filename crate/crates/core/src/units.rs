//! Systems of fundamental units (SFU) of the unramified extensions
//! K₁ = k(√p₁), K₂ = k(√p₂), K₃ = k(√2) of k = Q(√(2p₁p₂), i), unit
//! indices, and the norm index [E_k : N_{K/k}(E_K)] that counts capitulating
//! classes.
//!
//! Each tower K_j sits over a real biquadratic field with three quadratic
//! subfields; writing ε₁, ε₂, ε₃ for their fundamental units, the SFU of K_j
//! is one of four shapes, decided by unit norms and exact square tests:
//! {ε₁, ε₂, ε₃}, {ε₁, ε₂, √(ε₁ε₂ε₃)}, {ε₁, ε₂, √(iε₁ε₂ε₃)}, or
//! {ε₁, √(iε₂), ε₃}. Every square-root generator is representable inside
//! L = Q(i, √2, √p₁, √p₂): √(iu) = √(2u)·(1+i)/2 whenever √(2u) lives in a
//! real subfield.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;

use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::multiquad::{
    norm_to_q, relative_norm, sqrt_in, Context, FieldElem, Subfield, BIT_I, BIT_SQRT2,
};
use crate::pell::{fund_unit, sqrt_in_quad, FundUnit};

/// The three quadratic unramified extensions of k inside the genus field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tower {
    K1,
    K2,
    K3,
}

impl Tower {
    pub const ALL: [Tower; 3] = [Tower::K1, Tower::K2, Tower::K3];

    pub fn subfield(&self) -> Subfield {
        match self {
            Tower::K1 => Subfield::k1(),
            Tower::K2 => Subfield::k2(),
            Tower::K3 => Subfield::k3(),
        }
    }

    /// The maximal real subfield (K₀ for K₁/K₂, K₃⁺ for K₃).
    pub fn real_subfield(&self) -> Subfield {
        match self {
            Tower::K1 => Subfield::kj_real(1),
            Tower::K2 => Subfield::kj_real(2),
            Tower::K3 => Subfield::k3_plus(),
        }
    }

    /// Radicands (d₁, d₂, d₃) of the three real quadratic subfields; ε₃
    /// always belongs to Q(√(2p₁p₂)) ⊂ k.
    pub fn radicands(&self, ctx: &Context) -> (BigUint, BigUint, BigUint) {
        let p1 = ctx.p1().value().clone();
        let p2 = ctx.p2().value().clone();
        let d = &p1 * &p2 * 2u32;
        match self {
            Tower::K1 => (p1, p2 * 2u32, d),
            Tower::K2 => (p2, p1 * 2u32, d),
            Tower::K3 => (BigUint::from(2u32), p1 * p2, d),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Tower::K1 => "K1",
            Tower::K2 => "K2",
            Tower::K3 => "K3",
        }
    }
}

/// Shape of a fundamental system of units, one of the four cases the
/// norm/square dichotomies produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SfuShape {
    /// {ε₁, ε₂, ε₃}
    Plain,
    /// {ε₁, ε₂, √(ε₁ε₂ε₃)}
    Sqrt123,
    /// {ε₁, ε₂, √(iε₁ε₂ε₃)}
    SqrtI123,
    /// {ε₁, √(iε₂), ε₃} (middle unit has norm +1)
    SqrtI2,
}

impl SfuShape {
    pub fn as_str(&self) -> &'static str {
        match self {
            SfuShape::Plain => "plain",
            SfuShape::Sqrt123 => "sqrt(e1*e2*e3)",
            SfuShape::SqrtI123 => "sqrt(i*e1*e2*e3)",
            SfuShape::SqrtI2 => "sqrt(i*e2)",
        }
    }
}

/// A verified system of fundamental units for one tower.
#[derive(Debug, Clone)]
pub struct SfuClass {
    pub tower: Tower,
    pub shape: SfuShape,
    /// Three multiplicatively independent units generating E_K modulo
    /// torsion, as exact elements of L.
    pub gens: Vec<FieldElem>,
    /// Generator of the torsion: i for K₁/K₂, ζ₈ for K₃.
    pub torsion: FieldElem,
    /// The quadratic fundamental units (ε₁, ε₂, ε₃) underlying the system.
    pub eps: [FundUnit; 3],
}

/// ζ₈ = (√2 + i√2)/2, the eighth root of unity in K₃ and L.
pub fn zeta8(ctx: &Arc<Context>) -> FieldElem {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    FieldElem::monomial(ctx, BIT_SQRT2, half.clone())
        .add(&FieldElem::monomial(ctx, BIT_I | BIT_SQRT2, half))
}

/// (1+i)/2 · x, the exact form of √(i·x²)·sign when x² is twice a real
/// square: ((1+i)/2 · t)² = i·t²/2.
fn half_one_plus_i_times(ctx: &Arc<Context>, t: &FieldElem) -> FieldElem {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let one_plus_i = FieldElem::one(ctx).add(&FieldElem::i(ctx));
    one_plus_i.mul(t).scale(&half)
}

/// Classifies the SFU of a tower by unit norms and exact square tests, and
/// returns explicit generators with their defining identities re-verified.
pub fn sfu_classify(ctx: &Arc<Context>, tower: Tower) -> Result<SfuClass> {
    let (d1, d2, d3) = tower.radicands(ctx);
    let e1 = fund_unit(&d1)?;
    let e2 = fund_unit(&d2)?;
    let e3 = fund_unit(&d3)?;
    if e1.norm != -1 {
        return Err(Error::InconsistentSfuCase(format!(
            "norm of the unit of Q(sqrt({d1})) should be -1"
        )));
    }
    if e3.norm != -1 {
        return Err(Error::InconsistentSfuCase(format!(
            "norm of the unit of Q(sqrt({d3})) should be -1 for an eligible pair"
        )));
    }
    let u1 = FieldElem::from_fund_unit(ctx, &e1)?;
    let u2 = FieldElem::from_fund_unit(ctx, &e2)?;
    let u3 = FieldElem::from_fund_unit(ctx, &e3)?;
    let real = tower.real_subfield();
    let torsion = match tower {
        Tower::K1 | Tower::K2 => FieldElem::i(ctx),
        Tower::K3 => zeta8(ctx),
    };

    let (shape, gens) = if e2.norm == 1 {
        match tower {
            Tower::K1 | Tower::K2 => {
                // norm-(+1) middle unit over Q(sqrt(2q)): 2ε₂ is a square
                // there, and √(iε₂) = √(2ε₂)·(1+i)/2 lands in K_j
                let q_d2 = Subfield::real_quad(ctx, &d2)?;
                let two_u2 = u2.scale(&BigRational::from(BigInt::from(2)));
                let t = sqrt_in(&two_u2, &q_d2)?.ok_or_else(|| {
                    Error::InconsistentSfuCase(format!(
                        "2*eps is not a square in Q(sqrt({d2})) despite norm +1"
                    ))
                })?;
                let g2 = half_one_plus_i_times(ctx, &t);
                let target = FieldElem::i(ctx).mul(&u2);
                if g2.square() != target {
                    return Err(Error::Internal("sqrt(i*eps2) failed to square back".into()));
                }
                (SfuShape::SqrtI2, vec![u1.clone(), g2, u3.clone()])
            }
            Tower::K3 => (SfuShape::Plain, vec![u1.clone(), u2.clone(), u3.clone()]),
        }
    } else {
        let product = u1.mul(&u2).mul(&u3);
        if let Some(r) = sqrt_in(&product, &real)? {
            (SfuShape::Sqrt123, vec![u1.clone(), u2.clone(), r])
        } else {
            match tower {
                Tower::K1 | Tower::K2 => {
                    let two_product = product.scale(&BigRational::from(BigInt::from(2)));
                    if let Some(t) = sqrt_in(&two_product, &real)? {
                        let g3 = half_one_plus_i_times(ctx, &t);
                        let target = FieldElem::i(ctx).mul(&product);
                        if g3.square() != target {
                            return Err(Error::Internal(
                                "sqrt(i*e1*e2*e3) failed to square back".into(),
                            ));
                        }
                        (SfuShape::SqrtI123, vec![u1.clone(), u2.clone(), g3])
                    } else {
                        (SfuShape::Plain, vec![u1.clone(), u2.clone(), u3.clone()])
                    }
                }
                // in K₃⁺ the 2-twisted test collapses into the plain one
                // because √2 is already there
                Tower::K3 => (SfuShape::Plain, vec![u1.clone(), u2.clone(), u3.clone()]),
            }
        }
    };

    let sfu = SfuClass {
        tower,
        shape,
        gens,
        torsion,
        eps: [e1, e2, e3],
    };
    verify_units(&sfu)?;
    Ok(sfu)
}

/// Every generator must be a unit: rational norm ±1. Integrality holds by
/// construction (embedded fundamental units and exact square roots of units).
fn verify_units(sfu: &SfuClass) -> Result<()> {
    let sub = sfu.tower.subfield();
    for g in sfu.gens.iter().chain(std::iter::once(&sfu.torsion)) {
        if !sub.contains_elem(g) {
            return Err(Error::Internal(format!(
                "generator {g} escapes {}",
                sub.label()
            )));
        }
        let n = norm_to_q(g);
        if !n.is_integer() || !n.numer().magnitude().is_one() {
            return Err(Error::Internal(format!("generator {g} has norm {n}")));
        }
    }
    Ok(())
}

/// Checks multiplicative independence modulo squares: no nontrivial product
/// torsion^a · Π gensᵉ is a square in the tower. This is what the kernel
/// search consumes; full rank independence follows.
pub fn verify_sfu_independence(sfu: &SfuClass) -> Result<()> {
    match find_dependent_class(sfu)? {
        None => Ok(()),
        Some((code, _)) => Err(Error::Internal(format!(
            "unit square class {code:04b} of {} degenerates to a square",
            sfu.tower.label()
        ))),
    }
}

/// First unit square class (torsion bit high, generator bits in dictionary
/// order) that degenerates to a square, with its root.
fn find_dependent_class(sfu: &SfuClass) -> Result<Option<(u8, FieldElem)>> {
    let sub = sfu.tower.subfield();
    for code in 1u8..16 {
        let mut u = FieldElem::one(sfu.gens[0].context());
        if code & 8 != 0 {
            u = u.mul(&sfu.torsion);
        }
        for (j, g) in sfu.gens.iter().enumerate() {
            if code & (1 << (2 - j)) != 0 {
                u = u.mul(g);
            }
        }
        if let Some(root) = sqrt_in(&u, &sub)? {
            return Ok(Some((code, root)));
        }
    }
    Ok(None)
}

/// Re-verifies the classified system and, should a product of generators
/// ever degenerate to a square, swaps its root in as a replacement
/// generator and retries — the unit group was larger than classified, and
/// downstream only needs a genuine set of square-class representatives.
/// Returns the corrections made (expected empty: the case analysis proves
/// there are none, and this confirms it by computation).
pub fn verify_or_correct_sfu(sfu: &mut SfuClass) -> Result<Vec<String>> {
    let mut corrections = Vec::new();
    for _ in 0..4 {
        match find_dependent_class(sfu)? {
            None => return Ok(corrections),
            Some((code, root)) => {
                corrections.push(format!(
                    "{}: class {code:04b} was a square; replaced a generator with its root",
                    sfu.tower.label()
                ));
                // the relation makes one participating generator redundant
                // modulo squares; the root takes its place and restores full
                // rank in E/E²
                if let Some(j) = (0..3).find(|j| code & (1 << (2 - j)) != 0) {
                    sfu.gens[j] = root;
                } else {
                    // pure torsion degenerated: the root is a deeper root of
                    // unity; adopt it as the torsion generator
                    sfu.torsion = root;
                }
            }
        }
    }
    Err(Error::Internal(format!(
        "unit system of {} kept collapsing after corrections: {corrections:?}",
        sfu.tower.label()
    )))
}

/// The 16 unit square classes torsion^a · Π gᵉ of E_K/E_K², torsion exponent
/// first, then generators in dictionary order. Witness search order is fixed
/// by this enumeration.
pub fn unit_square_classes(sfu: &SfuClass) -> Vec<FieldElem> {
    let ctx = sfu.gens[0].context();
    let mut out = Vec::with_capacity(16);
    for t_exp in 0..=1u8 {
        for e in 0..8u8 {
            let mut u = FieldElem::one(ctx);
            if t_exp == 1 {
                u = u.mul(&sfu.torsion);
            }
            for (j, g) in sfu.gens.iter().enumerate() {
                if e & (1 << (2 - j)) != 0 {
                    u = u.mul(g);
                }
            }
            out.push(u);
        }
    }
    out
}

/// Unit square classes {1, i, ε_d, iε_d} of k = Q(√(2p₁p₂), i); complete
/// because the eligible family has Q(k) = 1.
pub fn base_field_unit_classes(ctx: &Arc<Context>) -> Result<Vec<FieldElem>> {
    let d = ctx.p1().value() * ctx.p2().value() * 2u32;
    let eps = fund_unit(&d)?;
    if eps.norm != -1 {
        return Err(Error::InconsistentSfuCase(
            "unit classes of k assume norm(eps_d) = -1".into(),
        ));
    }
    let e = FieldElem::from_fund_unit(ctx, &eps)?;
    let i = FieldElem::i(ctx);
    Ok(vec![
        FieldElem::one(ctx),
        i.clone(),
        e.clone(),
        i.mul(&e),
    ])
}

/// Hasse unit index q ∈ {1, 2} of Q(√a, i) over Q(√a).
///
/// q = 1 when a ≡ 1 (mod 4), or when some odd divisor a' ≡ 5 (mod 8)
/// divides a, or when the fundamental unit has norm −1; otherwise q = 2
/// exactly when 2ε_a is a square in Q(√a).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct UnitIndexQ {
    pub field: String,
    pub q: u8,
}

pub fn unit_index_quad_i(a: &BigUint) -> Result<UnitIndexQ> {
    let field = format!("Q(sqrt({a}), i)");
    if a <= &BigUint::one() || !crate::arith::is_squarefree(a) {
        return Err(Error::NotSquarefree(a.to_string()));
    }
    let make = |q: u8| UnitIndexQ {
        field: field.clone(),
        q,
    };
    if (a % 4u32) == BigUint::one() {
        return Ok(make(1));
    }
    let odd_primes: Vec<BigUint> = factorize(a)
        .into_iter()
        .map(|(p, _)| p)
        .filter(|p| p % 2u32 != BigUint::from(0u32))
        .collect();
    let mut divisors = vec![BigUint::one()];
    for p in &odd_primes {
        let mut more: Vec<BigUint> = divisors.iter().map(|d| d * p).collect();
        divisors.append(&mut more);
    }
    if divisors.iter().any(|d| d % 8u32 == BigUint::from(5u32)) {
        return Ok(make(1));
    }
    let eps = fund_unit(a)?;
    if eps.norm == -1 {
        return Ok(make(1));
    }
    let (x, y) = eps.coords();
    let two = BigRational::from(BigInt::from(2));
    let q = if sqrt_in_quad(&(&x * &two), &(&y * &two), a).is_some() {
        2
    } else {
        1
    };
    Ok(make(q))
}

/// Hasse index of K₃ over K₃⁺ for this pair: 2 exactly when ε₂ has norm −1
/// and ε₁ε₂ε₃ is a square in K₃⁺, i.e. when the K₃ system is √(ε₁ε₂ε₃)-shaped.
pub fn k3_unit_index(sfu_k3: &SfuClass) -> UnitIndexQ {
    debug_assert_eq!(sfu_k3.tower, Tower::K3);
    UnitIndexQ {
        field: "Q(sqrt2, sqrt(p1*p2))".into(),
        q: if sfu_k3.shape == SfuShape::Sqrt123 { 2 } else { 1 },
    }
}

/// [E_k : N_{K/k}(E_K)] ∈ {1, 2}: push every SFU generator and the torsion
/// through the relative norm, read each image off in E_k/E_k² =
/// {1, i, ε_d, iε_d}, and measure the span.
pub fn norm_index(ctx: &Arc<Context>, sfu: &SfuClass) -> Result<u8> {
    let k = Subfield::base_field();
    let tower_field = sfu.tower.subfield();
    let classes = base_field_unit_classes(ctx)?;
    let mut span: Vec<(bool, bool)> = vec![(false, false)];
    for g in std::iter::once(&sfu.torsion).chain(sfu.gens.iter()) {
        let n = relative_norm(g, &tower_field, &k)?;
        let mut found = None;
        for (idx, rep) in classes.iter().enumerate() {
            // same class modulo squares: n·rep is a square in k
            if sqrt_in(&n.mul(rep), &k)?.is_some() {
                found = Some(((idx & 1) != 0, (idx & 2) != 0));
                break;
            }
        }
        let class = found.ok_or_else(|| {
            Error::Internal(format!("norm {n} is not a unit class of k"))
        })?;
        if !span.contains(&class) {
            let mut next = span.clone();
            for &(a, b) in &span {
                let sum = (a ^ class.0, b ^ class.1);
                if !next.contains(&sum) {
                    next.push(sum);
                }
            }
            span = next;
        }
    }
    Ok((4 / span.len()) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Prime1Mod4;

    fn ctx(p1: u64, p2: u64) -> Arc<Context> {
        Context::new(
            Prime1Mod4::new(BigUint::from(p1)).unwrap(),
            Prime1Mod4::new(BigUint::from(p2)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zeta8_has_order_eight() {
        let c = ctx(5, 13);
        let z = zeta8(&c);
        let z2 = z.square();
        assert_eq!(z2, FieldElem::i(&c));
        let z8 = z2.square().square();
        assert_eq!(z8, FieldElem::one(&c));
    }

    #[test]
    fn unit_index_rules() {
        // a = 65 = 1 mod 4
        assert_eq!(unit_index_quad_i(&BigUint::from(65u32)).unwrap().q, 1);
        // a = 10: norm(eps) = -1, so q = 1 without any square test
        assert_eq!(unit_index_quad_i(&BigUint::from(10u32)).unwrap().q, 1);
        // a = 2: eps = 1 + sqrt2 has norm -1
        assert_eq!(unit_index_quad_i(&BigUint::from(2u32)).unwrap().q, 1);
        // a = 14: norm +1 and 2*eps = 32 + 8*sqrt(14) = (4 + sqrt(14))^2? 16+14=30 no;
        // decided by the square test either way, assert it runs
        let q14 = unit_index_quad_i(&BigUint::from(14u32)).unwrap().q;
        // 2*eps_14 = 30 + 8 sqrt 14; a square root would need c^2 = (30+s)/2
        // with s^2 = 900 - 64*14 = 4: c^2 = 16 -> c = 4, d = 1: (4+sqrt14)^2
        // = 30 + 8 sqrt 14. So q = 2.
        assert_eq!(q14, 2);
        assert!(unit_index_quad_i(&BigUint::from(12u32)).is_err());
    }

    #[test]
    fn unit_index_of_eligible_d_is_one() {
        for (p1, p2) in [(5u64, 13u64), (5, 17), (13, 5), (5, 29), (13, 37)] {
            let d = BigUint::from(2 * p1 * p2);
            assert_eq!(unit_index_quad_i(&d).unwrap().q, 1, "d = {d}");
        }
    }

    #[test]
    fn sfu_k1_for_5_17_is_sqrt_i2() {
        // eps of Q(sqrt(34)) = 35 + 6 sqrt(34) has norm +1
        let c = ctx(5, 17);
        let sfu = sfu_classify(&c, Tower::K1).unwrap();
        assert_eq!(sfu.shape, SfuShape::SqrtI2);
        assert_eq!(sfu.eps[1].norm, 1);
        // the middle generator is exactly (6 + sqrt 34)(1+i)/2
        let u2 = FieldElem::from_fund_unit(&c, &sfu.eps[1]).unwrap();
        assert_eq!(sfu.gens[1].square(), FieldElem::i(&c).mul(&u2));
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let m34 = c.monomial_for_radicand(&BigUint::from(34u32)).unwrap();
        let expected = FieldElem::from_int(&c, 6)
            .add(&FieldElem::monomial(&c, m34, BigRational::one()))
            .mul(&FieldElem::one(&c).add(&FieldElem::i(&c)))
            .scale(&half);
        assert_eq!(sfu.gens[1], expected);
        verify_sfu_independence(&sfu).unwrap();
    }

    #[test]
    fn sfu_k3_is_plain_when_middle_norm_is_plus_one() {
        // (13, 29): the unit of Q(sqrt(377)) has norm +1, so K3 keeps the
        // plain system, and it really is fundamental (no product of the
        // three units or their torsion twists is a square)
        let c = ctx(13, 29);
        let sfu = sfu_classify(&c, Tower::K3).unwrap();
        assert_eq!(sfu.eps[1].norm, 1);
        assert_eq!(sfu.shape, SfuShape::Plain);
        assert_eq!(k3_unit_index(&sfu).q, 1);
        verify_sfu_independence(&sfu).unwrap();
    }

    #[test]
    fn sfu_k1_for_5_13_is_twisted() {
        // all three norms are -1, and the case analysis forbids Plain
        let c = ctx(5, 13);
        let sfu = sfu_classify(&c, Tower::K1).unwrap();
        assert!(matches!(sfu.shape, SfuShape::Sqrt123 | SfuShape::SqrtI123));
        verify_sfu_independence(&sfu).unwrap();
    }

    #[test]
    fn all_norms_minus_one_square_tests_are_exclusive() {
        // when the three unit norms are all -1 in a K1/K2 tower, exactly one
        // of e1e2e3 and 2·e1e2e3 is a square in the real biquadratic field
        // (both at once would put sqrt2 there)
        let mut exercised = 0;
        for (p1, p2) in [(5u64, 13u64), (13, 5), (5, 53), (13, 37), (37, 13), (5, 113)] {
            let c = ctx(p1, p2);
            for tower in [Tower::K1, Tower::K2] {
                let sfu = sfu_classify(&c, tower).unwrap();
                if sfu.eps[1].norm != -1 {
                    continue;
                }
                let u: FieldElem = sfu
                    .eps
                    .iter()
                    .map(|e| FieldElem::from_fund_unit(&c, e).unwrap())
                    .fold(FieldElem::one(&c), |acc, x| acc.mul(&x));
                let real = tower.real_subfield();
                let plain = sqrt_in(&u, &real).unwrap().is_some();
                let twisted = sqrt_in(&u.scale(&BigRational::from(BigInt::from(2))), &real)
                    .unwrap()
                    .is_some();
                assert!(
                    plain ^ twisted,
                    "({p1},{p2}) {}: plain = {plain}, twisted = {twisted}",
                    tower.label()
                );
                exercised += 1;
            }
        }
        assert!(exercised >= 6);
    }

    #[test]
    fn verify_or_correct_passes_untouched_systems() {
        let c = ctx(5, 13);
        for tower in Tower::ALL {
            let mut sfu = sfu_classify(&c, tower).unwrap();
            let corrections = verify_or_correct_sfu(&mut sfu).unwrap();
            assert!(corrections.is_empty(), "{corrections:?}");
        }
        // a deliberately degenerate "system" gets corrected: swap a
        // generator for its own square
        let mut sfu = sfu_classify(&c, Tower::K1).unwrap();
        sfu.gens[2] = sfu.gens[2].square();
        let corrections = verify_or_correct_sfu(&mut sfu).unwrap();
        assert!(!corrections.is_empty());
        assert!(verify_sfu_independence(&sfu).is_ok());
    }

    #[test]
    fn sfu_generators_square_to_claims() {
        for (p1, p2) in [(5u64, 13u64), (5, 17), (13, 17)] {
            let c = ctx(p1, p2);
            for tower in Tower::ALL {
                let sfu = sfu_classify(&c, tower).unwrap();
                let u: Vec<FieldElem> = sfu
                    .eps
                    .iter()
                    .map(|e| FieldElem::from_fund_unit(&c, e).unwrap())
                    .collect();
                match sfu.shape {
                    SfuShape::Plain => {
                        assert_eq!(sfu.gens, u);
                    }
                    SfuShape::Sqrt123 => {
                        let prod = u[0].mul(&u[1]).mul(&u[2]);
                        assert_eq!(sfu.gens[2].square(), prod);
                    }
                    SfuShape::SqrtI123 => {
                        let prod = u[0].mul(&u[1]).mul(&u[2]);
                        assert_eq!(sfu.gens[2].square(), FieldElem::i(&c).mul(&prod));
                    }
                    SfuShape::SqrtI2 => {
                        assert_eq!(sfu.gens[1].square(), FieldElem::i(&c).mul(&u[1]));
                    }
                }
            }
        }
    }

    #[test]
    fn norm_index_is_two_for_k1_k2() {
        for (p1, p2) in [(5u64, 13u64), (5, 17), (13, 5)] {
            let c = ctx(p1, p2);
            for tower in [Tower::K1, Tower::K2] {
                let sfu = sfu_classify(&c, tower).unwrap();
                assert_eq!(norm_index(&c, &sfu).unwrap(), 2, "{:?} ({p1},{p2})", tower);
            }
        }
    }

    #[test]
    fn norm_index_k3_tracks_unit_index() {
        for (p1, p2) in [(5u64, 13u64), (5, 17), (13, 17), (5, 29), (13, 37)] {
            let c = ctx(p1, p2);
            let sfu = sfu_classify(&c, Tower::K3).unwrap();
            let q = k3_unit_index(&sfu).q;
            let idx = norm_index(&c, &sfu).unwrap();
            match q {
                1 => assert_eq!(idx, 2, "q=1 must give index 2 ({p1},{p2})"),
                2 => assert_eq!(idx, 1, "q=2 must give index 1 ({p1},{p2})"),
                _ => unreachable!(),
            }
        }
    }
}
