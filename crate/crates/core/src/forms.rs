//! Independent class-group oracle via binary quadratic forms: class numbers
//! h(D) for fundamental discriminants (counting reduced positive definite
//! forms for D < 0, cycles of reduced indefinite forms for D > 0), Gauss
//! composition on the imaginary side, and the Kuroda 2-adic cross-check
//! v₂(h(8p₁p₂)) + v₂(h(−8p₁p₂)) = 4 certifying |C_{k,2}| = 8.

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;

use crate::arith::{is_squarefree, jacobi, Prime1Mod4};
use crate::error::{Error, Result};
use crate::pell::fund_unit;

/// A binary quadratic form a·x² + b·xy + c·y² of discriminant b² − 4ac.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        Self { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// The principal form of discriminant d.
    pub fn principal(d: i64) -> Self {
        let b = d.rem_euclid(2);
        Self::new(1, b, (b * b - d) / 4)
    }

    /// Proper inverse class representative.
    pub fn inverse(&self) -> Self {
        Self::new(self.a, -self.b, self.c)
    }

    /// Reduced positive definite form: |b| <= a <= c, with b >= 0 when
    /// |b| = a or a = c.
    pub fn is_reduced_imag(&self) -> bool {
        debug_assert!(self.disc() < 0 && self.a > 0);
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() < a && a < c))
    }

    /// Standard reduction for positive definite forms.
    pub fn reduce_imag(mut self) -> Self {
        debug_assert!(self.disc() < 0 && self.a > 0);
        loop {
            // normalize b into (-a, a]
            let two_a = 2 * self.a;
            let mut b = self.b.rem_euclid(two_a);
            if b > self.a {
                b -= two_a;
            }
            let c = (b * b - self.disc()) / (4 * self.a);
            self = Self::new(self.a, b, c);
            if self.a > self.c {
                self = Self::new(self.c, -self.b, self.a);
                continue;
            }
            if self.a == self.c && self.b < 0 {
                self.b = -self.b;
            }
            debug_assert!(self.is_reduced_imag());
            return self;
        }
    }
}

/// Fundamental discriminant: d ≡ 1 (mod 4) squarefree, or d = 4m with
/// m ≡ 2, 3 (mod 4) squarefree.
pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let sf = |n: i64| is_squarefree(&BigUint::from(n.unsigned_abs()));
    if d.rem_euclid(4) == 1 {
        return sf(d);
    }
    if d % 4 != 0 {
        return false;
    }
    let m = d / 4;
    matches!(m.rem_euclid(4), 2 | 3) && sf(m)
}

/// All reduced positive definite forms of fundamental discriminant d < 0,
/// found by direct enumeration of the reduction inequalities (no reduction
/// walk involved).
pub fn reduced_forms_imag(d: i64) -> Result<Vec<QuadForm>> {
    if d >= 0 || !is_fundamental(d) {
        return Err(Error::NotFundamentalDiscriminant(d));
    }
    let mut out = Vec::new();
    let abs_d = -d;
    let mut a = 1i64;
    while 3 * a * a <= abs_d {
        for b in -a + 1..=a {
            if (b * b - d) % (4 * a) != 0 {
                continue;
            }
            let c = (b * b - d) / (4 * a);
            if c < a {
                continue;
            }
            let f = QuadForm::new(a, b, c);
            if f.is_reduced_imag() {
                out.push(f);
            }
        }
        a += 1;
    }
    out.sort();
    Ok(out)
}

/// h(D) for a fundamental D < 0: the number of reduced forms.
pub fn class_number_imag(d: i64) -> Result<u64> {
    Ok(reduced_forms_imag(d)?.len() as u64)
}

fn extgcd(a: i64, b: i64) -> (i64, i64, i64) {
    // returns (g, u, v) with u*a + v*b = g
    if b == 0 {
        return (a.abs(), a.signum(), 0);
    }
    let (g, u, v) = extgcd(b, a.rem_euclid(b));
    (g, v, u - v * (a.div_euclid(b)))
}

/// Gauss/Dirichlet composition of primitive forms of a common negative
/// discriminant; the result is reduced.
pub fn compose(f1: &QuadForm, f2: &QuadForm) -> Result<QuadForm> {
    if f1.disc() != f2.disc() {
        return Err(Error::Internal(
            "composition needs equal discriminants".into(),
        ));
    }
    let (mut f1, mut f2) = (*f1, *f2);
    if f1.a > f2.a {
        std::mem::swap(&mut f1, &mut f2);
    }
    let s = (f1.b + f2.b) / 2;
    let n = f2.b - s;
    // d = gcd(a1, a2), with Bezout y1 for a2 when a1 does not divide a2
    let (y1, d) = if f2.a % f1.a == 0 {
        (0i64, f1.a)
    } else {
        let (g, u, _) = extgcd(f2.a, f1.a);
        (u, g)
    };
    let (x2, y2, d1) = if s % d == 0 {
        (0i64, -1i64, d)
    } else {
        let (g, u, v) = extgcd(s, d);
        (u, -v, g)
    };
    let v1 = f1.a / d1;
    let v2 = f2.a / d1;
    let r = (y1 * y2 * n - x2 * f2.c).rem_euclid(v1);
    let a3 = v1 * v2;
    let b3 = f2.b + 2 * v2 * r;
    let c3 = (f2.c * d1 + r * (f2.b + v2 * r)) / v1;
    let composed = QuadForm::new(a3, b3, c3);
    debug_assert_eq!(composed.disc(), f1.disc());
    Ok(composed.reduce_imag())
}

/// 2-rank of the imaginary form class group: log₂ of the number of
/// ambiguous classes (squares equal to the principal form).
pub fn two_rank_imag(d: i64) -> Result<u32> {
    let forms = reduced_forms_imag(d)?;
    let principal = QuadForm::principal(d).reduce_imag();
    let mut ambiguous = 0u64;
    for f in &forms {
        if compose(f, f)? == principal {
            ambiguous += 1;
        }
    }
    debug_assert!(ambiguous.is_power_of_two());
    Ok(ambiguous.trailing_zeros())
}

fn isqrt(n: i64) -> i64 {
    BigUint::from(n.unsigned_abs()).sqrt().to_i64().unwrap()
}

/// Reduced indefinite form: |√D − 2|a|| < b < √D, all comparisons exact.
pub fn is_reduced_real(f: &QuadForm, d: i64) -> bool {
    if f.b <= 0 {
        return false;
    }
    if f.b * f.b >= d {
        return false;
    }
    let t = 2 * f.a.abs() - f.b;
    let upper = 2 * f.a.abs() + f.b;
    (t < 0 || t * t < d) && upper * upper > d
}

/// The reduction-operator successor of a reduced indefinite form.
fn rho(f: &QuadForm, d: i64, sqrt_d: i64) -> QuadForm {
    let two_c = 2 * f.c.abs();
    // unique r = -b mod 2|c| in the window (sqrt(d) - 2|c|, sqrt(d))
    let low = sqrt_d - two_c + 1;
    let r = low + (-f.b - low).rem_euclid(two_c);
    let a2 = f.c;
    let c2 = (r * r - d) / (4 * f.c);
    QuadForm::new(a2, r, c2)
}

/// Narrow class number of the real quadratic field of fundamental
/// discriminant d > 0: the number of cycles of reduced indefinite forms.
pub fn class_number_real_narrow(d: i64) -> Result<u64> {
    if d <= 0 || !is_fundamental(d) {
        return Err(Error::NotFundamentalDiscriminant(d));
    }
    let sqrt_d = isqrt(d);
    let mut forms = Vec::new();
    for b in 1..=sqrt_d {
        if (d - b * b) % 4 != 0 {
            continue;
        }
        let n = (d - b * b) / 4; // = -a*c > 0
        let mut a_abs = 1i64;
        while a_abs * a_abs <= n {
            if n % a_abs == 0 {
                for a_val in [a_abs, n / a_abs] {
                    for a in [a_val, -a_val] {
                        let c = -(n / a_val) * a.signum();
                        let f = QuadForm::new(a, b, c);
                        debug_assert_eq!(f.disc(), d);
                        if is_reduced_real(&f, d) {
                            forms.push(f);
                        }
                    }
                    if a_abs * a_abs == n {
                        break;
                    }
                }
            }
            a_abs += 1;
        }
    }
    forms.sort();
    forms.dedup();
    let index: std::collections::HashMap<QuadForm, usize> = forms
        .iter()
        .enumerate()
        .map(|(i, f)| (*f, i))
        .collect();
    let mut seen = vec![false; forms.len()];
    let mut cycles = 0u64;
    for start in 0..forms.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut cur = forms[start];
        loop {
            let i = *index
                .get(&cur)
                .ok_or_else(|| Error::Internal(format!("rho left the reduced set at {cur:?}")))?;
            if seen[i] {
                break;
            }
            seen[i] = true;
            cur = rho(&cur, d, sqrt_d);
        }
    }
    Ok(cycles)
}

/// Wide class number of the real quadratic field of fundamental
/// discriminant d > 0. When the fundamental unit has norm +1 the narrow
/// number is twice the wide one; with norm −1 they agree.
pub fn class_number_real(d: i64) -> Result<u64> {
    let narrow = class_number_real_narrow(d)?;
    let radicand = if d.rem_euclid(4) == 1 { d } else { d / 4 };
    let eps = fund_unit(&BigUint::from(radicand.unsigned_abs()))?;
    if eps.norm == 1 {
        debug_assert_eq!(narrow % 2, 0);
        Ok(narrow / 2)
    } else {
        Ok(narrow)
    }
}

/// Outcome of the Kuroda cross-check for one pair.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct KurodaReport {
    pub h_real: u64,
    pub h_imag: u64,
    pub v2_real: u32,
    pub v2_imag: u32,
    /// v₂(h(d)) + v₂(h(−d)); the check passes at exactly 4, making the
    /// 2-part of h(k) = h(d)h(−d)/2 equal to 8.
    pub v2_sum: u32,
    pub pass: bool,
}

/// Kuroda cross-check for d = 2p₁p₂: with unit index q = 1 the class number
/// of k = Q(√d, i) is h(d)·h(−d)/2, so v₂(h(d)) + v₂(h(−d)) = 4 certifies
/// |C_{k,2}| = 8. Refuses to run when the q = 1 hypothesis fails.
pub fn kuroda_check(p1: &Prime1Mod4, p2: &Prime1Mod4) -> Result<KurodaReport> {
    let (s1, s2, s3) = pair_symbols(p1, p2)?;
    if [s1, s2, s3].iter().filter(|&&s| s == -1).count() < 2 {
        return Err(Error::KurodaNotApplicable(format!(
            "pair ({p1}, {p2}) is outside the eligible family"
        )));
    }
    let d = BigInt::from(p1.value() * p2.value() * 2u32);
    // range gate first: form enumeration past d = 10^7 is unsupported
    let disc = d
        .to_i64()
        .filter(|&d| d < 10_000_000)
        .map(|d| 4 * d)
        .ok_or_else(|| Error::DiscriminantTooLarge(d.to_string()))?;
    let eps = fund_unit(&d.to_biguint().unwrap())?;
    if eps.norm != -1 {
        return Err(Error::KurodaNotApplicable(format!(
            "fundamental unit of Q(sqrt({d})) has norm +1, so q = 1 is not certified"
        )));
    }
    let h_real = class_number_real(disc)?;
    let h_imag = class_number_imag(-disc)?;
    let v2_real = h_real.trailing_zeros();
    let v2_imag = h_imag.trailing_zeros();
    let v2_sum = v2_real + v2_imag;
    Ok(KurodaReport {
        h_real,
        h_imag,
        v2_real,
        v2_imag,
        v2_sum,
        pass: v2_sum == 4,
    })
}

/// At least two of (p₁/p₂), (2/p₁), (2/p₂) equal −1; the family's defining
/// condition.
pub fn pair_symbols(p1: &Prime1Mod4, p2: &Prime1Mod4) -> Result<(i8, i8, i8)> {
    let two = BigInt::from(2);
    let b1 = BigInt::from(p1.value().clone());
    let b2 = BigInt::from(p2.value().clone());
    Ok((jacobi(&b1, &b2)?, jacobi(&two, &b1)?, jacobi(&two, &b2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use std::collections::BTreeSet;

    #[test]
    fn imag_class_numbers_small() {
        for (d, h) in [
            (-3i64, 1u64),
            (-4, 1),
            (-7, 1),
            (-8, 1),
            (-11, 1),
            (-15, 2),
            (-20, 2),
            (-23, 3),
            (-24, 2),
            (-35, 2),
            (-40, 2),
            (-47, 5),
            (-71, 7),
        ] {
            assert_eq!(class_number_imag(d).unwrap(), h, "h({d})");
        }
        assert!(class_number_imag(-12).is_err());
        assert!(class_number_imag(8).is_err());
    }

    #[test]
    fn real_class_numbers_small() {
        // wide class numbers of real quadratic fields
        for (d, h) in [
            (8i64, 1u64),   // Q(sqrt2)
            (5, 1),
            (40, 2),        // Q(sqrt10)
            (60, 2),        // Q(sqrt15)
            (65, 2),
            (520, 4),       // Q(sqrt130)
            (12, 1),
            (13, 1),
        ] {
            assert_eq!(class_number_real(d).unwrap(), h, "h({d})");
        }
    }

    /// Ideal-class oracle: enumerate the ideals of norm up to the Minkowski
    /// bound as (a, b) pairs with b² ≡ D (mod 4a), walk each to its reduced
    /// representative, and count distinct representatives.
    fn ideal_class_count(d: i64) -> u64 {
        assert!(d < 0);
        let bound = (2.0 * ((-d) as f64).sqrt() / std::f64::consts::PI).floor() as i64;
        let mut reduced = BTreeSet::new();
        for a in 1..=bound.max(1) {
            for b in (-a + 1)..=a {
                if (b * b - d) % (4 * a) != 0 {
                    continue;
                }
                let c = (b * b - d) / (4 * a);
                reduced.insert(QuadForm::new(a, b, c).reduce_imag());
            }
        }
        reduced.len() as u64
    }

    #[test]
    fn imag_matches_ideal_enumeration_below_500() {
        for d in (-500i64..0).filter(|&d| is_fundamental(d)) {
            assert_eq!(
                class_number_imag(d).unwrap(),
                ideal_class_count(d),
                "h({d})"
            );
        }
    }

    #[test]
    fn composition_group_laws() {
        for d in (-500i64..0).filter(|&d| is_fundamental(d)) {
            let forms = reduced_forms_imag(d).unwrap();
            let principal = QuadForm::principal(d).reduce_imag();
            for f in &forms {
                // identity
                assert_eq!(compose(f, &principal).unwrap(), *f, "identity at {d}");
                // inverse
                assert_eq!(
                    compose(f, &f.inverse().reduce_imag()).unwrap(),
                    principal,
                    "inverse at {d}"
                );
            }
            // associativity on a few triples
            for (i, f) in forms.iter().enumerate().take(4) {
                for g in forms.iter().skip(i).take(4) {
                    for h in forms.iter().take(4) {
                        let lhs = compose(&compose(f, g).unwrap(), h).unwrap();
                        let rhs = compose(f, &compose(g, h).unwrap()).unwrap();
                        assert_eq!(lhs, rhs, "associativity at {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn squares_form_subgroup_of_expected_index() {
        // Gauss: the subgroup of squares has index 2^(number of prime
        // discriminant factors - 1)
        for d in (-500i64..0).filter(|&d| is_fundamental(d)) {
            let forms = reduced_forms_imag(d).unwrap();
            let squares: BTreeSet<QuadForm> =
                forms.iter().map(|f| compose(f, f).unwrap()).collect();
            let omega = crate::arith::factorize(&BigUint::from(d.unsigned_abs())).len() as u32;
            assert_eq!(
                squares.len() as u64 * 2u64.pow(omega - 1),
                forms.len() as u64,
                "square subgroup index at {d}"
            );
            assert_eq!(two_rank_imag(d).unwrap(), omega - 1, "2-rank at {d}");
        }
    }

    #[test]
    fn genus_bound_for_family_discriminants() {
        // D = -8 p1 p2 has three prime discriminant factors, so 2-rank 2
        for (p1, p2) in [(5i64, 13i64), (5, 17), (13, 17), (5, 29), (13, 29)] {
            let d = -8 * p1 * p2;
            assert_eq!(two_rank_imag(d).unwrap(), 2, "2-rank of {d}");
        }
    }

    #[test]
    fn kuroda_known_pairs() {
        let p = |n: u64| Prime1Mod4::new(BigUint::from(n)).unwrap();
        let r = kuroda_check(&p(5), &p(13)).unwrap();
        assert!(r.pass, "expected v2 sum 4 for (5,13), got {r:?}");
        let r = kuroda_check(&p(5), &p(17)).unwrap();
        assert!(r.pass, "expected v2 sum 4 for (5,17), got {r:?}");
        // ineligible pairs are refused as not applicable
        assert!(matches!(
            kuroda_check(&p(13), &p(17)),
            Err(crate::error::Error::KurodaNotApplicable(_))
        ));
        // pairs beyond the enumeration range are refused before any heavy
        // computation starts
        let huge = (1_000_000u64..)
            .find(|&n| n % 8 == 5 && crate::arith::is_prime(&BigUint::from(n)))
            .unwrap();
        assert!(matches!(
            kuroda_check(&p(5), &p(huge)),
            Err(crate::error::Error::DiscriminantTooLarge(_))
        ));
    }

    #[test]
    fn symbols_match_eligibility_examples() {
        let p = |n: u64| Prime1Mod4::new(BigUint::from(n)).unwrap();
        assert_eq!(pair_symbols(&p(5), &p(13)).unwrap(), (-1, -1, -1));
        assert_eq!(pair_symbols(&p(13), &p(17)).unwrap(), (1, -1, 1));
        assert_eq!(pair_symbols(&p(5), &p(17)).unwrap(), (-1, -1, 1));
    }
}
