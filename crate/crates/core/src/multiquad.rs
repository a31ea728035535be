//! Exact arithmetic in the degree-16 multiquadratic field
//! L = Q(i, √2, √p₁, √p₂) — the genus field of Q(√(2p₁p₂), i) — together
//! with its subfield lattice, Galois action, relative norms, and an exact
//! square-root decision procedure by tower descent.
//!
//! Elements are vectors of 16 rationals over the monomial basis
//! iᵃ(√2)ᵇ(√p₁)ᶜ(√p₂)ᵈ, indexed by the bit pattern a·8 + b·4 + c·2 + d.
//! Subfields of L are spanned by XOR-closed subsets of the 16 indices, so a
//! u16 bitmask describes each one, and "is x a square in F" descends F's own
//! quadratic tower: x = A + B√θ is a square iff N = A² − θB² is a square s
//! one level down and (A ± s)/2 is a square there too. The decision is exact;
//! a rational-interval sign check merely short-circuits totally real cases.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::Prime1Mod4;
use crate::error::{Error, Result};
use crate::gaussian::GaussInt;
use crate::pell::{sqrt_rational, FundUnit};

const DIM: usize = 16;
/// Monomial index bits.
pub const BIT_I: u8 = 8;
pub const BIT_SQRT2: u8 = 4;
pub const BIT_SQRTP1: u8 = 2;
pub const BIT_SQRTP2: u8 = 1;

/// Ambient data for a pair (p₁, p₂): the squared values of the four radicals
/// and the multiplication table of the 16 basis monomials.
#[derive(Debug)]
pub struct Context {
    p1: Prime1Mod4,
    p2: Prime1Mod4,
    prec_bits: u32,
    /// theta[bit] = square of the radical at that bit: [−1, 2, p₁, p₂]
    /// ordered from BIT_I down to BIT_SQRTP2.
    theta: [BigInt; 4],
    /// mul_factor[i][j] = rational integer with mᵢ·mⱼ = factor · m_{i xor j}
    mul_factor: Vec<BigInt>,
}

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        self.p1 == other.p1 && self.p2 == other.p2
    }
}
impl Eq for Context {}

impl Context {
    pub fn new(p1: Prime1Mod4, p2: Prime1Mod4) -> Result<Arc<Self>> {
        Self::with_precision(p1, p2, 256)
    }

    /// prec_bits seeds the interval ladder used by the real-sign fast path
    /// of the square test; exactness never depends on it.
    pub fn with_precision(p1: Prime1Mod4, p2: Prime1Mod4, prec_bits: u32) -> Result<Arc<Self>> {
        if p1 == p2 {
            return Err(Error::EqualPrimes);
        }
        let theta = [
            BigInt::from(-1),
            BigInt::from(2),
            BigInt::from(p1.value().clone()),
            BigInt::from(p2.value().clone()),
        ];
        let mut mul_factor = vec![BigInt::one(); DIM * DIM];
        for i in 0..DIM {
            for j in 0..DIM {
                let overlap = i & j;
                let mut f = BigInt::one();
                for (bit, th) in [(BIT_I, 0usize), (BIT_SQRT2, 1), (BIT_SQRTP1, 2), (BIT_SQRTP2, 3)]
                {
                    if overlap & bit as usize != 0 {
                        f *= &theta[th];
                    }
                }
                mul_factor[i * DIM + j] = f;
            }
        }
        Ok(Arc::new(Self {
            p1,
            p2,
            prec_bits: prec_bits.clamp(32, 4096),
            theta,
            mul_factor,
        }))
    }

    pub fn p1(&self) -> &Prime1Mod4 {
        &self.p1
    }

    pub fn p2(&self) -> &Prime1Mod4 {
        &self.p2
    }

    pub fn prec_bits(&self) -> u32 {
        self.prec_bits
    }

    /// Square of the basis monomial m, a rational integer.
    pub fn monomial_squared(&self, m: u8) -> BigInt {
        let mut f = BigInt::one();
        for (bit, th) in [(BIT_I, 0usize), (BIT_SQRT2, 1), (BIT_SQRTP1, 2), (BIT_SQRTP2, 3)] {
            if m & bit != 0 {
                f *= &self.theta[th];
            }
        }
        f
    }

    /// Value d with √d = monomial m, for totally real m (no i bit).
    pub fn real_radicand(&self, m: u8) -> BigUint {
        debug_assert_eq!(m & BIT_I, 0);
        self.monomial_squared(m).to_biguint().unwrap()
    }

    /// Monomial index whose square is d, if d is a product of a subset of
    /// {2, p₁, p₂}.
    pub fn monomial_for_radicand(&self, d: &BigUint) -> Option<u8> {
        (1u8..8).find(|&m| &self.real_radicand(m) == d)
    }

    fn name_of(&self, m: u8) -> String {
        if m == 0 {
            return "1".into();
        }
        let mut parts = Vec::new();
        if m & BIT_I != 0 {
            parts.push("i".to_string());
        }
        if m & BIT_SQRT2 != 0 {
            parts.push("sqrt(2)".to_string());
        }
        if m & BIT_SQRTP1 != 0 {
            parts.push(format!("sqrt({})", self.p1));
        }
        if m & BIT_SQRTP2 != 0 {
            parts.push(format!("sqrt({})", self.p2));
        }
        parts.join("*")
    }
}

/// An exact element of L as 16 rational coordinates over a shared context.
#[derive(Debug, Clone)]
pub struct FieldElem {
    ctx: Arc<Context>,
    c: Vec<BigRational>,
}

impl PartialEq for FieldElem {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.c == other.c
    }
}
impl Eq for FieldElem {}

fn rat(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

impl FieldElem {
    pub fn zero(ctx: &Arc<Context>) -> Self {
        Self {
            ctx: ctx.clone(),
            c: vec![BigRational::zero(); DIM],
        }
    }

    pub fn one(ctx: &Arc<Context>) -> Self {
        Self::from_rational(ctx, rat(1))
    }

    pub fn from_rational(ctx: &Arc<Context>, q: BigRational) -> Self {
        let mut e = Self::zero(ctx);
        e.c[0] = q;
        e
    }

    pub fn from_int(ctx: &Arc<Context>, n: impl Into<BigInt>) -> Self {
        Self::from_rational(ctx, BigRational::from(n.into()))
    }

    /// q times the basis monomial m.
    pub fn monomial(ctx: &Arc<Context>, m: u8, q: BigRational) -> Self {
        let mut e = Self::zero(ctx);
        e.c[m as usize] = q;
        e
    }

    pub fn i(ctx: &Arc<Context>) -> Self {
        Self::monomial(ctx, BIT_I, rat(1))
    }

    pub fn sqrt2(ctx: &Arc<Context>) -> Self {
        Self::monomial(ctx, BIT_SQRT2, rat(1))
    }

    pub fn sqrt_p1(ctx: &Arc<Context>) -> Self {
        Self::monomial(ctx, BIT_SQRTP1, rat(1))
    }

    pub fn sqrt_p2(ctx: &Arc<Context>) -> Self {
        Self::monomial(ctx, BIT_SQRTP2, rat(1))
    }

    /// Embeds a Gaussian integer re + im·i.
    pub fn from_gauss(ctx: &Arc<Context>, z: &GaussInt) -> Self {
        let mut e = Self::zero(ctx);
        e.c[0] = BigRational::from(z.re.clone());
        e.c[BIT_I as usize] = BigRational::from(z.im.clone());
        e
    }

    /// Embeds (x + y√d)/denom; d must be a subset product of {2, p₁, p₂}.
    pub fn from_fund_unit(ctx: &Arc<Context>, u: &FundUnit) -> Result<Self> {
        let m = ctx
            .monomial_for_radicand(&u.d)
            .ok_or_else(|| Error::BadSubfield(format!("sqrt({}) is not in this field", u.d)))?;
        let (x, y) = u.coords();
        let mut e = Self::zero(ctx);
        e.c[0] = x;
        e.c[m as usize] = y;
        Ok(e)
    }

    pub fn context(&self) -> &Arc<Context> {
        &self.ctx
    }

    pub fn coeff(&self, m: u8) -> &BigRational {
        &self.c[m as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(BigRational::is_zero)
    }

    /// Bitmask of monomials with nonzero coordinates.
    pub fn support(&self) -> u16 {
        let mut s = 0u16;
        for (m, q) in self.c.iter().enumerate() {
            if !q.is_zero() {
                s |= 1 << m;
            }
        }
        s
    }

    fn assert_same_ctx(&self, other: &Self) {
        assert!(
            self.ctx == other.ctx,
            "field elements from different (p1, p2) contexts"
        );
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.assert_same_ctx(rhs);
        let mut out = self.clone();
        for m in 0..DIM {
            if !rhs.c[m].is_zero() {
                out.c[m] += &rhs.c[m];
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.assert_same_ctx(rhs);
        let mut out = self.clone();
        for m in 0..DIM {
            if !rhs.c[m].is_zero() {
                out.c[m] -= &rhs.c[m];
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for m in 0..DIM {
            if !out.c[m].is_zero() {
                out.c[m] = -out.c[m].clone();
            }
        }
        out
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let mut out = self.clone();
        for m in 0..DIM {
            if !out.c[m].is_zero() {
                out.c[m] *= q;
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.assert_same_ctx(rhs);
        let mut out = Self::zero(&self.ctx);
        for i in 0..DIM {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..DIM {
                if rhs.c[j].is_zero() {
                    continue;
                }
                let term = &self.c[i] * &rhs.c[j] * &self.ctx.mul_factor[i * DIM + j];
                out.c[i ^ j] += term;
            }
        }
        out
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Galois conjugate: sigma's bits pick which radicals flip sign
    /// (i → −i, √2 → −√2, √p₁ → −√p₁, √p₂ → −√p₂ independently).
    pub fn conj(&self, sigma: u8) -> Self {
        let mut out = self.clone();
        for m in 0..DIM {
            if !out.c[m].is_zero() && ((m as u8) & sigma).count_ones() % 2 == 1 {
                out.c[m] = -out.c[m].clone();
            }
        }
        out
    }

    /// Complex conjugation (flips i only).
    pub fn complex_conj(&self) -> Self {
        self.conj(BIT_I)
    }

    /// Multiplicative inverse by descent: (A + B√θ)⁻¹ = (A − B√θ)/(A² − θB²).
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.inverse_level(&[BIT_SQRTP2, BIT_SQRTP1, BIT_SQRT2, BIT_I]))
    }

    fn inverse_level(&self, gens: &[u8]) -> Self {
        match gens.split_last() {
            None => {
                let q = self.c[0].recip();
                Self::from_rational(&self.ctx, q)
            }
            Some((&g, rest)) => {
                let (a, b) = self.split(g, rest);
                if b.is_zero() {
                    let inv = a.inverse_level(rest);
                    return inv;
                }
                let theta = Self::from_int(&self.ctx, self.ctx.monomial_squared(g));
                let n = a.square().sub(&theta.mul(&b.square()));
                let n_inv = n.inverse_level(rest);
                // (a − b·m_g) · n⁻¹
                let m = Self::monomial(&self.ctx, g, rat(1));
                a.sub(&b.mul(&m)).mul(&n_inv)
            }
        }
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(&rhs.inverse()?))
    }

    /// Splits x = A + B·m_g with A, B supported on span(rest).
    fn split(&self, g: u8, rest: &[u8]) -> (Self, Self) {
        let span = span_mask(rest);
        let mut a = Self::zero(&self.ctx);
        let mut b = Self::zero(&self.ctx);
        for m in 0..DIM {
            if self.c[m].is_zero() {
                continue;
            }
            if span & (1 << m) != 0 {
                a.c[m] = self.c[m].clone();
            } else {
                let h = (m as u8) ^ g;
                debug_assert!(span & (1 << h) != 0, "support outside span ∪ g·span");
                // m_h * m_g = factor * m_m, so the m-coordinate of B·m_g is
                // B[h] * factor
                let factor = &self.ctx.mul_factor[(h as usize) * DIM + g as usize];
                b.c[h as usize] = &self.c[m] / factor;
            }
        }
        (a, b)
    }

    /// Positive leading nonzero coordinate in basis order; the canonical
    /// representative of {x, −x}.
    pub fn canonical_sign(self) -> Self {
        for m in 0..DIM {
            if !self.c[m].is_zero() {
                return if self.c[m].is_negative() { self.neg() } else { self };
            }
        }
        self
    }
}

impl std::fmt::Display for FieldElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for m in 0..DIM {
            let q = &self.c[m];
            if q.is_zero() {
                continue;
            }
            let sign = if q.is_negative() { "-" } else { "+" };
            if first {
                if q.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = q.abs();
            let name = self.ctx.name_of(m as u8);
            if m == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{mag}*{name}")?;
            }
        }
        Ok(())
    }
}

/// Closure of {0} ∪ gens under XOR, as a bitset over the 16 indices.
fn span_mask(gens: &[u8]) -> u16 {
    let mut set = vec![0u8];
    for &g in gens {
        let mut more: Vec<u8> = set.iter().map(|&m| m ^ g).collect();
        set.append(&mut more);
    }
    let mut span = 0u16;
    for m in set {
        span |= 1 << m;
    }
    span
}

/// A subfield of L, described by the XOR-closed set of basis monomials that
/// span it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subfield {
    label: String,
    mask: u16,
}

impl Subfield {
    /// Closure of the given monomials under products; the canonical basis
    /// order (i, √2, √p₁, √p₂) fixes the generator list downstream.
    pub fn span(label: impl Into<String>, gens: &[u8]) -> Self {
        Self {
            label: label.into(),
            mask: span_mask(gens),
        }
    }

    pub fn rationals() -> Self {
        Self::span("Q", &[])
    }

    pub fn gaussian() -> Self {
        Self::span("Q(i)", &[BIT_I])
    }

    /// Q(√d) for d a subset product of {2, p₁, p₂}.
    pub fn real_quad(ctx: &Context, d: &BigUint) -> Result<Self> {
        let m = ctx
            .monomial_for_radicand(d)
            .ok_or_else(|| Error::BadSubfield(format!("sqrt({d}) is not in this field")))?;
        Ok(Self::span(format!("Q(sqrt({d}))"), &[m]))
    }

    /// k = Q(i, √(2p₁p₂)).
    pub fn base_field() -> Self {
        Self::span("k", &[BIT_I, BIT_SQRT2 | BIT_SQRTP1 | BIT_SQRTP2])
    }

    /// K₁ = k(√p₁) = Q(i, √p₁, √(2p₂)).
    pub fn k1() -> Self {
        Self::span("K1", &[BIT_I, BIT_SQRTP1, BIT_SQRT2 | BIT_SQRTP2])
    }

    /// K₂ = k(√p₂) = Q(i, √p₂, √(2p₁)).
    pub fn k2() -> Self {
        Self::span("K2", &[BIT_I, BIT_SQRTP2, BIT_SQRT2 | BIT_SQRTP1])
    }

    /// K₃ = k(√2) = Q(i, √2, √(p₁p₂)).
    pub fn k3() -> Self {
        Self::span("K3", &[BIT_I, BIT_SQRT2, BIT_SQRTP1 | BIT_SQRTP2])
    }

    /// K₃⁺ = Q(√2, √(p₁p₂)), the maximal real subfield of K₃.
    pub fn k3_plus() -> Self {
        Self::span("K3+", &[BIT_SQRT2, BIT_SQRTP1 | BIT_SQRTP2])
    }

    /// The real biquadratic field Q(√p_j, √(2·p_other)) under K_j.
    pub fn kj_real(j: u8) -> Self {
        match j {
            1 => Self::span("K1+", &[BIT_SQRTP1, BIT_SQRT2 | BIT_SQRTP2]),
            _ => Self::span("K2+", &[BIT_SQRTP2, BIT_SQRT2 | BIT_SQRTP1]),
        }
    }

    /// The whole of L = k* = Q(i, √2, √p₁, √p₂).
    pub fn genus() -> Self {
        Self::span("k*", &[BIT_I, BIT_SQRT2, BIT_SQRTP1, BIT_SQRTP2])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mask(&self) -> u16 {
        self.mask
    }

    pub fn degree(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn contains_elem(&self, x: &FieldElem) -> bool {
        x.support() & !self.mask == 0
    }

    pub fn contains_field(&self, other: &Subfield) -> bool {
        other.mask & !self.mask == 0
    }

    pub fn is_totally_real(&self) -> bool {
        (0..DIM).all(|m| self.mask & (1 << m) == 0 || (m as u8) & BIT_I == 0)
    }

    /// Independent generators, chosen greedily in basis index order.
    pub fn tower_gens(&self) -> Vec<u8> {
        let mut gens: Vec<u8> = Vec::new();
        for m in 1..DIM as u8 {
            if self.mask & (1 << m) == 0 {
                continue;
            }
            if span_mask(&gens) & (1 << m) == 0 {
                gens.push(m);
            }
        }
        gens
    }

    /// Annihilator subgroup: the sigmas fixing this subfield pointwise.
    pub fn fixing_group(&self) -> Vec<u8> {
        (0..DIM as u8)
            .filter(|&s| {
                (0..DIM as u8)
                    .all(|m| self.mask & (1 << m) == 0 || (m & s).count_ones() % 2 == 0)
            })
            .collect()
    }
}

/// Norm of x from `source` down to `target`: the product of x over a
/// transversal of Gal(L/source) in Gal(L/target). The result's support lies
/// in the target's monomials.
pub fn relative_norm(x: &FieldElem, source: &Subfield, target: &Subfield) -> Result<FieldElem> {
    if !source.contains_elem(x) {
        return Err(Error::OutsideSubfield);
    }
    if !source.contains_field(target) {
        return Err(Error::BadSubfield(format!(
            "{} is not a subfield of {}",
            target.label(),
            source.label()
        )));
    }
    let h_source = source.fixing_group();
    let h_target = target.fixing_group();
    let mut reps: Vec<u8> = Vec::new();
    for &s in &h_target {
        if !reps.iter().any(|&r| h_source.contains(&(r ^ s))) {
            reps.push(s);
        }
    }
    let mut out = FieldElem::one(x.context());
    for r in reps {
        out = out.mul(&x.conj(r));
    }
    debug_assert!(target.contains_elem(&out), "norm left the target subfield");
    Ok(out)
}

/// Norm from all of L down to `target` (each degree-`[L:target]` conjugate
/// taken once, so a quadratic-subfield element contributes repeated factors).
pub fn norm_to(x: &FieldElem, target: &Subfield) -> Result<FieldElem> {
    relative_norm(x, &Subfield::genus(), target)
}

/// Rational norm from L to Q, as a single rational.
pub fn norm_to_q(x: &FieldElem) -> BigRational {
    let n = norm_to(x, &Subfield::rationals()).expect("Q is a subfield of everything");
    n.coeff(0).clone()
}

/// Exact square-root decision in a subfield: Some(root) with root² = x and
/// root supported in `where_`, or None. The returned root has positive
/// leading nonzero coordinate in basis order.
pub fn sqrt_in(x: &FieldElem, where_: &Subfield) -> Result<Option<FieldElem>> {
    if !where_.contains_elem(x) {
        return Err(Error::OutsideSubfield);
    }
    if x.is_zero() {
        return Ok(Some(x.clone()));
    }
    // fast path: a totally real field admits no square root of an element
    // that is provably negative in the identity embedding
    if where_.is_totally_real() && identity_embedding_sign(x) == Some(-1) {
        return Ok(None);
    }
    let gens = where_.tower_gens();
    Ok(descend(x, &gens).map(FieldElem::canonical_sign))
}

fn descend(x: &FieldElem, gens: &[u8]) -> Option<FieldElem> {
    let ctx = x.context();
    if x.is_zero() {
        return Some(FieldElem::zero(ctx));
    }
    let Some((&g, rest)) = gens.split_last() else {
        // base case: a rational
        let q = x.coeff(0);
        return sqrt_rational(q).map(|r| FieldElem::from_rational(ctx, r));
    };
    let (a, b) = x.split(g, rest);
    let theta = FieldElem::from_int(ctx, ctx.monomial_squared(g));
    let mono = FieldElem::monomial(ctx, g, rat(1));
    if b.is_zero() {
        // x = A: either √A below, or √(A/θ)·m_g
        if let Some(r) = descend(&a, rest) {
            return Some(r);
        }
        let a_over_theta = a.div(&theta).expect("theta is invertible");
        if let Some(r) = descend(&a_over_theta, rest) {
            return Some(r.mul(&mono));
        }
        return None;
    }
    let n = a.square().sub(&theta.mul(&b.square()));
    debug_assert!(!n.is_zero(), "norm form vanished on a nonzero element");
    let s = descend(&n, rest)?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for s_signed in [s.clone(), s.neg()] {
        let c2 = a.add(&s_signed).scale(&half);
        if let Some(c) = descend(&c2, rest) {
            if !c.is_zero() {
                let d = b.div(&c.scale(&rat(2))).expect("c is nonzero");
                let root = c.add(&d.mul(&mono));
                if root.square() == *x {
                    return Some(root);
                }
            }
        }
    }
    None
}

/// Sign of x under the embedding sending every radical to its positive real
/// root: +1, −1, or None when x is not totally real supported or the
/// interval ladder stays inconclusive up to the 4096-bit cap.
pub fn identity_embedding_sign(x: &FieldElem) -> Option<i8> {
    if x.support() & 0xff00 != 0 {
        return None; // involves i
    }
    if x.is_zero() {
        return Some(1);
    }
    let ctx = x.context();
    let mut prec = ctx.prec_bits();
    loop {
        let (lo, hi) = embed_interval(x, prec);
        if lo.is_positive() {
            return Some(1);
        }
        if hi.is_negative() {
            return Some(-1);
        }
        if prec >= 4096 {
            return None;
        }
        prec = (prec * 2).min(4096);
    }
}

/// Rational interval bracketing the identity embedding of a totally real x.
fn embed_interval(x: &FieldElem, prec: u32) -> (BigRational, BigRational) {
    let ctx = x.context();
    let scale = BigInt::one() << prec;
    let bracket = |m: u8| -> (BigRational, BigRational) {
        // floor(2^prec * sqrt(d)) / 2^prec <= sqrt(d) < (floor + 1) / 2^prec
        let d = ctx.real_radicand(m);
        let shifted = d << (2 * prec);
        let root = BigInt::from(shifted.sqrt());
        (
            BigRational::new(root.clone(), scale.clone()),
            BigRational::new(root + 1, scale.clone()),
        )
    };
    let mut lo = BigRational::zero();
    let mut hi = BigRational::zero();
    for m in 0..DIM as u8 {
        let q = x.coeff(m);
        if q.is_zero() {
            continue;
        }
        if m == 0 {
            lo += q;
            hi += q;
            continue;
        }
        let (mlo, mhi) = bracket(m);
        let (term_lo, term_hi) = if q.is_positive() {
            (q * &mlo, q * &mhi)
        } else {
            (q * &mhi, q * &mlo)
        };
        lo += term_lo;
        hi += term_hi;
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ctx(p1: u64, p2: u64) -> Arc<Context> {
        Context::new(
            Prime1Mod4::new(BigUint::from(p1)).unwrap(),
            Prime1Mod4::new(BigUint::from(p2)).unwrap(),
        )
        .unwrap()
    }

    fn elem(ctx: &Arc<Context>, coords: &[(u8, i64, i64)]) -> FieldElem {
        let mut e = FieldElem::zero(ctx);
        for &(m, num, den) in coords {
            e = e.add(&FieldElem::monomial(
                ctx,
                m,
                BigRational::new(BigInt::from(num), BigInt::from(den)),
            ));
        }
        e
    }

    #[test]
    fn context_rejects_degenerate_pairs() {
        let p5 = Prime1Mod4::new(BigUint::from(5u32)).unwrap();
        assert!(Context::new(p5.clone(), p5).is_err());
        assert!(Prime1Mod4::new(BigUint::from(2u32)).is_err());
    }

    #[test]
    fn ring_identities() {
        let c = ctx(5, 13);
        // (1+sqrt2)(-1+sqrt2) = 1
        let a = elem(&c, &[(0, 1, 1), (BIT_SQRT2, 1, 1)]);
        let b = elem(&c, &[(0, -1, 1), (BIT_SQRT2, 1, 1)]);
        assert_eq!(a.mul(&b), FieldElem::one(&c));
        // (1+i)^2 = 2i
        let one_plus_i = elem(&c, &[(0, 1, 1), (BIT_I, 1, 1)]);
        assert_eq!(one_plus_i.square(), elem(&c, &[(BIT_I, 2, 1)]));
        // inverse(sqrt(p1)) = sqrt(p1)/p1
        let sp1 = FieldElem::sqrt_p1(&c);
        assert_eq!(sp1.inverse().unwrap(), elem(&c, &[(BIT_SQRTP1, 1, 5)]));
        // context mismatch panics are covered by the assert; zero inverse errors
        assert!(FieldElem::zero(&c).inverse().is_err());
    }

    #[test]
    fn norm_examples() {
        let c = ctx(5, 13);
        // N_{L/Q}(1+sqrt2) = ((1+sqrt2)(1-sqrt2))^8 = 1
        let a = elem(&c, &[(0, 1, 1), (BIT_SQRT2, 1, 1)]);
        assert_eq!(norm_to_q(&a), rat(1));
        // N_{k/Q(i)}(sqrt(2 p1 p2)) = -2 p1 p2
        let sqrt_d = elem(&c, &[(7, 1, 1)]);
        let n = relative_norm(&sqrt_d, &Subfield::base_field(), &Subfield::gaussian()).unwrap();
        assert_eq!(n, FieldElem::from_int(&c, -130));
    }

    #[test]
    fn relative_norm_lands_in_target() {
        let c = ctx(5, 13);
        let k = Subfield::base_field();
        let k1 = Subfield::k1();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let mut u = FieldElem::zero(&c);
            for m in 0..16u8 {
                if k1.mask() & (1 << m) != 0 && rng.gen_bool(0.7) {
                    let num = rng.gen_range(-5i64..=5);
                    u = u.add(&FieldElem::monomial(&c, m, rat(num)));
                }
            }
            if u.is_zero() {
                continue;
            }
            let n = relative_norm(&u, &k1, &k).unwrap();
            assert!(k.contains_elem(&n));
        }
    }

    #[test]
    fn sqrt_examples() {
        let c = ctx(5, 13);
        let q_sqrt2 = Subfield::real_quad(&c, &BigUint::from(2u32)).unwrap();
        // 3 + 2 sqrt2 = (1 + sqrt2)^2
        let x = elem(&c, &[(0, 3, 1), (BIT_SQRT2, 2, 1)]);
        let root = sqrt_in(&x, &q_sqrt2).unwrap().unwrap();
        assert_eq!(root, elem(&c, &[(0, 1, 1), (BIT_SQRT2, 1, 1)]));
        // 2i = (1+i)^2 in Q(i)
        let x = elem(&c, &[(BIT_I, 2, 1)]);
        let root = sqrt_in(&x, &Subfield::gaussian()).unwrap().unwrap();
        assert_eq!(root, elem(&c, &[(0, 1, 1), (BIT_I, 1, 1)]));
        // 2 + 2 sqrt2 is not a square even in all of L
        let x = elem(&c, &[(0, 2, 1), (BIT_SQRT2, 2, 1)]);
        assert_eq!(sqrt_in(&x, &Subfield::genus()).unwrap(), None);
        // (1+i)(1+sqrt2) in Q(i, sqrt2): root (2 + (1+i) sqrt2)/2
        let x = elem(&c, &[(0, 1, 1), (BIT_I, 1, 1)]).mul(&elem(&c, &[(0, 1, 1), (BIT_SQRT2, 1, 1)]));
        let qi_sqrt2 = Subfield::span("Q(i,sqrt2)", &[BIT_I, BIT_SQRT2]);
        let root = sqrt_in(&x, &qi_sqrt2).unwrap().unwrap();
        let expected = elem(
            &c,
            &[(0, 1, 1), (BIT_SQRT2, 1, 2), (BIT_I | BIT_SQRT2, 1, 2)],
        );
        assert_eq!(root, expected);
    }

    #[test]
    fn sqrt_respects_subfield_restriction() {
        let c = ctx(5, 13);
        // 2 is a square in Q(sqrt2) but not in Q
        let two = FieldElem::from_int(&c, 2);
        assert!(sqrt_in(&two, &Subfield::rationals()).unwrap().is_none());
        let q_sqrt2 = Subfield::real_quad(&c, &BigUint::from(2u32)).unwrap();
        assert_eq!(
            sqrt_in(&two, &q_sqrt2).unwrap().unwrap(),
            FieldElem::sqrt2(&c)
        );
        // an element outside the requested subfield is a precondition error
        assert!(sqrt_in(&FieldElem::i(&c), &q_sqrt2).is_err());
    }

    #[test]
    fn minus_one_square_only_with_i() {
        let c = ctx(5, 13);
        let minus_one = FieldElem::from_int(&c, -1);
        let q_sqrt2 = Subfield::real_quad(&c, &BigUint::from(2u32)).unwrap();
        assert_eq!(sqrt_in(&minus_one, &q_sqrt2).unwrap(), None);
        assert_eq!(
            sqrt_in(&minus_one, &Subfield::gaussian()).unwrap().unwrap(),
            FieldElem::i(&c)
        );
    }

    #[test]
    fn subfield_masks_are_multiplicative() {
        let c = ctx(5, 13);
        for sub in [
            Subfield::base_field(),
            Subfield::k1(),
            Subfield::k2(),
            Subfield::k3(),
            Subfield::k3_plus(),
        ] {
            let mut rng = StdRng::seed_from_u64(11);
            for _ in 0..20 {
                let mut a = FieldElem::zero(&c);
                let mut b = FieldElem::zero(&c);
                for m in 0..16u8 {
                    if sub.mask() & (1 << m) != 0 {
                        a = a.add(&FieldElem::monomial(&c, m, rat(rng.gen_range(-4i64..=4))));
                        b = b.add(&FieldElem::monomial(&c, m, rat(rng.gen_range(-4i64..=4))));
                    }
                }
                assert!(sub.contains_elem(&a.mul(&b)), "{} not closed", sub.label());
            }
        }
    }

    #[test]
    fn galois_is_multiplicative_and_equivariant() {
        let c = ctx(5, 13);
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..25 {
            let mut a = FieldElem::zero(&c);
            let mut b = FieldElem::zero(&c);
            for m in 0..16u8 {
                a = a.add(&FieldElem::monomial(&c, m, rat(rng.gen_range(-3i64..=3))));
                b = b.add(&FieldElem::monomial(&c, m, rat(rng.gen_range(-3i64..=3))));
            }
            let sigma = rng.gen_range(0u8..16);
            assert_eq!(a.mul(&b).conj(sigma), a.conj(sigma).mul(&b.conj(sigma)));
            // equivariance of the square test: the Galois group is abelian,
            // so every subfield is stable and x is a square in F iff
            // sigma(x) is
            if !a.is_zero() {
                let sq = a.square();
                for sub in [Subfield::genus(), Subfield::base_field(), Subfield::k3()] {
                    let projected: FieldElem = {
                        // restrict the sample into the subfield by zeroing
                        // coordinates outside its mask
                        let mut e = FieldElem::zero(&c);
                        for m in 0..16u8 {
                            if sub.mask() & (1 << m) != 0 {
                                e = e.add(&FieldElem::monomial(&c, m, sq.coeff(m).clone()));
                            }
                        }
                        e
                    };
                    if projected.is_zero() {
                        continue;
                    }
                    let root = sqrt_in(&projected, &sub).unwrap();
                    let root_conj = sqrt_in(&projected.conj(sigma), &sub).unwrap();
                    assert_eq!(root.is_some(), root_conj.is_some(), "{}", sub.label());
                }
            }
        }
    }

    #[test]
    fn sqrt_roundtrip_random_elements() {
        let c = ctx(5, 13);
        let l = Subfield::genus();
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..200 {
            let mut r = FieldElem::zero(&c);
            for m in 0..16u8 {
                if rng.gen_bool(0.5) {
                    let num = rng.gen_range(-9i64..=9);
                    let den = rng.gen_range(1i64..=4);
                    r = r.add(&FieldElem::monomial(&c, m, BigRational::new(num.into(), den.into())));
                }
            }
            if r.is_zero() {
                continue;
            }
            let sq = r.square();
            let root = sqrt_in(&sq, &l).unwrap().expect("square must have a root");
            assert_eq!(root.square(), sq);
        }
    }

    #[test]
    fn embedding_sign_handles_large_units() {
        let c = ctx(5, 13);
        // eps = 57 + 5 sqrt(130) is positive, its conjugate negative
        let eps = elem(&c, &[(0, 57, 1), (7, 5, 1)]);
        assert_eq!(identity_embedding_sign(&eps), Some(1));
        let conj = elem(&c, &[(0, 57, 1), (7, -5, 1)]);
        assert_eq!(identity_embedding_sign(&conj), Some(-1));
        let with_i = elem(&c, &[(BIT_I, 1, 1)]);
        assert_eq!(identity_embedding_sign(&with_i), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn mul_commutes_and_distributes(
            a0 in -6i64..6, a1 in -6i64..6, a2 in -6i64..6,
            b0 in -6i64..6, b1 in -6i64..6, b2 in -6i64..6,
        ) {
            let c = ctx(5, 13);
            let a = elem(&c, &[(0, a0, 1), (3, a1, 1), (BIT_I | BIT_SQRT2, a2, 1)]);
            let b = elem(&c, &[(BIT_I, b0, 1), (5, b1, 1), (7, b2, 1)]);
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            let sum = a.add(&b);
            prop_assert_eq!(sum.mul(&a), a.mul(&a).add(&b.mul(&a)));
        }

        #[test]
        fn inverse_roundtrip(
            a0 in -6i64..6, a1 in -6i64..6, a2 in -6i64..6, a3 in -6i64..6,
        ) {
            let c = ctx(5, 13);
            let a = elem(&c, &[(0, a0, 1), (BIT_I, a1, 1), (6, a2, 1), (1, a3, 1)]);
            prop_assume!(!a.is_zero());
            let inv = a.inverse().unwrap();
            prop_assert_eq!(a.mul(&inv), FieldElem::one(&c));
        }
    }
}
