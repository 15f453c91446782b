//! Exact polynomial function algebra on `S³`, closed under the reference
//! left-invariant frame.
//!
//! The reference frame is
//! `Z₁ = w̄ ∂_z − z̄ ∂_w`, `Z₁̄ = w ∂_z̄ − z ∂_w̄`,
//! `T = i(z ∂_z + w ∂_w − z̄ ∂_z̄ − w̄ ∂_w̄)`,
//! with brackets `[Z₁, Z₁̄] = −iT` and `[T, Z₁] = −2i Z₁`. The dual coframe
//! `(θ₀, θ₀¹, θ₀¹̄)` satisfies `dθ₀ = i θ₀¹ ∧ θ₀¹̄` and `θ₀(T) = 1`,
//! `dθ₀(T, ·) = 0`, so `T` is the Reeb field of the reference contact form.

use crate::mono::Mono;
use crate::points::SPoint;
use crate::{Scalar, C};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Frame directions for derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dir {
    Z1,
    Z1bar,
    T,
}

/// A complex-valued function on `S³` stored over the canonical monomial
/// basis. All keys are reduced (`min(a, c) = 0`); the map is ordered, so
/// every sum runs in canonical index order and results are deterministic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Field {
    terms: BTreeMap<Mono, C>,
}

impl Field {
    pub fn zero() -> Self {
        Field::default()
    }

    pub fn constant(c: C) -> Self {
        let mut f = Field::zero();
        f.add_term(Mono::ONE, c);
        f
    }

    pub fn one() -> Self {
        Field::constant(C::new(1.0, 0.0))
    }

    pub fn real_constant(x: Scalar) -> Self {
        Field::constant(C::new(x, 0.0))
    }

    pub fn monomial(m: Mono, coeff: C) -> Self {
        let mut f = Field::zero();
        f.add_term(m, coeff);
        f
    }

    pub fn z() -> Self {
        Field::monomial(Mono::new(1, 0, 0, 0), C::new(1.0, 0.0))
    }
    pub fn w() -> Self {
        Field::monomial(Mono::new(0, 1, 0, 0), C::new(1.0, 0.0))
    }
    pub fn zbar() -> Self {
        Field::monomial(Mono::new(0, 0, 1, 0), C::new(1.0, 0.0))
    }
    pub fn wbar() -> Self {
        Field::monomial(Mono::new(0, 0, 0, 1), C::new(1.0, 0.0))
    }

    /// Adds `coeff · m`, reducing `m` to canonical form first.
    pub fn add_term(&mut self, m: Mono, coeff: C) {
        if coeff == C::new(0.0, 0.0) {
            return;
        }
        for (r, s) in m.reduce() {
            let slot = self.terms.entry(r).or_insert(C::new(0.0, 0.0));
            *slot += coeff * s;
            if *slot == C::new(0.0, 0.0) {
                self.terms.remove(&r);
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mono, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Mono) -> C {
        self.terms.get(m).copied().unwrap_or(C::new(0.0, 0.0))
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Field) -> Field {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let slot = out.terms.entry(*m).or_insert(C::new(0.0, 0.0));
            *slot += c;
            if *slot == C::new(0.0, 0.0) {
                out.terms.remove(m);
            }
        }
        out
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Field {
        self.scale(C::new(-1.0, 0.0))
    }

    pub fn scale(&self, s: C) -> Field {
        if s == C::new(0.0, 0.0) {
            return Field::zero();
        }
        Field {
            terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect(),
        }
    }

    /// Exact product (no degree cap). Degrees add before reduction.
    pub fn mul(&self, other: &Field) -> Field {
        use std::collections::HashMap;
        let mut acc: HashMap<Mono, C> =
            HashMap::with_capacity(self.terms.len().max(other.terms.len()) * 2);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let coeff = c1 * c2;
                let m = m1.mul(m2);
                let mm = m.a.min(m.c);
                if mm == 0 {
                    *acc.entry(m).or_insert(C::new(0.0, 0.0)) += coeff;
                } else {
                    // inline binomial reduction (z z̄)^mm = (1 − w w̄)^mm
                    let (a, c) = (m.a - mm, m.c - mm);
                    let mut binom = 1.0;
                    for j in 0..=mm {
                        *acc.entry(Mono::new(a, m.b + j, c, m.d + j))
                            .or_insert(C::new(0.0, 0.0)) += coeff * binom;
                        binom *= -((mm - j) as Scalar) / ((j + 1) as Scalar);
                    }
                }
            }
        }
        Field {
            terms: acc
                .into_iter()
                .filter(|(_, c)| *c != C::new(0.0, 0.0))
                .collect(),
        }
    }

    /// Product truncated to degree `≤ cap`; returns the result together with
    /// the largest dropped coefficient magnitude (the truncation budget).
    pub fn mul_capped(&self, other: &Field, cap: usize) -> (Field, Scalar) {
        let full = self.mul(other);
        full.truncate(cap)
    }

    /// Drops monomials of degree `> cap`; returns the max dropped magnitude.
    pub fn truncate(&self, cap: usize) -> (Field, Scalar) {
        let mut out = Field::zero();
        let mut dropped: Scalar = 0.0;
        for (m, c) in &self.terms {
            if m.degree() <= cap {
                out.terms.insert(*m, *c);
            } else {
                dropped = dropped.max(c.norm());
            }
        }
        (out, dropped)
    }

    /// Complex conjugate field.
    pub fn conj(&self) -> Field {
        Field {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.conj(), c.conj()))
                .collect(),
        }
    }

    /// Real part `(f + f̄)/2`.
    pub fn re(&self) -> Field {
        self.add(&self.conj()).scale(C::new(0.5, 0.0))
    }

    /// Imaginary part `(f − f̄)/(2i)`, a real field.
    pub fn im(&self) -> Field {
        self.sub(&self.conj()).scale(C::new(0.0, -0.5))
    }

    /// Deviation from reality, `‖f − f̄‖_{L²}`.
    pub fn reality_defect(&self) -> Scalar {
        self.sub(&self.conj()).l2_norm()
    }

    /// Exact action of a reference frame field; the total degree is
    /// preserved before reduction.
    pub fn frame_derive(&self, dir: Dir) -> Field {
        let mut out = Field::zero();
        for (m, c) in &self.terms {
            match dir {
                Dir::Z1 => {
                    // Z₁ = w̄ ∂_z − z̄ ∂_w
                    if m.a > 0 {
                        out.add_term(Mono::new(m.a - 1, m.b, m.c, m.d + 1), c * m.a as Scalar);
                    }
                    if m.b > 0 {
                        out.add_term(Mono::new(m.a, m.b - 1, m.c + 1, m.d), -c * m.b as Scalar);
                    }
                }
                Dir::Z1bar => {
                    // Z₁̄ = w ∂_z̄ − z ∂_w̄
                    if m.c > 0 {
                        out.add_term(Mono::new(m.a, m.b + 1, m.c - 1, m.d), c * m.c as Scalar);
                    }
                    if m.d > 0 {
                        out.add_term(Mono::new(m.a + 1, m.b, m.c, m.d - 1), -c * m.d as Scalar);
                    }
                }
                Dir::T => {
                    let k = m.a as i32 + m.b as i32 - m.c as i32 - m.d as i32;
                    out.add_term(*m, c * C::new(0.0, k as Scalar));
                }
            }
        }
        out
    }

    /// Pointwise evaluation.
    pub fn eval(&self, p: SPoint) -> C {
        let mut acc = C::new(0.0, 0.0);
        let (zb, wb) = (p.z.conj(), p.w.conj());
        for (m, c) in &self.terms {
            acc += c
                * p.z.powi(m.a as i32)
                * p.w.powi(m.b as i32)
                * zb.powi(m.c as i32)
                * wb.powi(m.d as i32);
        }
        acc
    }

    /// `L²` norm against the reference volume form.
    pub fn l2_norm(&self) -> Scalar {
        inner(self, self).re.max(0.0).sqrt()
    }

    /// Max magnitude over a sample set.
    pub fn max_at(&self, pts: &[SPoint]) -> Scalar {
        pts.iter()
            .map(|p| self.eval(*p).norm())
            .fold(0.0, Scalar::max)
    }

    /// Coefficient vector over `basis` (zero for monomials not present).
    pub fn to_vector(&self, basis: &[Mono]) -> Vec<C> {
        basis.iter().map(|m| self.coeff(m)).collect()
    }

    pub fn from_vector(basis: &[Mono], v: &[C]) -> Field {
        let mut f = Field::zero();
        for (m, c) in basis.iter().zip(v) {
            f.add_term(*m, *c);
        }
        f
    }
}

/// Exact integral against the reference volume form `dμ₀ = θ₀ ∧ dθ₀`.
pub fn integrate(f: &Field) -> C {
    let mut acc = C::new(0.0, 0.0);
    for (m, c) in f.iter() {
        acc += c * m.integral();
    }
    acc
}

/// Hermitian `L²` pairing `∫ f ḡ dμ₀`.
pub fn inner(f: &Field, g: &Field) -> C {
    integrate(&f.mul(&g.conj()))
}

/// Exact `∫ f g dμ₀` without forming the product: only exponent-balanced
/// monomial pairs contribute, so terms are bucketed by their phase keys
/// `(a−c, b−d)` and only matching buckets are paired.
pub fn integrate_product(f: &Field, g: &Field) -> C {
    use std::collections::HashMap;
    let mut buckets: HashMap<(i16, i16), Vec<(Mono, C)>> = HashMap::new();
    for (m, c) in g.iter() {
        buckets
            .entry((m.a as i16 - m.c as i16, m.b as i16 - m.d as i16))
            .or_default()
            .push((*m, *c));
    }
    let mut acc = C::new(0.0, 0.0);
    for (m, c) in f.iter() {
        let key = (-(m.a as i16 - m.c as i16), -(m.b as i16 - m.d as i16));
        if let Some(list) = buckets.get(&key) {
            for (n, d) in list {
                acc += c * d * m.mul(n).integral();
            }
        }
    }
    acc
}

/// Truncated exponential series `Σ_{j≤order} g^j / j!` with products capped
/// at degree `cap`.
///
/// Two error sources, both documented budgets: the series tail
/// `|g|^{order+1}/(order+1)!` (below `1e-18` for the default `|g| ≤ 0.1`,
/// `order = 12`) and the degree-cap drop, which for a degree-2 exponent of
/// amplitude `0.1` at `cap = 12` stays below `~1e-10` pointwise.
pub fn exp_series(g: &Field, order: usize, cap: usize) -> Field {
    let mut sum = Field::one();
    let mut term = Field::one();
    for j in 1..=order {
        let (t, _) = term.mul_capped(g, cap);
        term = t.scale(C::new(1.0 / j as Scalar, 0.0));
        if term.is_empty() {
            break;
        }
        sum = sum.add(&term);
    }
    sum
}

/// Serialized form: a list of `(a, b, c, d, re, im)` entries.
#[derive(Serialize, Deserialize)]
struct FieldEntry {
    a: u8,
    b: u8,
    c: u8,
    d: u8,
    re: Scalar,
    im: Scalar,
}

impl Serialize for Field {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<FieldEntry> = self
            .terms
            .iter()
            .map(|(m, c)| FieldEntry {
                a: m.a,
                b: m.b,
                c: m.c,
                d: m.d,
                re: c.re,
                im: c.im,
            })
            .collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<FieldEntry>::deserialize(d)?;
        let mut f = Field::zero();
        for e in entries {
            f.add_term(Mono::new(e.a, e.b, e.c, e.d), C::new(e.re, e.im));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::{flow_t, flow_x, flow_y, random_points};
    use crate::{I, VOLUME};

    fn assert_close(a: C, b: C, tol: Scalar) {
        assert!((a - b).norm() <= tol, "{a} vs {b}");
    }

    #[test]
    fn defining_relation() {
        // z · z̄ → 1 − w w̄
        let p = Field::z().mul(&Field::zbar());
        let mut expect = Field::one();
        expect.add_term(Mono::new(0, 1, 0, 1), C::new(-1.0, 0.0));
        assert_eq!(p, expect);
    }

    #[test]
    fn product_identity_and_pointwise() {
        let f = Field::z()
            .add(&Field::w())
            .mul(&Field::zbar().add(&Field::wbar()));
        // (z + w)(z̄ + w̄) = 1 + z w̄ + w z̄ after reduction
        let mut expect = Field::one();
        expect.add_term(Mono::new(1, 0, 0, 1), C::new(1.0, 0.0));
        expect.add_term(Mono::new(0, 1, 1, 0), C::new(1.0, 0.0));
        assert_eq!(f, expect);
        for p in random_points(3, 20) {
            let lhs = (p.z + p.w) * (p.z.conj() + p.w.conj());
            assert_close(f.eval(p), lhs, 1e-12);
        }
    }

    #[test]
    fn frame_annihilates_constants_and_cr_functions() {
        let one = Field::one();
        for dir in [Dir::Z1, Dir::Z1bar, Dir::T] {
            assert!(one.frame_derive(dir).is_empty());
        }
        // Z₁̄ annihilates restrictions of holomorphic polynomials
        let holo = Field::z()
            .mul(&Field::w())
            .add(&Field::z().scale(C::new(2.0, 0.5)));
        assert!(holo.frame_derive(Dir::Z1bar).is_empty());
    }

    #[test]
    fn bracket_identity_on_scalars() {
        // Z₁̄Z₁ x − Z₁Z₁̄ x = i T x for the reference frame
        for f in crate::sampling::random_fields(11, 6, 4) {
            let lhs = f
                .frame_derive(Dir::Z1)
                .frame_derive(Dir::Z1bar)
                .sub(&f.frame_derive(Dir::Z1bar).frame_derive(Dir::Z1));
            let rhs = f.frame_derive(Dir::T).scale(I);
            assert!(lhs.sub(&rhs).l2_norm() < 1e-10 * (1.0 + f.l2_norm()));
        }
    }

    #[test]
    fn leibniz_rule_exact() {
        let fs = crate::sampling::random_fields(5, 4, 3);
        let gs = crate::sampling::random_fields(6, 4, 3);
        for (f, g) in fs.iter().zip(&gs) {
            for dir in [Dir::Z1, Dir::Z1bar, Dir::T] {
                let lhs = f.mul(g).frame_derive(dir);
                let rhs = f.frame_derive(dir).mul(g).add(&f.mul(&g.frame_derive(dir)));
                assert!(lhs.sub(&rhs).l2_norm() < 1e-10 * (1.0 + lhs.l2_norm()));
            }
        }
    }

    #[test]
    fn integration_golden_and_symmetry() {
        assert!((integrate(&Field::one()).re - VOLUME).abs() < 1e-12);
        assert_eq!(integrate(&Field::z()), C::new(0.0, 0.0));
        let zz = Field::z().mul(&Field::zbar());
        assert_close(
            integrate(&zz) / integrate(&Field::one()),
            C::new(0.5, 0.0),
            1e-13,
        );
        // swap symmetry: ⟨z, z⟩ = ⟨w, w⟩, monomial orthogonality ⟨z, w⟩ = 0
        assert_close(
            inner(&Field::z(), &Field::z()),
            inner(&Field::w(), &Field::w()),
            1e-13,
        );
        assert_eq!(inner(&Field::z(), &Field::w()), C::new(0.0, 0.0));
    }

    #[test]
    fn monte_carlo_validates_integration() {
        // 10⁶ uniform samples agree with the closed form to 3 significant digits
        let f = Field::z()
            .mul(&Field::zbar())
            .mul(&Field::w().mul(&Field::wbar()));
        let pts = random_points(42, 1_000_000);
        let mc: C = pts.iter().map(|p| f.eval(*p)).sum::<C>() / pts.len() as Scalar * VOLUME;
        let exact = integrate(&f);
        assert!(
            (mc - exact).norm() / exact.norm() < 2e-3,
            "mc {mc} exact {exact}"
        );
    }

    #[test]
    fn integration_by_parts_divergence_free() {
        let fs = crate::sampling::random_fields(7, 5, 3);
        let gs = crate::sampling::random_fields(8, 5, 3);
        for (f, g) in fs.iter().zip(&gs) {
            let lhs = integrate(&f.frame_derive(Dir::Z1).mul(g));
            let rhs = integrate(&f.mul(&g.frame_derive(Dir::Z1)));
            assert!((lhs + rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
            assert!((integrate(&f.frame_derive(Dir::T))).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugation_properties() {
        for f in crate::sampling::random_fields(9, 6, 4) {
            assert_close(integrate(&f.conj()), integrate(&f).conj(), 1e-12);
            let lhs = f.conj().frame_derive(Dir::Z1bar);
            let rhs = f.frame_derive(Dir::Z1).conj();
            assert!(lhs.sub(&rhs).l2_norm() < 1e-12);
        }
    }

    #[test]
    fn frame_derivative_matches_flow_differences() {
        // finite differences along the exact flows of X = Z₁+Z₁̄, Y = i(Z₁−Z₁̄), T
        let f = crate::sampling::random_fields(13, 5, 1).pop().unwrap();
        let h = 1e-5;
        for p in random_points(14, 20) {
            let dx = (f.eval(flow_x(p, h)) - f.eval(flow_x(p, -h))) / (2.0 * h);
            let dy = (f.eval(flow_y(p, h)) - f.eval(flow_y(p, -h))) / (2.0 * h);
            let dt = (f.eval(flow_t(p, h)) - f.eval(flow_t(p, -h))) / (2.0 * h);
            let z1 = f.frame_derive(Dir::Z1).eval(p);
            let z1b = f.frame_derive(Dir::Z1bar).eval(p);
            assert_close(z1 + z1b, dx, 1e-8);
            assert_close(I * (z1 - z1b), dy, 1e-8);
            assert_close(f.frame_derive(Dir::T).eval(p), dt, 1e-8);
        }
    }

    #[test]
    fn exp_series_matches_pointwise_exp() {
        let g = Field::z().mul(&Field::wbar()).re().scale(C::new(0.2, 0.0));
        // generous cap: only the series tail remains
        let e = exp_series(&g, 12, 16);
        for p in random_points(15, 20) {
            let expect = g.eval(p).re.exp();
            assert_close(e.eval(p), C::new(expect, 0.0), 1e-12);
        }
        // default cap: the documented cap-drop budget
        let e12 = exp_series(&g, 12, 12);
        for p in random_points(16, 20) {
            let expect = g.eval(p).re.exp();
            assert_close(e12.eval(p), C::new(expect, 0.0), 1e-9);
        }
    }

    #[test]
    fn serde_round_trip() {
        let f = crate::sampling::random_fields(21, 6, 1).pop().unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: Field = serde_json::from_str(&json).unwrap();
        assert_eq!(f, back);
    }
}
