//! Curvature-torsion convexity and the Bôchner-type integral identities.
//!
//! The `(C₀, C₁)`-convexity condition asks that the pointwise expression
//!
//! ```text
//! R|x¹|² − 2C₀ Re[i A₁̄₁̄ (x̄¹)²] − 2C₁ Re[i A₁̄₁̄,₁ x̄¹] > 0
//! ```
//!
//! holds along the family `x¹ = 1 + si`, `s ∈ ℝ`. Eliminating `s` gives the
//! threshold function `f(s)` with the closed-form supremum
//! `2√((C₀a + C₁c/2)² + (C₀b + C₁d/2)²) + C₁d`, which is what makes the
//! condition equivalent to the pinching `R > 2(C₀|A₁₁| + C₁|A₁₁,₁̄|)`.

use crate::field::{Dir, Field};
use crate::operators::{cov, p0, p1, p1_bar, Weighted, ZeroOneForm};
use crate::structures::StructureData;
use crate::workspace::Workspace;
use crate::{Result, Scalar, C, I};
use serde::{Deserialize, Serialize};

/// Pointwise convexity data: curvature, torsion, its derivative and the
/// convexity constants.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConvexityPoint {
    pub r: Scalar,
    /// `A₁₁ = a + bi`.
    pub a11: C,
    /// `A₁₁,₁̄ = c + di`.
    pub a11_1b: C,
    pub c0: Scalar,
    pub c1: Scalar,
}

impl ConvexityPoint {
    /// Direct evaluation of the quadratic-plus-linear form at `x¹ = 1 + si`
    /// (an independent code path from the threshold function below).
    pub fn form_at(&self, s: Scalar) -> Scalar {
        let x = C::new(1.0, s);
        let xbar = x.conj();
        let a1b1b = self.a11.conj();
        let a1b1b_1 = self.a11_1b.conj();
        self.r * x.norm_sqr()
            - 2.0 * self.c0 * (I * a1b1b * xbar * xbar).re
            - 2.0 * self.c1 * (I * a1b1b_1 * xbar).re
    }

    /// Threshold function `f(s)`; convexity at the point means
    /// `R > sup_s f(s)`.
    pub fn threshold(&self, s: Scalar) -> Scalar {
        let (a, b) = (self.a11.re, self.a11.im);
        let (c, d) = (self.a11_1b.re, self.a11_1b.im);
        -2.0 * (self.c0 * b
            - ((2.0 * self.c0 * b + self.c1 * d) + (2.0 * self.c0 * a + self.c1 * c) * s)
                / (1.0 + s * s))
    }

    /// Pinching bound `2(C₀|A₁₁| + C₁|A₁₁,₁̄|)`.
    pub fn pinching_bound(&self) -> Scalar {
        2.0 * (self.c0 * self.a11.norm() + self.c1 * self.a11_1b.norm())
    }
}

/// Closed-form maximum of the threshold function, together with the critical
/// point when the non-degenerate branch applies (`C₀a + C₁c/2 ≠ 0`); in the
/// degenerate branch the supremum may be the `|s| → ∞` limit and no critical
/// `s₀` is reported.
pub fn convexity_closed_form(p: &ConvexityPoint) -> (Scalar, Option<Scalar>) {
    let (a, b) = (p.a11.re, p.a11.im);
    let (c, d) = (p.a11_1b.re, p.a11_1b.im);
    let qa = p.c0 * a + p.c1 * c / 2.0;
    let qb = p.c0 * b + p.c1 * d / 2.0;
    let max = 2.0 * (qa * qa + qb * qb).sqrt() + p.c1 * d;
    let s0 = if qa.abs() > 1e-14 {
        Some((-qb + (qa * qa + qb * qb).sqrt()) / qa)
    } else {
        None
    };
    (max, s0)
}

/// Sampled maximum of the threshold function over a symmetric grid,
/// refined around the best grid point, including the tail limit
/// `f(±∞) = −2C₀b`.
pub fn convexity_sampled(p: &ConvexityPoint, span: Scalar, count: usize) -> Scalar {
    let mut best_s = -span;
    let mut best = Scalar::NEG_INFINITY;
    for i in 0..=count {
        let s = -span + 2.0 * span * (i as Scalar) / (count as Scalar);
        let v = p.threshold(s);
        if v > best {
            best = v;
            best_s = s;
        }
    }
    // golden-section refinement around the best grid point
    let step = 2.0 * span / count as Scalar;
    let (mut lo, mut hi) = (best_s - step, best_s + step);
    let gr = 0.5 * (5.0_f64.sqrt() - 1.0);
    for _ in 0..200 {
        let m1 = hi - gr * (hi - lo);
        let m2 = lo + gr * (hi - lo);
        if p.threshold(m1) < p.threshold(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let refined = p.threshold(0.5 * (lo + hi));
    // tail candidate
    let tail = -2.0 * p.c0 * p.a11.im;
    best.max(refined).max(tail)
}

/// Supremum of the threshold over the worst-case phase orbit: the direct
/// quadratic form is sampled over `X = (1+si) Z₁` with the torsion data
/// rotated through independent phases (the quantification over all
/// `X ∈ T₁,₀` at all points of a structure realizing `|A₁₁|`, `|A₁₁,₁̄|`).
/// 720 phase pairs are sampled and each orbit point contributes its own
/// grid-plus-critical-point maximum.
pub fn convexity_phase_worst(p: &ConvexityPoint) -> Scalar {
    let orbit_value = |psi_a: Scalar, psi_b: Scalar| {
        let q = ConvexityPoint {
            a11: p.a11 * C::new(psi_a.cos(), psi_a.sin()),
            a11_1b: p.a11_1b * C::new(psi_b.cos(), psi_b.sin()),
            ..*p
        };
        // each orbit point contributes its own supremum over s
        let mut m = convexity_closed_form(&q).0;
        for k in 0..=40 {
            let s = -10.0 + 0.5 * k as Scalar;
            m = m.max(q.threshold(s));
        }
        m
    };
    let tau = 2.0 * std::f64::consts::PI;
    let (na, nb) = (24, 30);
    let mut best = (0.0, 0.0, Scalar::NEG_INFINITY);
    for i in 0..na {
        for j in 0..nb {
            let (pa, pb) = (
                tau * i as Scalar / na as Scalar,
                tau * j as Scalar / nb as Scalar,
            );
            let v = orbit_value(pa, pb);
            if v > best.2 {
                best = (pa, pb, v);
            }
        }
    }
    // coordinate-wise golden-section refinement around the best orbit point
    let gr = 0.5 * (5.0_f64.sqrt() - 1.0);
    let refine = |f: &dyn Fn(Scalar) -> Scalar, center: Scalar, width: Scalar| {
        let (mut lo, mut hi) = (center - width, center + width);
        for _ in 0..80 {
            let m1 = hi - gr * (hi - lo);
            let m2 = lo + gr * (hi - lo);
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        0.5 * (lo + hi)
    };
    let (mut pa, mut pb, _) = best;
    for _ in 0..3 {
        let fb = pb;
        pa = refine(&|x| orbit_value(x, fb), pa, tau / na as Scalar);
        let fa = pa;
        pb = refine(&|x| orbit_value(fa, x), pb, tau / nb as Scalar);
    }
    best.2.max(orbit_value(pa, pb))
}

/// Convexity verdict with all evaluation routes.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConvexityVerdict {
    /// `R > 2(C₀|A₁₁| + C₁|A₁₁,₁̄|)` (the primary verdict).
    pub pinched: bool,
    /// `R > sup_s f(s)` along the fixed-phase family (sampled supremum).
    /// Implied by the pinching; strictly weaker at generic phases.
    pub family_sampled: bool,
    /// Same with the closed-form supremum.
    pub family_closed: bool,
    /// `R >` the phase-worst supremum (agrees with the pinching both ways).
    pub phase_worst: bool,
    pub margin: Scalar,
    /// Disagreement between the closed-form and sampled family maxima.
    pub route_gap: Scalar,
    /// Gap between the phase-worst supremum and the pinching bound.
    pub phase_worst_gap: Scalar,
}

pub fn is_convex(p: &ConvexityPoint) -> ConvexityVerdict {
    let (closed, _) = convexity_closed_form(p);
    let sampled = convexity_sampled(p, 1e3, 4000);
    let worst = convexity_phase_worst(p);
    ConvexityVerdict {
        pinched: p.r > p.pinching_bound(),
        family_sampled: p.r > sampled,
        family_closed: p.r > closed,
        phase_worst: p.r > worst,
        margin: p.r - p.pinching_bound(),
        route_gap: (closed - sampled).abs(),
        phase_worst_gap: (worst - p.pinching_bound()).abs(),
    }
}

/// Samples the structure's convexity data at the workspace validation
/// points and returns the worst-margin verdict for the given constants.
pub fn structure_convexity(
    ws: &Workspace,
    sd: &StructureData,
    c0: Scalar,
    c1: Scalar,
) -> (ConvexityVerdict, ConvexityPoint) {
    let a11_1b = cov(ws, sd, &Weighted::new(sd.a11.clone(), 2), Dir::Z1bar).value;
    let mut worst: Option<(ConvexityVerdict, ConvexityPoint)> = None;
    for p in ws.validation_points() {
        let cp = ConvexityPoint {
            r: sd.r.eval(*p).re,
            a11: sd.a11.eval(*p),
            a11_1b: a11_1b.eval(*p),
            c0,
            c1,
        };
        let v = is_convex(&cp);
        if worst.as_ref().is_none_or(|(w, _)| v.margin < w.margin) {
            worst = Some((v, cp));
        }
    }
    worst.expect("validation point set is nonempty")
}

/// `Tor(γ, γ) = 2 Re[i A₁̄₁̄ γ₁ γ₁]` as a real field.
pub fn tor_gamma(_ws: &Workspace, sd: &StructureData, gamma: &ZeroOneForm) -> Field {
    let g1 = gamma.g1();
    sd.a11_bar()
        .mul(&g1.mul(&g1))
        .scale(I)
        .re()
        .scale(C::new(2.0, 0.0))
}

/// `Tor'(γ, γ) = 2 Re[i A₁̄₁̄,₁ γ₁]` (the `C₁` term of the convexity form).
pub fn tor_prime_gamma(ws: &Workspace, sd: &StructureData, gamma: &ZeroOneForm) -> Field {
    let a1b1b_1 = cov(ws, sd, &Weighted::new(sd.a11_bar(), -2), Dir::Z1).value;
    a1b1b_1
        .mul(&gamma.g1())
        .scale(I)
        .re()
        .scale(C::new(2.0, 0.0))
}

/// Polarized torsion pairing `Tor(d_b f, γ) = 2 Re[i A₁̄₁̄ f,₁ γ₁]`.
pub fn tor_pair(ws: &Workspace, sd: &StructureData, f: &Field, gamma: &ZeroOneForm) -> Field {
    let f1 = cov(ws, sd, &Weighted::scalar(f.clone()), Dir::Z1).value;
    sd.a11_bar()
        .mul(&f1.mul(&gamma.g1()))
        .scale(I)
        .re()
        .scale(C::new(2.0, 0.0))
}

/// The real quadratic forms of a harmonic part, with their integrals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorsionFormReport {
    pub tor: Scalar,
    pub tor_prime: Scalar,
    pub two_r_minus_tor: Scalar,
    /// Largest imaginary contamination across the three forms.
    pub reality_defect: Scalar,
}

pub fn torsion_forms(ws: &Workspace, sd: &StructureData, gamma: &ZeroOneForm) -> TorsionFormReport {
    let tor = tor_gamma(ws, sd, gamma);
    let torp = tor_prime_gamma(ws, sd, gamma);
    let g1 = gamma.g1();
    let ric2 = sd.r.mul(&g1.mul(&g1.conj())).scale(C::new(2.0, 0.0));
    let two_r_minus_tor = ric2.sub(&tor);
    let defect = tor
        .reality_defect()
        .max(torp.reality_defect())
        .max(two_r_minus_tor.reality_defect());
    TorsionFormReport {
        tor: sd.integrate_w(ws, &tor).re,
        tor_prime: sd.integrate_w(ws, &torp).re,
        two_r_minus_tor: sd.integrate_w(ws, &two_r_minus_tor).re,
        reality_defect: defect,
    }
}

/// Terms and residual of the first Bôchner-type equality
/// `∫(2R − Tor)(γ,γ) + 2∫|γ₁,₁|² + (1/2)∫(P₀f)f = 0`, valid when the
/// pseudo-Einstein equation holds for `(f, γ)` within `delta`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Bochner26A {
    pub curvature_term: Scalar,
    pub gradient_term: Scalar,
    pub paneitz_term: Scalar,
    pub residual: Scalar,
    /// Intermediate: `−∫Tor(d_bf, γ) = ∫(2R−Tor)(γ,γ) + 2∫|γ₁,₁|²`.
    pub eq_28a: Scalar,
    /// Intermediate: `∫(P₀f)f = 2∫Tor(d_bf, γ)`.
    pub eq_29a: Scalar,
    /// Universal part of the pairing: `∫(P₀f)f + ∫[(P₁f)f,₁̄ + (P̄₁f)f,₁]`.
    pub eq_29a_universal: Scalar,
    pub eq7_residual: Scalar,
}

pub fn check_bochner_26a(
    ws: &Workspace,
    sd: &StructureData,
    dec: &crate::hodge::KohnDecomposition,
    f: &Field,
    delta: Scalar,
) -> Result<Bochner26A> {
    let gamma = &dec.gamma;
    let p1f = p1(ws, sd, f).value;
    let gamma1 = Weighted::new(gamma.g1(), 1);
    let gamma10 = cov(ws, sd, &gamma1, Dir::T).value;
    let eq7 = sd.norm_w(
        ws,
        &p1f.sub(&ws.mul(&sd.a11, &gamma.g1b).sub(&gamma10).scale(I)),
    );
    if eq7 > delta {
        return Err(crate::Error::PreconditionViolated {
            what: "pseudo-Einstein equation before the Bôchner identity",
            residual: eq7,
            tol: delta,
        });
    }
    let forms = torsion_forms(ws, sd, gamma);
    let g11 = cov(ws, sd, &gamma1, Dir::Z1).value;
    let grad = 2.0 * sd.inner_w(ws, &g11, &g11).re;
    let p0ff = sd.integrate_pair_w(ws, &p0(ws, sd, f), f).re;
    let paneitz = 0.5 * p0ff;
    let residual = forms.two_r_minus_tor + grad + paneitz;

    let tor_df = sd.integrate_w(ws, &tor_pair(ws, sd, f, gamma)).re;
    let eq_28a = (-tor_df - (forms.two_r_minus_tor + grad)).abs();
    let eq_29a = (p0ff - 2.0 * tor_df).abs();
    let f1 = cov(ws, sd, &Weighted::scalar(f.clone()), Dir::Z1).value;
    let f1b = cov(ws, sd, &Weighted::scalar(f.clone()), Dir::Z1bar).value;
    let pairing = sd.integrate_pair_w(ws, &p1f, &f1b).re
        + sd.integrate_pair_w(ws, &p1_bar(ws, sd, f).value, &f1).re;
    let eq_29a_universal = (p0ff + pairing).abs();
    Ok(Bochner26A {
        curvature_term: forms.two_r_minus_tor,
        gradient_term: grad,
        paneitz_term: paneitz,
        residual: residual.abs(),
        eq_28a,
        eq_29a,
        eq_29a_universal,
        eq7_residual: eq7,
    })
}

/// Standalone integration-by-parts identity behind the 29A chain: for any
/// `f` and any `γ` with `γ₁̄,₁ = 0`,
/// `∫(P₁f) γ₁̄ dμ = i ∫ A₁₁ f,₁̄ γ₁̄ dμ`.
pub fn check_29a_standalone(
    ws: &Workspace,
    sd: &StructureData,
    f: &Field,
    gamma: &ZeroOneForm,
) -> Scalar {
    let lhs = sd.integrate_pair_w(ws, &p1(ws, sd, f).value, &gamma.g1b);
    let f1b = cov(ws, sd, &Weighted::scalar(f.clone()), Dir::Z1bar).value;
    let rhs = sd.integrate_pair_w(ws, &sd.a11, &f1b.mul(&gamma.g1b)) * I;
    (lhs - rhs).norm()
}

/// Standalone identity `∫ γ₁,₀ u,₁̄ dμ = ∫ A₁̄₁̄ u,₁ γ₁ dμ`, valid whenever
/// `γ₁,₁̄ = 0`.
pub fn check_31a_standalone(
    ws: &Workspace,
    sd: &StructureData,
    u: &Field,
    gamma: &ZeroOneForm,
) -> Scalar {
    let gamma1 = Weighted::new(gamma.g1(), 1);
    let gamma10 = cov(ws, sd, &gamma1, Dir::T).value;
    let u1b = cov(ws, sd, &Weighted::scalar(u.clone()), Dir::Z1bar).value;
    let u1 = cov(ws, sd, &Weighted::scalar(u.clone()), Dir::Z1).value;
    let lhs = sd.integrate_pair_w(ws, &gamma10, &u1b);
    let rhs = sd.integrate_pair_w(ws, &sd.a11_bar(), &u1.mul(&gamma.g1()));
    (lhs - rhs).norm()
}

/// Terms and residual of the second Bôchner-type equality
/// `∫(R − Tor/2 − Tor'/2)(γ,γ) + ∫|γ₁,₁|² + ∫Qu + ∫(P₀u⊥)u⊥ = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Bochner2018BB {
    pub curvature_term: Scalar,
    pub gradient_term: Scalar,
    pub qu_term: Scalar,
    pub paneitz_term: Scalar,
    pub residual: Scalar,
    /// Intermediate `∫(R − Tor/2 − Tor'/2)(γ,γ) + ∫|γ₁,₁|² = ∫Tor(d_bu, γ)`.
    pub eq_34: Scalar,
    /// Intermediate `∫ W₁ u,₁̄ = ∫[2P₁u + i(A₁₁γ₁̄ − γ₁,₀)] u,₁̄`.
    pub eq_30a: Scalar,
    /// Intermediate `∫γ₁,₀ u,₁̄ = ∫A₁̄₁̄ u,₁ γ₁`.
    pub eq_31a: Scalar,
    /// Gap `|∫(P₀u)u − ∫(P₀u⊥)u⊥|` (vanishes when `u_ker` lies in the
    /// numerical kernel).
    pub kernel_gap: Scalar,
}

pub fn check_bochner_2018bb(
    ws: &Workspace,
    sd: &StructureData,
    dec: &crate::hodge::KohnDecomposition,
    u_perp: &Field,
    q: &Field,
) -> Bochner2018BB {
    let gamma = &dec.gamma;
    let u = dec.u();
    let forms = torsion_forms(ws, sd, gamma);
    // (R − Tor/2 − Tor'/2)(γ,γ) = (1/2)(2R − Tor)(γ,γ) − (1/2)Tor'(γ,γ)
    let curvature_term = 0.5 * forms.two_r_minus_tor - 0.5 * forms.tor_prime;
    let gamma1 = Weighted::new(gamma.g1(), 1);
    let g11 = cov(ws, sd, &gamma1, Dir::Z1).value;
    let gradient_term = sd.inner_w(ws, &g11, &g11).re;
    let qu_term = sd.integrate_pair_w(ws, q, &u).re;
    let paneitz_term = sd.integrate_pair_w(ws, &p0(ws, sd, u_perp), u_perp).re;
    let residual = (curvature_term + gradient_term + qu_term + paneitz_term).abs();

    let tor_du = sd.integrate_w(ws, &tor_pair(ws, sd, &u, gamma)).re;
    let eq_34 = (curvature_term + gradient_term - tor_du).abs();
    let w = crate::structures::w1(ws, sd).value;
    let u1b = cov(ws, sd, &Weighted::scalar(u.clone()), Dir::Z1bar).value;
    let lhs30 = sd.integrate_pair_w(ws, &w, &u1b);
    let gamma10 = cov(ws, sd, &gamma1, Dir::T).value;
    let rhs30 = sd.integrate_pair_w(
        ws,
        &p1(ws, sd, &u)
            .value
            .scale(C::new(2.0, 0.0))
            .add(&sd.a11.mul(&gamma.g1b).sub(&gamma10).scale(I)),
        &u1b,
    );
    let eq_30a = (lhs30 - rhs30).norm();
    let eq_31a = check_31a_standalone(ws, sd, &u, gamma);
    let p0u_u = sd.integrate_pair_w(ws, &p0(ws, sd, &u), &u).re;
    let kernel_gap = (p0u_u - paneitz_term).abs();
    Bochner2018BB {
        curvature_term,
        gradient_term,
        qu_term,
        paneitz_term,
        residual,
        eq_34,
        eq_30a,
        eq_31a,
        kernel_gap,
    }
}
